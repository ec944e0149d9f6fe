"""The twelve desk-scale acceptance checks.

Each ``criterion_k`` returns a dict with keys criterion, name, passed and
details (JSON-ready).  Tolerances are the stated ones; nothing here is tuned
to make a check pass.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import deform, forms, holo2d, planes, transport
from .dmat import DMatrix, det_d
from .potential import (ScalarField, annulus_points, odd_sigma_sum, radial_solution,
                        volume_experiment)
from .potential.pogorelov import pogorelov_fixture
from .potential.residuals import im_det_null
from .potential.surfaces import ANNULUS_BUMP, polar_graph_surface, volume_and_calibrated_integral
from .report import _clean


def _result(k: int, name: str, passed: bool, details: dict) -> dict:
    return {"criterion": k, "name": name, "passed": bool(passed), "details": _clean(details)}


def criterion_1(seed: int = 7, count: int = 10_000, threads: int = 1) -> dict:
    reps = [planes.mealy_experiment(n, count, seed, 1e-9, threads) for n in (2, 3, 4)]
    return _result(1, "Mealy inequality and equality set", all(r.passed for r in reps),
                   {"runs": [r.to_json() for r in reps]})


def criterion_2(seed: int = 2) -> dict:
    rng = np.random.default_rng(seed)
    worst = {}
    for n in (2, 3):
        gaps = []
        for _ in range(100):
            P = rng.standard_normal((2 * n, n))
            a = det_d(DMatrix(P[:n], P[n:]))
            b = forms.eval_dz_oracle(P)
            gaps.append(max(abs(a.re - b.re), abs(a.im - b.im)))
        worst[n] = max(gaps)
    return _result(2, "dz dual-route oracle", max(worst.values()) <= 1e-12,
                   {"max_gap": {str(k): v for k, v in worst.items()}, "tol": 1e-12})


def criterion_3(seed: int = 3, count: int = 1000) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_n3 = 0.0
    for i in range(count):
        n = 1 + i % 6
        M = rng.standard_normal((n, n))
        A = 0.5 * (M + M.T)
        # D-route: Im det_D(I + tau A) through the D-matrix determinant
        im = det_d(DMatrix(np.eye(n), A)).im
        s = odd_sigma_sum(A)
        worst = max(worst, abs(im - s) / max(1.0, abs(s)))
        worst = max(worst, abs(im_det_null(A) - s) / max(1.0, abs(s)))
        if n == 3:
            alt = np.trace(A) + np.linalg.det(A)
            worst_n3 = max(worst_n3, abs(im - alt) / max(1.0, abs(alt)))
    return _result(3, "sigma-odd identity", worst <= 1e-10 and worst_n3 <= 1e-10,
                   {"max_relative_gap": worst, "n3_trace_plus_det_gap": worst_n3, "tol": 1e-10})


def _slag_symmetric(n: int, rng: np.random.Generator) -> np.ndarray:
    """Symmetric A with eigenvalues tanh(t_i), sum t_i = 0: Im det_D(I + tau A) = 0."""
    bound = math.atanh(0.95)
    while True:
        t = rng.uniform(-1.2, 1.2, n)
        t -= t.mean()
        if np.all(np.abs(t) < bound):
            break
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q @ np.diag(np.tanh(t)) @ Q.T


def criterion_4(seed: int = 4, count: int = 1000, tol: float = 1e-9) -> dict:
    rng = np.random.default_rng(seed)
    mism = 0
    det_gap_slag = 0.0
    n_slag = 0
    det_gap_other_min = np.inf
    for i in range(count):
        n = 2 + i % 3
        if i % 2:
            A = _slag_symmetric(n, rng)
        else:
            Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
            A = Q @ np.diag(rng.uniform(-0.95, 0.95, n)) @ Q.T
        A = 0.5 * (A + A.T)
        B = planes.cayley_graph(A)
        sx = planes.graph_tests(planes.GraphMatrix("x", A), tol).slag
        sn = planes.graph_tests(planes.GraphMatrix("null", B), tol).slag
        mism += int(sx != sn)
        gap = abs(np.linalg.det(B) - 1.0)
        if sn:
            n_slag += 1
            det_gap_slag = max(det_gap_slag, gap)
        else:
            det_gap_other_min = min(det_gap_other_min, gap)
    passed = mism == 0 and det_gap_slag <= tol and det_gap_other_min > tol and n_slag > 0
    return _result(4, "Cayley equivalence", passed,
                   {"mismatches": mism, "n_slag": n_slag, "max_det_gap_on_slag": det_gap_slag,
                    "min_det_gap_off_slag": det_gap_other_min})


def criterion_5(seed: int = 5, count: int = 1000) -> dict:
    rng = np.random.default_rng(seed)
    ang_err = 0.0
    phase_err = 0.0
    quad_err = 0.0
    for i in range(count):
        n = 2 + i % 3
        P, angles, phase = planes.sample_plane(n, rng, "generic")
        cd = planes.canonical_angles(P)
        ang_err = max(ang_err, float(np.max(np.abs(np.asarray(cd.angles) - angles), initial=0.0)))
        phase_err = max(phase_err, abs(cd.phase - phase))
        E = planes.orthonormalize(P)
        q = planes.dz_of(E).quad()
        quad_err = max(quad_err, abs(q - float(np.prod([1 + l * l for l in cd.lambdas]))))
    passed = ang_err <= 1e-8 and quad_err <= 1e-8
    return _result(5, "canonical form round trip", passed,
                   {"max_angle_error": ang_err, "max_phase_error": phase_err,
                    "max_quad_error": quad_err, "tol": 1e-8})


def criterion_6(nodes: int = 201, eps_list=(0.1, 0.2, 0.4)) -> dict:
    g = radial_solution(1.0)
    surf = polar_graph_surface(g, 0.5, 1.5, nodes, nodes)
    vol = volume_and_calibrated_integral(surf)["vol"]
    eta = ScalarField.from_expr(ANNULUS_BUMP, 2)
    rows = volume_experiment(g, eta, list(eps_list), nodes=nodes, annulus=(0.5, 1.5))
    ok_rows = [r for r in rows if not r["flagged"]]
    nonneg = all(r["deficit"] >= -1e-10 for r in ok_rows)
    # quadrature error witness: the calibrated integral should reproduce vol(M) exactly
    oracle_ok = all(abs(r["oracle_gap"]) <= 10 * max(abs(r["stokes_gap"]), 1e-12) for r in ok_rows)
    ratios = [r["deficit_over_eps2"] for r in ok_rows]
    spread = (max(ratios) - min(ratios)) / min(ratios) if len(ratios) == len(rows) and min(ratios) > 0 else math.inf
    passed = abs(vol - 2 * math.pi) <= 1e-6 and nonneg and oracle_ok and spread < 0.2
    return _result(6, "volume maximization", passed,
                   {"vol_M": vol, "vol_error": vol - 2 * math.pi, "rows": rows,
                    "ratio_spread": spread, "simpson_intervals": nodes - 1})


def criterion_7(seed: int = 7) -> dict:
    uni = transport.ot_1d(transport.Density1D.uniform(0, 1), transport.Density1D.uniform(0, 2))
    r1 = max(float(np.nanmax(np.abs(uni.residual))), float(np.abs(uni.T - 2 * uni.u).max()))
    g = radial_solution(1.0)
    pts = annulus_points(0.5, 1.5, 41, 64)
    one = lambda P: np.ones(P.shape[0])
    kmw = transport.kmw_check(g, one, one, pts)
    rng = np.random.default_rng(seed)
    mism = 0
    inst = 0
    for n in range(2, 9):
        for d in (1, 2):
            for _ in range(3):
                mu = rng.standard_normal((n, d))
                nu = rng.standard_normal((n, d))
                plan = transport.ot_discrete(mu, nu)
                _, best = transport.brute_force_assignment(mu, nu)
                inst += 1
                mism += int(abs(plan.total_cost - best) > 1e-9 * max(1.0, best))
    passed = r1 <= 1e-10 and kmw.max <= 1e-9 and mism == 0
    return _result(7, "transport bridge", passed,
                   {"uniform_1d_residual": r1, "kmw_max_im_phi": kmw.max, "kmw_flags": kmw.flags,
                    "discrete_instances": inst, "discrete_mismatches": mism})


def criterion_8() -> dict:
    ident = holo2d.coord_map_and_form_identity()
    curve = holo2d.ComplexCurveParam([0, 1], [0, 0, 0.25], radius=1.0, n=41)
    _, rep = holo2d.curve_to_surface(curve, tol=1e-12)
    lattice = np.linspace(-1.4, 1.4, 8)
    disagree = 0
    for a in lattice:
        for b in lattice:
            pc = holo2d.plane_correspondence(float(a), float(b))
            disagree += int(pc.slag != pc.graph_slag)
    passed = (ident.identity_residual == 0.0 and rep.series_max("omega") <= 1e-12
              and rep.max <= 1e-12 and rep.flags["margin_sign_agrees"] and disagree == 0)
    return _result(8, "dimension-two holomorphic correspondence", passed,
                   {"identity": ident.to_json(), "curve_omega_max": rep.series_max("omega"),
                    "curve_im_dz_max": rep.max, "margin_sign_agrees": rep.flags["margin_sign_agrees"],
                    "lattice_points": 64, "lattice_disagreements": disagree})


def criterion_9(tol: float = 1e-6) -> dict:
    g = radial_solution(1.0)
    lin = ScalarField.from_expr("0.3*x1 - 0.7*x2", 2)
    table = deform.refinement_table(g, lin, (51, 101))
    r_ds = table[1]["d_star_theta_ratio"]
    r_st = table[1]["star_relation_ratio"]
    bad = deform.variation_harmonicity(
        deform.VariationData(g, ScalarField.from_expr("x1^2 + x2^2", 2), nodes=51), tol=tol)
    ok_ratio = all(r is not None and 3.0 <= r <= 5.0 for r in (r_ds, r_st))
    passed = ok_ratio and bad.first_order_residual > 10 * tol and table[0]["first_order_residual"] <= tol
    return _result(9, "deformation harmonicity and star relation", passed,
                   {"table": table, "non_first_order": bad.residuals(), "tol": tol,
                    "star_sign": deform.calibrate_star_sign()})


def criterion_10() -> dict:
    hs = (0.2, 0.1, 0.05)
    res = [deform.phase_gradient_check(deform.hyperbola_product(h)).max for h in hs]
    ratios = [res[i] / res[i + 1] for i in range(len(res) - 1)]
    C = max(r / h for r, h in zip(res, hs))
    flats = [
        np.array([[1, 0], [0, 1], [2, 0], [0, 0.]]),      # time-like line times space-like line
        np.array([[1, 0], [0, 1], [0.5, 0], [0, 0.25]]),  # space-like plane
    ]
    flat_res = [deform.phase_gradient_check(deform.flat_plane(A)).max for A in flats]
    passed = all(r >= 1.5 for r in ratios) and C < 1.0 and all(f == 0.0 for f in flat_res)
    return _result(10, "phase gradient", passed,
                   {"h": list(hs), "residuals": res, "ratios": ratios, "C": C,
                    "flat_residuals": flat_res})


def criterion_11(eps_list=(1e-3, 1e-2, 1e-1)) -> dict:
    alpha, beta, omega = forms.product_model(2)
    rep = forms.ricci_flat_check(alpha, beta, omega, mode="strict")
    pert = forms.AltForm.coordinate(4, 2).wedge(forms.AltForm.coordinate(4, 3))  # a' ^ b'
    residuals = []
    for e in eps_list:
        r = forms.ricci_flat_check(alpha, beta, omega + pert * e, mode="basic")
        residuals.append({"eps": e, "wedge_omega_ok": r.wedge_omega_ok,
                          "residual": r.wedge_omega_residual})
    slopes = [r["residual"] / r["eps"] for r in residuals]
    linear = max(slopes) - min(slopes) <= 1e-9 * max(slopes)
    passed = (rep.simple_ok and rep.wedge_omega_ok and rep.proportionality is not None
              and abs(rep.proportionality + 0.5) <= 1e-12
              and all(not r["wedge_omega_ok"] for r in residuals) and linear)
    return _result(11, "Ricci-flat triple checker", passed,
                   {"base": rep.to_json(), "perturbed": residuals, "slopes": slopes})


def criterion_12(profile: str = "cos") -> dict:
    res = pogorelov_fixture(profile=profile, nodes=40)
    passed = res.report.max <= 1e-6 and res.ratio >= 1e3
    return _result(12, "Pogorelov fixture", passed, res.to_json())


CRITERIA: dict = {k: globals()[f"criterion_{k}"] for k in range(1, 13)}


def run(k: int, **kw) -> dict:
    if k not in CRITERIA:
        raise ValueError(f"criterion must be in 1..12, got {k}")
    return CRITERIA[k](**kw)
