"""``slag`` command line.

Exit codes: 0 when every check of the command passed, 1 when a mathematical
predicate failed (the report carries a witness), 2 for usage or input errors
(schema violations name the offending JSON path).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import __version__, acceptance, deform, forms, holo2d, planes, transport
from .dnum import default_tol
from .potential import (GridField, ScalarField, ma_residual_null, slag_residual_x,
                        volume_experiment)
from .potential.appc import appc_residual
from .potential.pogorelov import pogorelov_fixture
from .report import ResidualReport, _clean


class InputError(Exception):
    """Bad input file or arguments: exit code 2."""


class Outcome:
    """What a subcommand hands back: a JSON payload, optional CSV table, pass flag."""

    def __init__(self, payload: dict, passed: bool, table: Optional[tuple] = None):
        self.payload = payload
        self.passed = bool(passed)
        self.table = table


# ---------------------------------------------------------------------------
# input handling

def _schema(name: str) -> dict:
    text = resources.files("splitslag.schemas").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def load_json(path: str, schema: Optional[str] = None) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if schema is not None:
        validator = jsonschema.Draft202012Validator(_schema(schema))
        errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        if errors:
            e = errors[0]
            where = "/" + "/".join(str(p) for p in e.absolute_path)
            raise InputError(f"{path}: schema {schema} violated at {where}: {e.message}")
    return data


def field_from_json(data: dict, path: str = "<field>") -> ScalarField:
    dim = int(data["dim"])
    box = [tuple(b) for b in data["box"]]
    if len(box) != dim:
        raise InputError(f"{path}: box has {len(box)} intervals for dim {dim}")
    if any(hi <= lo for lo, hi in box):
        raise InputError(f"{path}: every box interval needs lo < hi")
    if data["kind"] == "analytic":
        try:
            return ScalarField.from_expr(data["expr"], dim, box, name=data.get("name", ""))
        except ValueError as exc:
            raise InputError(f"{path}: /expr: {exc}") from exc
    values = np.asarray(data["values"], dtype=float)
    if values.ndim != dim:
        raise InputError(f"{path}: /values must be a {dim}-dimensional nested array")
    G = GridField(values, box, data.get("name", "grid"))
    if "h" in data:
        h = np.broadcast_to(np.asarray(data["h"], dtype=float), (dim,))
        if not np.allclose(h, G.h, rtol=1e-9):
            raise InputError(f"{path}: /h = {h.tolist()} disagrees with box and grid shape ({G.h.tolist()})")
    return G.to_field()


def grid_from_json(data: dict, path: str) -> GridField:
    if data["kind"] != "grid":
        raise InputError(f"{path}: expected kind 'grid'")
    values = np.asarray(data["values"], dtype=float)
    return GridField(values, [tuple(b) for b in data["box"]])


def density_from_json(data: dict, path: str) -> transport.Density1D:
    try:
        if "grid" in data:
            return transport.Density1D(data["grid"], data["pdf"])
        f = ScalarField.from_expr(data["expr"], 1)
        lo, hi = data["interval"]
        return transport.Density1D.from_callable(lambda x: f(np.asarray(x)[:, None]), lo, hi,
                                                 int(data.get("refine", 12)))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _complex_list(items) -> list:
    return [complex(c[0], c[1]) if isinstance(c, list) else complex(c) for c in items]


def _nodes_box(field: ScalarField, grid: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, grid) for lo, hi in field.box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _seed(args, default: int) -> int:
    return default if args.seed is None else args.seed


def _report_payload(rep: ResidualReport, per_node: bool) -> dict:
    return rep.to_json(per_node=per_node)


# ---------------------------------------------------------------------------
# subcommands

def cmd_plane(args) -> Outcome:
    data = load_json(args.inp, "plane")
    try:
        P = planes.PlaneBasis.from_json(data)
    except ValueError as exc:
        raise InputError(f"{args.inp}: /columns: {exc}") from exc
    rep = planes.analyze_plane(P.columns, args.tol if args.tol is not None else data.get("tol"))
    out = rep.to_json()
    return Outcome(out, bool(rep.slag))


def cmd_canonical(args) -> Outcome:
    data = load_json(args.inp, "plane")
    P = planes.PlaneBasis.from_json(data).columns
    try:
        cd = planes.canonical_angles(P)
    except ValueError as exc:
        return Outcome({"error": str(exc)}, False)
    rq, rr = cd.reconstruction_residuals()
    out = cd.to_json()
    out.update({"quad_residual": rq, "re_dz_residual": rr})
    return Outcome(out, max(rq, rr) <= 1e-8)


def cmd_graph_test(args) -> Outcome:
    data = load_json(args.inp, "graph")
    try:
        G = planes.GraphMatrix(data["picture"], np.asarray(data["matrix"], dtype=float))
    except ValueError as exc:
        raise InputError(f"{args.inp}: /matrix: {exc}") from exc
    rep = planes.graph_tests(G, args.tol)
    return Outcome(rep.to_json(), rep.slag)


def cmd_cayley(args) -> Outcome:
    data = load_json(args.inp, "graph")
    M = np.asarray(data["matrix"], dtype=float)
    try:
        if data["picture"] == "x":
            A, B = M, planes.cayley_graph(M)
        else:
            A, B = planes.cayley_inverse(M), M
    except ValueError as exc:
        return Outcome({"error": str(exc)}, False)
    rx = planes.graph_tests(planes.GraphMatrix("x", A), args.tol)
    rn = planes.graph_tests(planes.GraphMatrix("null", B), args.tol)
    out = {"A": A.tolist(), "B": B.tolist(), "x_picture": rx.to_json(), "null_picture": rn.to_json(),
           "det_B": float(np.linalg.det(B)), "equivalent": rx.slag == rn.slag}
    return Outcome(out, rx.slag == rn.slag)


def cmd_sample_mealy(args) -> Outcome:
    rep = planes.mealy_experiment(args.n, args.count, _seed(args, 0), args.eq_tol, args.threads)
    return Outcome(rep.to_json(), rep.passed)


def cmd_residual(args) -> Outcome:
    data = load_json(args.potential, "field")
    tol = default_tol(args.tol)
    if data["kind"] == "grid":
        f = grid_from_json(data, args.potential)
        pts = None
    else:
        f = field_from_json(data, args.potential)
        pts = _nodes_box(f, args.grid)
    if args.picture == "x":
        rep = slag_residual_x(f, pts, tol)
        passed = rep.flags["slag"]
    else:
        rep = ma_residual_null(f, None, pts, tol)
        passed = rep.flags["solves"] and rep.flags["convex"]
    return Outcome(_report_payload(rep, args.per_node), passed, rep.csv_rows())


def cmd_volume_exp(args) -> Outcome:
    g = field_from_json(load_json(args.g, "field"), args.g)
    eta = field_from_json(load_json(args.eta, "field"), args.eta)
    annulus = tuple(args.annulus) if args.annulus else None
    if g.dim != 2 and annulus:
        raise InputError("--annulus needs a two-dimensional potential")
    try:
        rows = volume_experiment(g, eta, args.eps, nodes=args.nodes, annulus=annulus)
    except ValueError as exc:
        return Outcome({"error": str(exc)}, False)
    ok = [r for r in rows if not r["flagged"]]
    passed = bool(ok) and len(ok) == len(rows) and all(r["nonnegative"] for r in ok)
    keys = ["eps", "flagged", "vol_M", "vol_N", "deficit", "amgm_oracle", "oracle_gap",
            "stokes_gap", "deficit_over_eps2"]
    table = (keys, [[r.get(k) for k in keys] for r in rows])
    return Outcome({"rows": rows}, passed, table)


def cmd_transport(args) -> Outcome:
    if args.mode == "1d":
        rho = density_from_json(load_json(args.rho, "density"), args.rho)
        rt = density_from_json(load_json(args.rho_tilde, "density"), args.rho_tilde)
        plan = transport.ot_1d(rho, rt)
        out = plan.to_json()
        res = np.abs(plan.residual)
        out["max_residual"] = float(np.nanmax(res))
        passed = plan.checks["monotone"] and plan.checks["convex"] and out["max_residual"] <= args.res_tol
        table = (["u", "T", "g", "residual"],
                 [[a, b, c, d] for a, b, c, d in zip(plan.u, plan.T, plan.g, plan.residual)])
        return Outcome(out, passed, table)
    if args.mode == "discrete":
        mu = np.asarray(load_json(args.mu, "points")["points"], dtype=float)
        nu = np.asarray(load_json(args.nu, "points")["points"], dtype=float)
        try:
            plan = transport.ot_discrete(mu, nu)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        out = plan.to_json()
        passed = all(v for k, v in plan.checks.items() if isinstance(v, bool))
        if len(plan.perm) <= 8:
            _, best = transport.brute_force_assignment(mu, nu)
            out["brute_force_cost"] = best
            passed = passed and abs(best - plan.total_cost) <= 1e-9 * max(1.0, best)
        table = (["source", "target"], [[i, int(j)] for i, j in enumerate(plan.perm)])
        return Outcome(out, passed, table)
    # kmw
    g = field_from_json(load_json(args.potential, "field"), args.potential)
    rho = ScalarField.from_expr(args.rho_expr, g.dim)
    rt = ScalarField.from_expr(args.rho_tilde_expr, g.dim)
    pts = _nodes_box(g, args.grid)
    if g.domain is not None:
        pts = pts[g.domain(pts)]
    rep = transport.kmw_check(g, rho, rt, pts, tol=args.tol or 1e-9)
    passed = rep.flags["im_phi_zero"] and rep.flags["lagrangian"] and rep.flags["convex"]
    return Outcome(_report_payload(rep, args.per_node), passed, rep.csv_rows())


def cmd_holo2d(args) -> Outcome:
    if args.mode == "identity":
        rep = holo2d.coord_map_and_form_identity()
        return Outcome(rep.to_json(), rep.identity_residual == 0.0)
    if args.mode == "plane":
        if args.lattice:
            vals = np.linspace(-args.extent, args.extent, args.lattice)
            rows = [holo2d.plane_correspondence(float(a), float(b)).to_json() for a in vals for b in vals]
        else:
            if args.a is None or args.b is None:
                raise InputError("holo2d plane needs --a and --b, or --lattice")
            rows = [holo2d.plane_correspondence(args.a, args.b).to_json()]
        agree = all(r["slag"] == r["graph_slag"] for r in rows)
        table = (["a", "b", "abs_slope", "slag", "graph_slag"],
                 [[r["A"][0][0], r["A"][0][1], r["abs_slope"], r["slag"], r["graph_slag"]] for r in rows])
        return Outcome({"planes": rows, "all_agree": agree}, agree, table)
    data = load_json(args.spec, "curve")
    grid = data.get("grid", {})
    curve = holo2d.ComplexCurveParam(_complex_list(data["coeffs1"]), _complex_list(data["coeffs2"]),
                                     radius=float(grid.get("radius", 1.0)), n=int(grid.get("n", 41)))
    tol = args.tol if args.tol is not None else 1e-12
    _, rep = holo2d.curve_to_surface(curve, tol=tol)
    passed = rep.flags["unconstrained_slag"] and rep.flags["margin_sign_agrees"]
    return Outcome(_report_payload(rep, args.per_node), passed, rep.csv_rows())


def cmd_deform(args) -> Outcome:
    g = field_from_json(load_json(args.g, "field"), args.g)
    gd = field_from_json(load_json(args.gdot, "field"), args.gdot)
    box = g.box
    nodes = (args.grid, 2 * args.grid - 1)
    tol = args.tol if args.tol is not None else 1e-6
    try:
        table = deform.refinement_table(g, gd, nodes, box)
    except ValueError as exc:
        return Outcome({"error": str(exc)}, False)
    first = table[0]
    out = {"residuals": {k: first[k] for k in ("first_order_residual", "d_theta_residual",
                                               "d_star_theta_residual", "star_relation_residual")},
           "refinement": table, "star_sign": deform.STAR_SIGN, "tol": tol}
    passed = first["first_order_residual"] <= tol and first["d_theta_residual"] <= tol
    keys = ["nodes", "h", "first_order_residual", "d_theta_residual", "d_star_theta_residual",
            "star_relation_residual"]
    return Outcome(out, passed, (keys, [[r[k] for k in keys] for r in table]))


def cmd_phase_grad(args) -> Outcome:
    try:
        if args.fixture == "hyperbola":
            surf = deform.hyperbola_product(args.h)
        else:
            if not args.matrix:
                raise InputError("--fixture flat needs --matrix (JSON 2n x n)")
            try:
                A = np.asarray(json.loads(args.matrix), dtype=float)
            except (json.JSONDecodeError, ValueError) as exc:
                raise InputError(f"--matrix: {exc}") from exc
            surf = deform.flat_plane(A, h=args.h)
        rep = deform.phase_gradient_check(surf, args.q)
    except InputError:
        raise
    except ValueError as exc:
        return Outcome({"error": str(exc)}, False)
    bound = args.C * args.h
    out = _report_payload(rep, args.per_node)
    out["bound"] = bound
    return Outcome(out, rep.max <= bound and rep.flags["phase_minimal_agree"], rep.csv_rows())


def cmd_forms_check(args) -> Outcome:
    if args.inp:
        data = load_json(args.inp, "forms")
        try:
            alpha, beta, omega = (forms.AltForm.from_json(data[k]) for k in ("alpha", "beta", "omega"))
        except (ValueError, KeyError, IndexError) as exc:
            raise InputError(f"{args.inp}: {exc}") from exc
        mode = data.get("mode", "strict")
        variant = data.get("variant", "alpha_beta")
    else:
        alpha, beta, omega = forms.product_model(args.model)
        mode, variant = "strict", "alpha_beta"
        if args.perturb:
            d = omega.dim
            # omega + eps * (a' ^ b') on the first block breaks alpha ^ omega = 0
            omega = omega + forms.AltForm.coordinate(d, 2).wedge(forms.AltForm.coordinate(d, 3)) * args.perturb
            mode = "basic"
    try:
        rep = forms.ricci_flat_check(alpha, beta, omega, mode, variant, args.tol)
    except ValueError as exc:
        return Outcome({"error": str(exc)}, False)
    passed = rep.simple_ok and rep.wedge_omega_ok and rep.proportionality is not None
    if mode == "strict":
        passed = passed and bool(rep.strict_ok)
    return Outcome(rep.to_json(), passed)


def cmd_appc(args) -> Outcome:
    u = field_from_json(load_json(args.u, "field"), args.u)
    h = field_from_json(load_json(args.h, "field"), args.h)
    if u.dim != 2 or h.dim != 2:
        raise InputError("appc needs two-dimensional u and h")
    rng = np.random.default_rng(_seed(args, 0))
    lo = np.array([b[0] for b in u.box] + [-1.0])
    hi = np.array([b[1] for b in u.box] + [1.0])
    pts = lo + (hi - lo) * rng.random((args.points, 3))
    rep = appc_residual(u, h, pts)
    tol = default_tol(args.tol)
    passed = rep.flags["decomposition_ok"] and (rep.max <= tol if args.expect_zero else True)
    return Outcome(_report_payload(rep, args.per_node), passed, rep.csv_rows())


def cmd_pogorelov(args) -> Outcome:
    res = pogorelov_fixture(k=args.k, profile=args.profile, nodes=args.nodes)
    out = res.to_json()
    passed = res.report.max <= 1e-6 and (args.k is not None or res.ratio >= 1e3)
    table = (["k", "objective"], res.k_curve)
    return Outcome(out, passed, table)


def cmd_accept(args) -> Outcome:
    ks = range(1, 13) if args.criterion is None else [args.criterion]
    results = []
    for k in ks:
        kw = {}
        if k == 1:
            kw = {"seed": _seed(args, 7), "threads": args.threads}
        results.append(acceptance.run(k, **kw))
    table = (["criterion", "name", "passed"], [[r["criterion"], r["name"], r["passed"]] for r in results])
    payload = results[0] if len(results) == 1 else {"results": results}
    return Outcome(payload, all(r["passed"] for r in results), table)


# ---------------------------------------------------------------------------
# parser

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


_GLOBAL_DEFAULTS = {"format": "json", "out": None, "seed": None, "threads": 1, "tol": None}


def _common() -> argparse.ArgumentParser:
    """Global options, accepted before or after the subcommand."""
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    c.add_argument("--out", default=argparse.SUPPRESS, help="write the report here instead of stdout")
    c.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    c.add_argument("--threads", type=_positive_int, default=argparse.SUPPRESS)
    c.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                   help="tolerance override (default: SLAG_TOL or 1e-10)")
    return c


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = argparse.ArgumentParser(prog="slag", description="Split special Lagrangian geometry checks.",
                                parents=[common])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _sub = p.add_subparsers(dest="command", required=True)

    class _Sub:
        # every subparser inherits the global options
        def add_parser(self, name, **kw):
            return _sub.add_parser(name, parents=[common], **kw)

    sub = _Sub()

    s = sub.add_parser("plane", help="predicates and dz of one plane")
    s.add_argument("--in", dest="inp", required=True)
    s.set_defaults(func=cmd_plane)

    s = sub.add_parser("canonical", help="canonical angles and phase of a space-like positive plane")
    s.add_argument("--in", dest="inp", required=True)
    s.set_defaults(func=cmd_canonical)

    s = sub.add_parser("graph-test", help="space-like / Lagrangian / slag tests of a graph matrix")
    s.add_argument("--in", dest="inp", required=True)
    s.set_defaults(func=cmd_graph_test)

    s = sub.add_parser("cayley", help="Cayley transform between the x and null pictures")
    s.add_argument("--in", dest="inp", required=True)
    s.set_defaults(func=cmd_cayley)

    s = sub.add_parser("sample-mealy", help="seeded Mealy inequality experiment")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--count", type=_positive_int, default=10_000)
    s.add_argument("--eq-tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_sample_mealy)

    s = sub.add_parser("residual", help="graph-equation residuals of a potential")
    s.add_argument("--picture", choices=("x", "null"), required=True)
    s.add_argument("--potential", required=True)
    s.add_argument("--grid", type=_positive_int, default=21, help="nodes per axis (analytic fields)")
    s.add_argument("--per-node", action="store_true")
    s.set_defaults(func=cmd_residual)

    s = sub.add_parser("volume-exp", help="volume deficit of perturbed graphs")
    s.add_argument("--g", required=True)
    s.add_argument("--eta", required=True)
    s.add_argument("--eps", type=float, nargs="+", required=True)
    s.add_argument("--nodes", type=_positive_int, default=201)
    s.add_argument("--annulus", type=float, nargs=2, metavar=("R_MIN", "R_MAX"))
    s.set_defaults(func=cmd_volume_exp)

    s = sub.add_parser("transport", help="optimal transport bridge")
    tsub = s.add_subparsers(dest="mode", required=True)
    t = tsub.add_parser("1d", parents=[common])
    t.add_argument("--rho", required=True)
    t.add_argument("--rho-tilde", required=True)
    t.add_argument("--res-tol", type=float, default=1e-6)
    t = tsub.add_parser("discrete", parents=[common])
    t.add_argument("--mu", required=True)
    t.add_argument("--nu", required=True)
    t = tsub.add_parser("kmw", parents=[common])
    t.add_argument("--potential", required=True)
    t.add_argument("--rho-expr", default="1")
    t.add_argument("--rho-tilde-expr", default="1")
    t.add_argument("--grid", type=_positive_int, default=41)
    t.add_argument("--per-node", action="store_true")
    s.set_defaults(func=cmd_transport)

    s = sub.add_parser("holo2d", help="dimension-two holomorphic correspondence")
    hsub = s.add_subparsers(dest="mode", required=True)
    hsub.add_parser("identity", parents=[common])
    h = hsub.add_parser("curve", parents=[common])
    h.add_argument("--spec", required=True)
    h.add_argument("--per-node", action="store_true")
    h = hsub.add_parser("plane", parents=[common])
    h.add_argument("--a", type=float)
    h.add_argument("--b", type=float)
    h.add_argument("--lattice", type=int, help="k x k lattice of (a, b)")
    h.add_argument("--extent", type=float, default=1.4)
    s.set_defaults(func=cmd_holo2d)

    s = sub.add_parser("deform", help="variation 1-forms: harmonicity and star relation")
    s.add_argument("--g", required=True)
    s.add_argument("--gdot", required=True)
    s.add_argument("--grid", type=_positive_int, default=51, help="nodes per axis on the coarse grid")
    s.set_defaults(func=cmd_deform)

    s = sub.add_parser("phase-grad", help="phase gradient against mean curvature")
    s.add_argument("--fixture", choices=("hyperbola", "flat"), default="hyperbola")
    s.add_argument("--matrix", help="JSON 2n x n matrix for the flat fixture")
    s.add_argument("--h", type=float, default=0.1)
    s.add_argument("--q", type=int, default=None)
    s.add_argument("--C", type=float, default=1.0, help="accept residual <= C h")
    s.add_argument("--per-node", action="store_true")
    s.set_defaults(func=cmd_phase_grad)

    s = sub.add_parser("forms-check", help="Ricci-flat triple checker")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--in", dest="inp")
    g.add_argument("--model", type=int, help="product model on R^(2n)")
    s.add_argument("--perturb", type=float, default=0.0)
    s.set_defaults(func=cmd_forms_check)

    s = sub.add_parser("appc", help="Laplacian plus Hessian determinant decomposition")
    s.add_argument("--u", required=True)
    s.add_argument("--h", required=True)
    s.add_argument("--points", type=_positive_int, default=100)
    s.add_argument("--expect-zero", action="store_true", help="also require residual <= tol")
    s.add_argument("--per-node", action="store_true")
    s.set_defaults(func=cmd_appc)

    s = sub.add_parser("pogorelov", help="singular family: root-find k, residuals off the axis")
    s.add_argument("--k", type=float)
    s.add_argument("--profile", choices=("cos", "ode"), default="cos")
    s.add_argument("--nodes", type=_positive_int, default=40)
    s.set_defaults(func=cmd_pogorelov)

    s = sub.add_parser("accept", help="run acceptance criteria")
    s.add_argument("--criterion", type=int, choices=range(1, 13))
    s.set_defaults(func=cmd_accept)
    return p


def _emit(outcome: Outcome, fmt: str, out: Optional[str]) -> None:
    if fmt == "csv" and outcome.table is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header, rows = outcome.table
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for v in _clean(list(r))])
        text = buf.getvalue()
    else:
        payload = dict(outcome.payload)
        payload["passed"] = outcome.passed
        text = json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:  # e.g. piped into head
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    for k, v in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    if args.tol is None and "SLAG_TOL" in os.environ:
        try:
            args.tol = float(os.environ["SLAG_TOL"])
        except ValueError:
            print("slag: SLAG_TOL is not a number", file=sys.stderr)
            return 2
    try:
        outcome = args.func(args)
    except InputError as exc:
        print(f"slag: {exc}", file=sys.stderr)
        return 2
    _emit(outcome, args.format, args.out)
    return 0 if outcome.passed else 1


if __name__ == "__main__":
    sys.exit(main())
