"""Pogorelov-type singular family in D^3.

In null coordinates (u1, u, v1, v) with u, v in R^2, the surface is
generated by phi(u1, v) = -k |v|^4 f(u1) through

    v1 = d phi / d u1 = -k |v|^4 f'(u1),    u = -d phi / d v = 4 k |v|^2 f(u1) v,

which makes it Lagrangian for every k and f.  Along it

    (du - dv)(d u1, d v2, d v3) = -k |v|^4 (f'' + 48 k f^2),

so Im dz vanishes identically iff f'' = -48 k f^2.  profile="cos" uses
f = cos (f'' + f = 0), for which no k works; profile="ode" integrates
f'' = -f^2, f(0) = 1, f'(0) = 0, for which k = 1/48 is exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .. import planes
from ..report import ResidualReport
from .surfaces import ImmersedSurface, eds_report


def _profile(name: str):
    if name == "cos":
        return (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))
    if name == "ode":
        def rhs(t, y):
            return [y[1], -y[0] ** 2]
        fwd = solve_ivp(rhs, (0.0, 1.6), [1.0, 0.0], method="DOP853", rtol=1e-13, atol=1e-14,
                        dense_output=True)

        def ev(t):
            t = np.asarray(t, dtype=float)
            y = fwd.sol(np.abs(t))
            # f is even, f' is odd
            return y[0], np.sign(t) * y[1]

        return (lambda t: ev(t)[0], lambda t: ev(t)[1], lambda t: -ev(t)[0] ** 2)
    raise ValueError(f"unknown profile {name!r}")


def pogorelov_surface(k: float, profile: str = "cos") -> ImmersedSurface:
    f, f1, f2 = _profile(profile)

    def null_coords(S):
        u1, w = S[:, 0], S[:, 1:3]
        R = np.sum(w * w, axis=1)
        v1 = -k * R ** 2 * f1(u1)
        uu = (4 * k * R * f(u1))[:, None] * w
        return u1, uu, v1, w

    def mapping(S):
        u1, uu, v1, w = null_coords(S)
        U = np.column_stack([u1, uu])
        V = np.column_stack([v1, w])
        return np.concatenate([0.5 * (U + V), 0.5 * (V - U)], axis=1)

    def jac(S):
        m = S.shape[0]
        u1, w = S[:, 0], S[:, 1:3]
        R = np.sum(w * w, axis=1)
        F0, F1, F2 = f(u1), f1(u1), f2(u1)
        dU = np.zeros((m, 3, 3))
        dV = np.zeros((m, 3, 3))
        dU[:, 0, 0] = 1.0
        dV[:, 0, 0] = -k * R ** 2 * F2
        dV[:, 0, 1:] = (-4 * k * R * F1)[:, None] * w
        dU[:, 1:, 0] = (4 * k * R * F1)[:, None] * w
        dU[:, 1:, 1:] = (4 * k * F0)[:, None, None] * (2 * np.einsum("ma,mb->mab", w, w)
                                                       + R[:, None, None] * np.eye(2)[None])
        dV[:, 1:, 1:] = np.eye(2)[None]
        return np.concatenate([0.5 * (dU + dV), 0.5 * (dV - dU)], axis=1)

    return ImmersedSurface([np.zeros(1)] * 3, mapping, jac, name=f"pogorelov(k={k}, {profile})")


def sample_params(delta: float = 0.2, r_min: float = 0.5, r_max: float = 1.5, nodes: int = 40,
                  angle: float = np.pi / 5) -> np.ndarray:
    """nodes x nodes over (u1, |v|) at a fixed direction of v, away from the u1-axis."""
    u1 = np.linspace(-np.pi / 2 + delta, np.pi / 2 - delta, nodes)
    r = np.linspace(r_min, r_max, nodes)
    U, R = np.meshgrid(u1, r, indexing="ij")
    return np.column_stack([U.ravel(), (R * np.cos(angle)).ravel(), (R * np.sin(angle)).ravel()])


def phase_objective(k: float, profile: str, S: np.ndarray) -> float:
    """max |Im dz / Re dz| on unit frames: scale-free, so k -> 0 is not rewarded."""
    rep = eds_report(pogorelov_surface(k, profile), params=S)
    re = np.asarray(rep.series["re_dz_unit"])
    ok = np.isfinite(rep.values) & (np.abs(re) > 0)
    return float(np.max(np.abs(rep.values[ok] / re[ok])))


@dataclass
class PogorelovResult:
    k_found: float
    profile: str
    report: ResidualReport
    objective: float
    doubled_residual: float
    ratio: float
    lagrangian_residual: float
    k_curve: list = field(default_factory=list)
    axis_margins: list = field(default_factory=list)
    converged: bool = True

    def to_json(self) -> dict:
        return {"k_found": self.k_found, "profile": self.profile, "objective": self.objective,
                "max_im_dz": self.report.max, "doubled_k_max_im_dz": self.doubled_residual,
                "ratio": self.ratio, "lagrangian_residual": self.lagrangian_residual,
                "converged": self.converged, "k_curve": self.k_curve,
                "axis_margins": self.axis_margins, "report": self.report.summary()}


def pogorelov_fixture(k: Optional[float] = None, profile: str = "cos", nodes: int = 40,
                      delta: float = 0.2, k_range=(1e-4, 10.0)) -> PogorelovResult:
    """Build the family, choose k (scan plus bounded refinement of the phase
    objective when k is None) and report residuals off the u1-axis."""
    S = sample_params(delta, nodes=nodes)
    curve = []
    converged = True
    if k is None:
        ks = np.geomspace(k_range[0], k_range[1], 41)
        vals = [phase_objective(float(kk), profile, S) for kk in ks]
        curve = [[float(a), float(b)] for a, b in zip(ks, vals)]
        i = int(np.argmin(vals))
        lo = np.log(ks[max(i - 1, 0)])
        hi = np.log(ks[min(i + 1, len(ks) - 1)])
        res = minimize_scalar(lambda t: phase_objective(float(np.exp(t)), profile, S),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12, "maxiter": 200})
        converged = bool(res.success)
        k = float(np.exp(res.x))
    rep = eds_report(pogorelov_surface(k, profile), params=S)
    doubled = eds_report(pogorelov_surface(2 * k, profile), params=S).max
    ratio = doubled / rep.max if rep.max > 0 else float("inf")
    # margin along a ray approaching the u1-axis
    radii = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01]
    ray = np.array([[0.0, r * np.cos(np.pi / 5), r * np.sin(np.pi / 5)] for r in radii])
    F = pogorelov_surface(k, profile).frames(ray)
    margins = planes._batched(F, 1e-12)["margin"]
    return PogorelovResult(k, profile, rep, phase_objective(k, profile, S), doubled, ratio,
                           rep.series_max("omega"), curve,
                           [[r, float(mg)] for r, mg in zip(radii, margins)], converged)
