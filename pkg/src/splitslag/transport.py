"""Optimal transport checks: 1-D monotone rearrangement, exact discrete
assignment, cost cross-Hessians and the split SLAG test for gradient graphs
of transport potentials."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, simpson
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, linear_sum_assignment

from . import forms, planes
from .potential.fields import ScalarField, _as_points
from .report import ResidualReport


@dataclass
class Density1D:
    grid: np.ndarray
    pdf: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        pdf = np.asarray(self.pdf, dtype=float)
        if self.grid.ndim != 1 or pdf.shape != self.grid.shape or self.grid.size < 3:
            raise ValueError("density needs matching 1-D grid and pdf arrays (>= 3 nodes)")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(pdf <= 0) or not np.all(np.isfinite(pdf)):
            raise ValueError("density must be strictly positive on its grid")
        self.pdf = pdf / simpson(pdf, x=self.grid)

    @classmethod
    def from_callable(cls, fn: Callable, lo: float, hi: float, k: int = 12) -> "Density1D":
        x = np.linspace(lo, hi, 2 ** k + 1)
        return cls(x, fn(x))

    @classmethod
    def uniform(cls, lo: float, hi: float, k: int = 10) -> "Density1D":
        return cls.from_callable(lambda x: np.ones_like(x), lo, hi, k)

    def cdf(self) -> np.ndarray:
        c = cumulative_simpson(self.pdf, x=self.grid, initial=0.0)
        c = np.maximum.accumulate(c)
        return c / c[-1]

    def density_at(self, x) -> np.ndarray:
        return PchipInterpolator(self.grid, self.pdf, extrapolate=False)(x)


def _inverse_cdf(d: Density1D, q: np.ndarray) -> np.ndarray:
    """Monotone cubic inversion of the CDF, with bisection where it misbehaves."""
    C = d.cdf()
    keep = np.r_[True, np.diff(C) > 0]
    inv = PchipInterpolator(C[keep], d.grid[keep])
    x = inv(np.clip(q, 0.0, 1.0))
    fwd = PchipInterpolator(d.grid, C)
    bad = np.abs(fwd(x) - q) > 1e-10
    for i in np.nonzero(bad)[0]:
        qi = float(np.clip(q[i], 0.0, 1.0))
        if qi <= 0.0:
            x[i] = d.grid[0]
        elif qi >= 1.0:
            x[i] = d.grid[-1]
        else:
            x[i] = brentq(lambda t: float(fwd(t)) - qi, d.grid[0], d.grid[-1], xtol=1e-14)
    return x


@dataclass
class TransportPlan:
    kind: str
    u: Optional[np.ndarray] = None
    T: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None
    residual: Optional[np.ndarray] = None
    pushforward_residual: Optional[np.ndarray] = None
    perm: Optional[np.ndarray] = None
    total_cost: Optional[float] = None
    checks: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "checks": self.checks}
        if self.kind == "1d":
            out["max_residual"] = float(np.nanmax(np.abs(self.residual)))
            out["max_pushforward_residual"] = float(np.nanmax(np.abs(self.pushforward_residual)))
        else:
            out["perm"] = self.perm.tolist()
            out["total_cost"] = self.total_cost
        return out


def ot_1d(rho: Density1D, rho_tilde: Density1D) -> TransportPlan:
    """T = F~^-1(F(u)), g = int T, residual g'' - rho/rho~(T) with g'' = T'."""
    u = rho.grid
    T = _inverse_cdf(rho_tilde, rho.cdf())
    g = cumulative_trapezoid(T, u, initial=0.0) if u.size % 2 == 0 else cumulative_simpson(T, x=u, initial=0.0)
    dT = np.gradient(T, u, edge_order=2)
    target = rho.pdf / rho_tilde.density_at(T)
    residual = dT - target
    push = rho.pdf - rho_tilde.density_at(T) * dT
    # consistency of the potential: g' = T to O(h^2) away from the ends
    dg = np.gradient(g, u, edge_order=2)
    checks = {
        "monotone": bool(np.all(np.diff(T) >= -1e-12)),
        "convex": bool(np.all(dT > 0)),
        "potential_gap": float(np.max(np.abs(dg[1:-1] - T[1:-1]))),
    }
    return TransportPlan("1d", u=u, T=T, g=g, residual=residual, pushforward_residual=push,
                         checks=checks)


def _cost_matrix(mu: np.ndarray, nu: np.ndarray, cost) -> np.ndarray:
    if cost in (None, "sqeuclidean"):
        diff = mu[:, None, :] - nu[None, :, :]
        return np.sum(diff * diff, axis=2)
    if callable(cost):
        n, m = mu.shape[0], nu.shape[0]
        U = np.repeat(mu, m, axis=0)
        V = np.tile(nu, (n, 1))
        return np.asarray(cost(U, V), dtype=float).reshape(n, m)
    raise ValueError(f"unknown cost {cost!r}")


def cyclic_monotonicity_gap(mu: np.ndarray, nu: np.ndarray, perm: np.ndarray, cost=None) -> float:
    """Largest violation over cycles of length 2 and 3 of
    sum c(x_i, y_s(i)) <= sum c(x_i, y_s(i+1)) (positive = violated)."""
    C = _cost_matrix(mu, nu[perm], cost)
    d = np.diag(C)
    n = C.shape[0]
    worst = -np.inf
    two = d[:, None] + d[None, :] - C - C.T
    np.fill_diagonal(two, -np.inf)
    worst = max(worst, float(two.max())) if n > 1 else worst
    for i in range(n):
        # cycles i -> j -> k -> i
        lhs = d[i] + d[:, None] + d[None, :]
        rhs = C[i, :][:, None] + C + C[:, i][None, :]
        gap = lhs - rhs
        gap[i, :] = -np.inf
        gap[:, i] = -np.inf
        np.fill_diagonal(gap, -np.inf)
        worst = max(worst, float(gap.max())) if n > 2 else worst
    return worst if np.isfinite(worst) else 0.0


def ot_discrete(mu_points, nu_points, cost=None) -> TransportPlan:
    """Exact equal-weight matching by the assignment solver."""
    mu = np.asarray(mu_points, dtype=float)
    nu = np.asarray(nu_points, dtype=float)
    if mu.ndim == 1:
        mu = mu[:, None]
    if nu.ndim == 1:
        nu = nu[:, None]
    if mu.shape != nu.shape:
        raise ValueError(f"point clouds differ in size or dimension: {mu.shape} vs {nu.shape}")
    if mu.shape[0] > 256:
        raise ValueError("at most 256 points per cloud")
    C = _cost_matrix(mu, nu, cost)
    rows, cols = linear_sum_assignment(C)
    perm = cols[np.argsort(rows)]
    total = float(C[np.arange(len(perm)), perm].sum())
    checks = {}
    if cost in (None, "sqeuclidean"):
        checks["cyclic_monotonicity_gap"] = cyclic_monotonicity_gap(mu, nu, perm)
        checks["cyclically_monotone"] = bool(checks["cyclic_monotonicity_gap"] <= 1e-9)
    if mu.shape[1] == 1:
        sorted_perm = np.empty(len(perm), dtype=int)
        sorted_perm[np.argsort(mu[:, 0], kind="stable")] = np.argsort(nu[:, 0], kind="stable")
        checks["sorted_cost"] = float(C[np.arange(len(perm)), sorted_perm].sum())
        checks["matches_sorted"] = bool(abs(checks["sorted_cost"] - total) <= 1e-9 * max(1.0, abs(total)))
    return TransportPlan("discrete", perm=perm, total_cost=total, checks=checks)


def brute_force_assignment(mu_points, nu_points, cost=None) -> tuple:
    """Minimum over all permutations (oracle for n <= 8)."""
    mu = np.atleast_2d(np.asarray(mu_points, dtype=float))
    nu = np.atleast_2d(np.asarray(nu_points, dtype=float))
    if mu.shape[0] == 1 and mu.shape[1] > 1 and np.ndim(mu_points) == 1:
        mu, nu = mu.T, nu.T
    C = _cost_matrix(mu, nu, cost)
    n = C.shape[0]
    if n > 8:
        raise ValueError("brute force limited to n <= 8")
    best, arg = np.inf, None
    idx = np.arange(n)
    for p in permutations(range(n)):
        c = C[idx, list(p)].sum()
        if c < best - 1e-12:
            best, arg = c, p
    return np.array(arg), float(best)


# ---------------------------------------------------------------------------

@dataclass
class CostFunction:
    dim: int
    c: Callable[[np.ndarray, np.ndarray], np.ndarray]
    cross: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None   # (m, d, d), [i, j] = d2c/du_i dv_j
    du: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None      # (m, d)
    name: str = ""
    fd_step: float = 1e-4

    def cross_hessian(self, U, V) -> np.ndarray:
        if self.cross is not None:
            return np.asarray(self.cross(U, V), dtype=float)
        h = self.fd_step
        d = self.dim
        out = np.empty((U.shape[0], d, d))
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = h
            for j in range(d):
                ej = np.zeros(d)
                ej[j] = h
                out[:, i, j] = (self.c(U + ei, V + ej) - self.c(U + ei, V - ej)
                                - self.c(U - ei, V + ej) + self.c(U - ei, V - ej)) / (4 * h * h)
        return out

    def grad_u(self, U, V) -> np.ndarray:
        if self.du is not None:
            return np.asarray(self.du(U, V), dtype=float)
        h = self.fd_step
        out = np.empty(U.shape)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            out[:, i] = (self.c(U + e, V) - self.c(U - e, V)) / (2 * h)
        return out


def quadratic_cost(d: int) -> CostFunction:
    return CostFunction(d, lambda U, V: 0.5 * np.sum((U - V) ** 2, axis=1),
                        lambda U, V: np.broadcast_to(-np.eye(d), (U.shape[0], d, d)).copy(),
                        lambda U, V: U - V, "quadratic")


def bilinear_cost(d: int) -> CostFunction:
    return CostFunction(d, lambda U, V: np.sum(U * V, axis=1),
                        lambda U, V: np.broadcast_to(np.eye(d), (U.shape[0], d, d)).copy(),
                        lambda U, V: V.copy(), "bilinear")


def kahler_cost_check(cost: CostFunction, u_samples, v_samples, tol: float = 1e-8) -> dict:
    """Cross-Hessian non-singularity at all sample pairs, and injectivity of
    v -> d_u c(u, v) over the samples for each u."""
    U = _as_points(u_samples, cost.dim)
    V = _as_points(v_samples, cost.dim)
    nu, nv = U.shape[0], V.shape[0]
    UU = np.repeat(U, nv, axis=0)
    VV = np.tile(V, (nu, 1))
    X = cost.cross_hessian(UU, VV)
    dets = np.abs(np.linalg.det(X))
    min_det = float(dets.min())
    G = cost.grad_u(UU, VV).reshape(nu, nv, cost.dim)
    min_sep = np.inf
    for i in range(nu):
        D = np.linalg.norm(G[i][:, None, :] - G[i][None, :, :], axis=2)
        np.fill_diagonal(D, np.inf)
        min_sep = min(min_sep, float(D.min()) if nv > 1 else np.inf)
    return {"cross_hessian_ok": bool(min_det > tol), "min_abs_det": min_det,
            "twist_ok": bool(min_sep > tol), "min_image_separation": float(min_sep)}


def kmw_check(g: ScalarField, rho: Callable, rho_tilde: Callable, pts,
              tol: float = 1e-9, oracle: bool = True) -> ResidualReport:
    """Graph of grad g in (u, v): omega pullback, Im Phi pullback
    (rho~(grad g) det Hess g - rho)/2 and convexity.  For n <= 2 the Im Phi
    pullback is also computed from the constant-coefficient form at each node."""
    P = _as_points(pts, g.dim)
    n = g.dim
    ok = g.inside(P, g.stencil_margin())
    m = P.shape[0]
    res = np.full(m, np.nan)
    om = np.full(m, np.nan)
    lam = np.full(m, np.nan)
    orc = np.full(m, np.nan)
    if ok.any():
        Pk = P[ok]
        H = g.hess(Pk)
        G = g.grad(Pk)
        r0 = np.asarray(rho(Pk), dtype=float)
        r1 = np.asarray(rho_tilde(G), dtype=float)
        res[ok] = 0.5 * (r1 * np.linalg.det(H) - r0)
        lam[ok] = np.linalg.eigvalsh(H)[:, 0]
        I = np.eye(n)
        F = np.concatenate([0.5 * (I + H), 0.5 * (H - I)], axis=1)
        S = np.einsum("mik,ij,mjl->mkl", F, planes.omega_matrix(n), F)
        om[ok] = np.abs(S).max(axis=(1, 2))
        if oracle and n <= 2:
            vals = []
            for F_i, a, b in zip(F, r0, r1):
                _, im = forms.phi_form(n, a, b)
                vals.append(im.pullback(F_i).coeffs[0])
            orc[ok] = vals
    gap = np.abs(res - orc)
    valid = np.isfinite(res)
    flags = {
        "lagrangian": bool(np.all(om[valid] <= tol)) if valid.any() else False,
        "im_phi_zero": bool(np.all(np.abs(res[valid]) <= tol)) if valid.any() else False,
        "convex": bool(np.all(lam[valid] > 0)) if valid.any() else False,
    }
    if np.isfinite(orc).any():
        flags["oracle_agrees"] = bool(np.nanmax(gap) <= 1e-12 * max(1.0, np.nanmax(np.abs(res))))
    return ResidualReport(res, P, flags, {"omega": om, "min_eig_hess": lam, "oracle": orc},
                          int((~ok).sum()), {"convexity_failures": int(np.sum(lam[valid] <= 0))})
