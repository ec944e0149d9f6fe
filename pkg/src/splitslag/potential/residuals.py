"""Pointwise residuals of the two potential equations and the x <-> null
potential transform."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from ..report import ResidualReport
from .fields import GridField, ScalarField, _as_points


def odd_sigma_sum(H: np.ndarray) -> float:
    """sigma_1 + sigma_3 + ... of the eigenvalues, from det(tI - H) coefficients."""
    c = np.poly(H)  # c[k] = (-1)^k sigma_k
    return float(sum((-1) ** k * c[k] for k in range(1, len(c), 2)))


def im_det_null(H: np.ndarray) -> float:
    """Im det_D(I + tau H) = (det(I + H) - det(I - H))/2."""
    I = np.eye(H.shape[-1])
    return 0.5 * float(np.linalg.det(I + H) - np.linalg.det(I - H))


def _im_det_batch(H: np.ndarray) -> tuple:
    I = np.eye(H.shape[-1])
    dp = np.linalg.det(I + H)
    dm = np.linalg.det(I - H)
    return 0.5 * (dp - dm), np.maximum(1.0, 0.5 * (np.abs(dp) + np.abs(dm)))


def _hessians(field: Union[ScalarField, GridField], pts) -> tuple:
    """(points, Hessians, gradients, mask of usable nodes)."""
    if isinstance(field, GridField):
        P = field.nodes()
        H = field.hess()
        G = field.grad()
        ok = np.isfinite(H).all(axis=(1, 2))
        return P, H, G, ok
    if pts is None:
        raise ValueError("points are required for an analytic field")
    P = _as_points(pts, field.dim)
    ok = field.inside(P, field.stencil_margin())
    H = np.full((P.shape[0], field.dim, field.dim), np.nan)
    G = np.full(P.shape, np.nan)
    if ok.any():
        H[ok] = field.hess(P[ok])
        G[ok] = field.grad(P[ok])
    return P, H, G, ok


def slag_residual_x(f: Union[ScalarField, GridField], pts=None,
                    tol: float = 1e-10) -> ResidualReport:
    """Im det_D(I + tau Hess f) at each node, by the null-determinant formula
    and by the odd elementary symmetric sums; space-like margin
    1 - max |eig Hess f|."""
    P, H, _, ok = _hessians(f, pts)
    m = P.shape[0]
    res = np.full(m, np.nan)
    sig = np.full(m, np.nan)
    margin = np.full(m, np.nan)
    scale = np.full(m, np.nan)
    if ok.any():
        r, s = _im_det_batch(H[ok])
        res[ok] = r
        scale[ok] = s
        sig[ok] = [odd_sigma_sum(h) for h in H[ok]]
        ev = np.linalg.eigvalsh(H[ok])
        margin[ok] = 1.0 - np.abs(ev).max(axis=1)
    agree = np.abs(res - sig) / scale
    valid = np.isfinite(res)
    flags = {
        "routes_agree": bool(np.all(agree[valid] <= 1e-10)) if valid.any() else True,
        "spacelike": bool(np.all(margin[valid] > 0)) if valid.any() else False,
        "slag": bool(np.all(np.abs(res[valid]) <= tol) and np.all(margin[valid] > 0)) if valid.any() else False,
    }
    return ResidualReport(res, P, flags, {"sigma_odd": sig, "route_gap": agree, "margin": margin},
                          int((~ok).sum()))


def ma_residual_null(g: Union[ScalarField, GridField], rhs: Optional[Callable] = None, pts=None,
                     tol: float = 1e-10) -> ResidualReport:
    """det Hess g - rhs(grad g, u) at each node, with a convexity flag.

    rhs is called as rhs(grad, points) and defaults to 1."""
    P, H, G, ok = _hessians(g, pts)
    m = P.shape[0]
    res = np.full(m, np.nan)
    lam = np.full(m, np.nan)
    if ok.any():
        target = np.ones(int(ok.sum())) if rhs is None else np.asarray(rhs(G[ok], P[ok]), dtype=float)
        res[ok] = np.linalg.det(H[ok]) - target
        lam[ok] = np.linalg.eigvalsh(H[ok])[:, 0]
    valid = np.isfinite(res)
    flags = {
        "convex": bool(np.all(lam[valid] > 0)) if valid.any() else False,
        "solves": bool(np.all(np.abs(res[valid]) <= tol)) if valid.any() else False,
    }
    return ResidualReport(res, P, flags, {"min_eig_hess": lam}, int((~ok).sum()))


def radial_solution(c: float = 1.0, r_min: float = 0.5, r_max: float = 1.5) -> ScalarField:
    """Radial convex solution of det Hess g = 1 in the plane, on an annulus.

    g'(r) = sqrt(r^2 + c), g = (r sqrt(r^2 + c) + c asinh(r / sqrt c))/2,
    g'' = r / sqrt(r^2 + c), so det Hess g = g'' g'/r = 1.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    if r_min <= 0 or r_max <= r_min:
        raise ValueError("annulus must satisfy 0 < r_min < r_max (the origin is excluded)")
    sc = np.sqrt(c)

    def radius(P):
        r = np.hypot(P[:, 0], P[:, 1])
        return np.where(r > 0, r, np.nan)

    def value(P):
        r = np.hypot(P[:, 0], P[:, 1])
        s = np.sqrt(r * r + c)
        return 0.5 * (r * s + c * np.arcsinh(r / sc))

    def gradient(P):
        r = radius(P)
        return (np.sqrt(r * r + c) / r)[:, None] * P

    def hessian(P):
        r = radius(P)
        s = np.sqrt(r * r + c)
        n = P / r[:, None]
        g2 = r / s
        g1r = s / r
        nn = np.einsum("mi,mj->mij", n, n)
        return g2[:, None, None] * nn + g1r[:, None, None] * (np.eye(2)[None] - nn)

    def annulus(P):
        r = np.hypot(P[:, 0], P[:, 1])
        return (r >= r_min - 1e-12) & (r <= r_max + 1e-12)

    return ScalarField(2, value, gradient, hessian, [(-r_max, r_max)] * 2, annulus,
                       name=f"radial(c={c})", meta={"c": c, "r_min": r_min, "r_max": r_max})


def annulus_points(r_min: float, r_max: float, nr: int, nphi: int) -> np.ndarray:
    r = np.linspace(r_min, r_max, nr)
    phi = np.linspace(0.0, 2 * np.pi, nphi, endpoint=False)
    R, F = np.meshgrid(r, phi, indexing="ij")
    return np.stack([(R * np.cos(F)).ravel(), (R * np.sin(F)).ravel()], axis=1)


@dataclass
class NullPotential:
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    g_value: np.ndarray
    g_gradient_check: float        # max |grad_u g - v| by finite differences
    v_projection_potential: np.ndarray   # f + |x|^2/2, gradient x + grad f = v
    u_projection_potential: np.ndarray   # |x|^2/2 - f, gradient x - grad f = u

    def to_json(self) -> dict:
        return {"x": self.x.tolist(), "u": self.u.tolist(), "v": self.v.tolist(),
                "g_value": self.g_value.tolist(), "g_gradient_check": self.g_gradient_check,
                "v_projection_potential": self.v_projection_potential.tolist(),
                "u_projection_potential": self.u_projection_potential.tolist()}


def _null_g(f: ScalarField, X: np.ndarray) -> np.ndarray:
    gf = f.grad(X)
    return (0.5 * np.sum(X * X, axis=1) + 2 * f(X) - np.sum(X * gf, axis=1)
            - 0.5 * np.sum(gf * gf, axis=1))


def x_from_u(f: ScalarField, U: np.ndarray, x0: Optional[np.ndarray] = None,
             iters: int = 50) -> np.ndarray:
    """Invert u = x - grad f(x) by Newton's method."""
    X = U.copy() if x0 is None else x0.copy()
    n = f.dim
    for _ in range(iters):
        F = X - f.grad(X) - U
        if np.abs(F).max() < 1e-14:
            break
        Jm = np.eye(n)[None] - f.hess(X)
        X = X - np.linalg.solve(Jm, F[..., None])[..., 0]
    return X


def null_potential_from_x(f: ScalarField, x, h: float = 1e-5) -> NullPotential:
    """The null-picture potential g of the x-picture graph of grad f.

    u = x - grad f, v = x + grad f and g(u) = |x|^2/2 + 2f - x.grad f - |grad f|^2/2,
    so that dg = v.du.  The gradient identity is checked by central
    differences in u (through a Newton inversion of u(x)).
    """
    X = _as_points(x, f.dim)
    H = f.hess(X)
    ev = np.linalg.eigvalsh(H)
    margin = 1.0 - np.abs(ev).max(axis=1)
    if np.any(margin <= 0):
        i = int(np.argmin(margin))
        raise ValueError(f"space-like condition fails at {X[i].tolist()}: margin {margin[i]:.3g}")
    gf = f.grad(X)
    U, V = X - gf, X + gf
    gval = _null_g(f, X)
    worst = 0.0
    for i in range(f.dim):
        e = np.zeros(f.dim)
        e[i] = h
        Xp = x_from_u(f, U + e, X)
        Xm = x_from_u(f, U - e, X)
        d = (_null_g(f, Xp) - _null_g(f, Xm)) / (2 * h)
        worst = max(worst, float(np.abs(d - V[:, i]).max()))
    half = 0.5 * np.sum(X * X, axis=1)
    fx = f(X)
    return NullPotential(X, U, V, gval, worst, fx + half, half - fx)


def null_field_from_x(f: ScalarField) -> ScalarField:
    """g as a field of u (values via Newton inversion, gradient v(x(u)))."""
    def value(U):
        return _null_g(f, x_from_u(f, U))

    def gradient(U):
        X = x_from_u(f, U)
        return X + f.grad(X)

    def hessian(U):
        # dv/du = (I + H)(I - H)^-1, the Cayley image of Hess f
        X = x_from_u(f, U)
        H = f.hess(X)
        I = np.eye(f.dim)[None]
        return np.linalg.solve(np.transpose(I - H, (0, 2, 1)), np.transpose(I + H, (0, 2, 1))).transpose(0, 2, 1)

    return ScalarField(f.dim, value, gradient, hessian, None, name=f"null({f.name})")
