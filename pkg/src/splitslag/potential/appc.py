"""Degenerate-projection constructions: phi = x3 u(x1, x2) + h(x1, x2) and
the twisted normal immersion (x', x'', x''.du/dx' + dh/dx', u(x'))."""
from __future__ import annotations

from typing import Optional, Sequence, Union

import numpy as np

from ..report import ResidualReport
from .fields import ScalarField, _as_points
from .surfaces import ImmersedSurface


def phi_hessian(u_fn: ScalarField, h_fn: ScalarField, P: np.ndarray) -> np.ndarray:
    """Hess of x3 u(x1, x2) + h(x1, x2) at points (m, 3)."""
    X2 = P[:, :2]
    x3 = P[:, 2]
    Hu = u_fn.hess(X2)
    Hh = h_fn.hess(X2)
    gu = u_fn.grad(X2)
    H = np.zeros((P.shape[0], 3, 3))
    H[:, :2, :2] = x3[:, None, None] * Hu + Hh
    H[:, :2, 2] = gu
    H[:, 2, :2] = gu
    return H


def bracket_terms(u_fn: ScalarField, h_fn: ScalarField, P: np.ndarray) -> tuple:
    """The two brackets of the x3-linear decomposition of Lap phi + det Hess phi."""
    X2 = P[:, :2]
    gu = u_fn.grad(X2)
    Hu = u_fn.hess(X2)
    Hh = h_fn.hess(X2)
    u1, u2 = gu[:, 0], gu[:, 1]

    def L(M):
        return (1 - u2 ** 2) * M[:, 0, 0] + 2 * u1 * u2 * M[:, 0, 1] + (1 - u1 ** 2) * M[:, 1, 1]

    return L(Hu), L(Hh)


def appc_residual(u_fn: ScalarField, h_fn: ScalarField, pts) -> ResidualReport:
    """Lap phi + det Hess phi computed from the assembled Hessian, against
    x3 [L u] + [L h] with L = (1 - u2^2) d11 + 2 u1 u2 d12 + (1 - u1^2) d22."""
    P = _as_points(pts, 3)
    H = phi_hessian(u_fn, h_fn, P)
    direct = np.trace(H, axis1=1, axis2=2) + np.linalg.det(H)
    bu, bh = bracket_terms(u_fn, h_fn, P)
    split = P[:, 2] * bu + bh
    gap = np.abs(direct - split)
    flags = {"decomposition_ok": bool(gap.max() <= 1e-9 * max(1.0, float(np.abs(direct).max())))}
    return ResidualReport(direct, P, flags, {"decomposition": split, "gap": gap,
                                             "bracket_u": bu, "bracket_h": bh})


def twisted_normal_param(u_fns: Union[ScalarField, Sequence[ScalarField]], h_fn: ScalarField,
                         p: int, n: int, axes: Sequence[np.ndarray]) -> ImmersedSurface:
    """x = (x', x'') in R^p x R^(n-p)  ->  (x', x'', sum_k x''_k grad u_k(x') + grad h(x'), u(x')).

    This is the x-picture graph of grad phi with phi = x''.u(x') + h(x')."""
    if isinstance(u_fns, ScalarField):
        u_fns = [u_fns]
    u_fns = list(u_fns)
    if len(u_fns) != n - p or not 0 < p < n:
        raise ValueError(f"need n - p = {n - p} component functions for u, got {len(u_fns)}")
    if h_fn.dim != p or any(f.dim != p for f in u_fns):
        raise ValueError(f"u and h must be functions of the first {p} coordinates")
    if len(axes) != n:
        raise ValueError(f"need {n} parameter axes")

    def mapping(X):
        xp, xpp = X[:, :p], X[:, p:]
        yp = h_fn.grad(xp)
        for k, f in enumerate(u_fns):
            yp = yp + xpp[:, k:k + 1] * f.grad(xp)
        ypp = np.stack([f(xp) for f in u_fns], axis=1)
        return np.concatenate([X, yp, ypp], axis=1)

    def jac(X):
        m = X.shape[0]
        xp, xpp = X[:, :p], X[:, p:]
        H = np.zeros((m, n, n))
        H[:, :p, :p] = h_fn.hess(xp)
        for k, f in enumerate(u_fns):
            H[:, :p, :p] += xpp[:, k, None, None] * f.hess(xp)
            g = f.grad(xp)
            H[:, :p, p + k] = g
            H[:, p + k, :p] = g
        top = np.broadcast_to(np.eye(n), (m, n, n))
        return np.concatenate([top, H], axis=1)

    return ImmersedSurface(list(axes), mapping, jac, name="twisted-normal")


def twisted_phi(u_fns, h_fn: ScalarField, p: int, n: int) -> ScalarField:
    """phi = x''.u(x') + h(x') as a field on R^n (for the x-picture residual)."""
    if isinstance(u_fns, ScalarField):
        u_fns = [u_fns]

    def value(X):
        out = h_fn(X[:, :p])
        for k, f in enumerate(u_fns):
            out = out + X[:, p + k] * f(X[:, :p])
        return out

    def hessian(X):
        return twisted_normal_param(u_fns, h_fn, p, n, [np.zeros(1)] * n).jacobian(X)[:, n:, :]

    def gradient(X):
        return twisted_normal_param(u_fns, h_fn, p, n, [np.zeros(1)] * n).mapping(X)[:, n:]

    return ScalarField(n, value, gradient, hessian, name="twisted-phi")
