"""Parameterized surfaces in R^{2n}, pointwise EDS reports and quadrature
volumes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .. import planes
from ..report import ResidualReport
from .fields import ScalarField


@dataclass
class ImmersedSurface:
    """Tensor parameter grid -> R^{2n}.

    mapping takes (m, k) parameters to (m, 2n) points; jacobian (optional)
    returns (m, 2n, k).  mask (optional) marks parameters that belong to the
    domain, e.g. an annulus cut out of a box.
    """
    axes: Sequence[np.ndarray]
    mapping: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fd_step: float = 1e-5
    mask: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    @property
    def k(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    def params(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def points(self) -> np.ndarray:
        return self.mapping(self.params())

    def frames(self, params: Optional[np.ndarray] = None) -> np.ndarray:
        S = self.params() if params is None else params
        if self.jacobian is not None:
            return np.asarray(self.jacobian(S), dtype=float)
        cols = []
        for i in range(self.k):
            e = np.zeros(self.k)
            e[i] = self.fd_step
            cols.append((self.mapping(S + e) - self.mapping(S - e)) / (2 * self.fd_step))
        return np.stack(cols, axis=2)

    def in_domain(self) -> np.ndarray:
        S = self.params()
        if self.mask is None:
            return np.ones(S.shape[0], dtype=bool)
        return np.asarray(self.mask(S), dtype=bool)


def _default_axes(field: ScalarField, nodes) -> list:
    if field.box is None:
        raise ValueError("field has no box; pass explicit axes")
    if np.isscalar(nodes):
        nodes = [int(nodes)] * field.dim
    return [np.linspace(lo, hi, k) for (lo, hi), k in zip(field.box, nodes)]


def surface_from_potential(field: ScalarField, picture: str = "null", nodes=41,
                           axes: Optional[Sequence[np.ndarray]] = None) -> ImmersedSurface:
    """Graph of the gradient: x-picture (x, grad f(x)), or null picture
    u -> v = grad g(u), written in (x, y) with x = (u + v)/2, y = (v - u)/2."""
    n = field.dim
    ax = list(axes) if axes is not None else _default_axes(field, nodes)
    I = np.eye(n)

    if picture == "x":
        def mapping(X):
            return np.concatenate([X, field.grad(X)], axis=1)

        def jac(X):
            H = field.hess(X)
            top = np.broadcast_to(I, H.shape)
            return np.concatenate([top, H], axis=1)
    elif picture == "null":
        def mapping(U):
            V = field.grad(U)
            return np.concatenate([0.5 * (U + V), 0.5 * (V - U)], axis=1)

        def jac(U):
            H = field.hess(U)
            return np.concatenate([0.5 * (I + H), 0.5 * (H - I)], axis=1)
    else:
        raise ValueError("picture must be 'x' or 'null'")
    mask = None
    if field.domain is not None:
        mask = field.domain
    return ImmersedSurface(ax, mapping, jac, mask=mask, name=f"{picture}:{field.name}")


def eds_report(surface: ImmersedSurface, tol: float = 1e-9,
               params: Optional[np.ndarray] = None) -> ResidualReport:
    """Pointwise omega, Im dz and space-like margin on unit tangent frames.

    Residuals are measured on Euclidean-orthonormal frames so they are
    comparable across nodes and defined at time-like nodes too.  Main value:
    |Im dz|.  Rank-deficient nodes and nodes outside the domain are excluded.
    """
    S = surface.params() if params is None else params
    F = surface.frames(S)
    keep = surface.in_domain() if params is None else np.ones(S.shape[0], dtype=bool)
    keep &= np.isfinite(F).all(axis=(1, 2))
    m = S.shape[0]
    im = np.full(m, np.nan)
    om = np.full(m, np.nan)
    margin = np.full(m, np.nan)
    re = np.full(m, np.nan)
    positive = np.zeros(m, dtype=bool)
    rank_bad = 0
    if keep.any():
        b = planes._batched(F[keep], tol)
        idx = np.nonzero(keep)[0]
        good = b["rank_ok"]
        rank_bad = int((~good).sum())
        idx_g = idx[good]
        im[idx_g] = b["im_dz_unit"][good]
        re[idx_g] = b["re_dz_unit"][good]
        om[idx_g] = b["omega_residual"][good]
        margin[idx_g] = b["margin"][good]
        positive[idx_g] = b["x_det"][good] > 0
    valid = np.isfinite(im)
    spacelike = margin > tol
    flags = {
        "lagrangian": bool(np.all(om[valid] <= tol)) if valid.any() else False,
        "spacelike": bool(np.all(spacelike[valid])) if valid.any() else False,
        "im_dz_zero": bool(np.all(np.abs(im[valid]) <= tol)) if valid.any() else False,
    }
    flags["slag"] = bool(flags["lagrangian"] and flags["spacelike"] and flags["im_dz_zero"]
                         and np.all(positive[valid]))
    slag_node = valid & (om <= tol) & spacelike & (np.abs(im) <= tol) & positive
    return ResidualReport(im, S, flags,
                          {"omega": om, "margin": margin, "re_dz_unit": re,
                           "slag_node": slag_node.astype(float)},
                          int((~keep).sum()) + rank_bad,
                          {"rank_deficient": rank_bad})


def _simpson_nd(values: np.ndarray, axes: Sequence[np.ndarray]) -> float:
    out = values
    for ax in reversed(axes):
        out = simpson(out, x=ax, axis=-1)
    return float(out)


def volume_and_calibrated_integral(surface: ImmersedSurface, tol: float = 0.0,
                                   weight: Optional[Callable] = None) -> dict:
    """vol = int sqrt(det Gram(frame)), re_dz_integral = int Re dz(frame),
    composite Simpson over the parameter box.  weight(params) multiplies both
    integrands (e.g. the polar Jacobian r)."""
    S = surface.params()
    F = surface.frames(S)
    n = F.shape[2]
    Jm = planes.metric(n)
    G = np.einsum("mik,ij,mjl->mkl", F, Jm, F)
    ev = np.linalg.eigvalsh(G)[:, 0]
    if np.any(ev <= tol):
        i = int(np.argmin(ev))
        raise ValueError(f"non-space-like node at parameters {S[i].tolist()} (min Gram eigenvalue {ev[i]:.3g})")
    dens = np.sqrt(np.linalg.det(G))
    X, Y = F[:, :n, :], F[:, n:, :]
    redz = 0.5 * (np.linalg.det(X - Y) + np.linalg.det(X + Y))
    if weight is not None:
        w = np.asarray(weight(S), dtype=float)
        dens = dens * w
        redz = redz * w
    shape = surface.shape
    return {"vol": _simpson_nd(dens.reshape(shape), surface.axes),
            "re_dz_integral": _simpson_nd(redz.reshape(shape), surface.axes)}


def polar_graph_surface(g: ScalarField, r_min: float, r_max: float, nr: int,
                        nphi: int) -> ImmersedSurface:
    """Null-picture graph of grad g over an annulus in polar parameters
    (r, phi), phi on the closed grid [0, 2 pi] so Simpson applies."""
    r = np.linspace(r_min, r_max, nr)
    phi = np.linspace(0.0, 2 * np.pi, nphi)
    I = np.eye(2)

    def to_u(S):
        return np.stack([S[:, 0] * np.cos(S[:, 1]), S[:, 0] * np.sin(S[:, 1])], axis=1)

    def mapping(S):
        U = to_u(S)
        V = g.grad(U)
        return np.concatenate([0.5 * (U + V), 0.5 * (V - U)], axis=1)

    def jac(S):
        U = to_u(S)
        H = g.hess(U)
        c, s, rr = np.cos(S[:, 1]), np.sin(S[:, 1]), S[:, 0]
        # columns du/dr = (c, s) and du/dphi = r (-s, c)
        D = np.stack([np.stack([c, -rr * s], axis=1), np.stack([s, rr * c], axis=1)], axis=1)
        full = np.concatenate([0.5 * (I + H), 0.5 * (H - I)], axis=1)
        return full @ D

    return ImmersedSurface([r, phi], mapping, jac, name=f"polar:{g.name}")


def volume_experiment(g: ScalarField, eta: ScalarField, eps_list, nodes: int = 201,
                      tol: float = 1e-10, annulus: Optional[tuple] = None) -> list:
    """Volume of M (graph of grad g) against competitors N_eps (graph of
    grad(g + eps eta)), with the pointwise AM-GM oracle for the deficit.

    annulus=(r_min, r_max) integrates in polar parameters over that annulus
    (nodes per axis, so nodes - 1 Simpson intervals); otherwise over g's box.
    eta should vanish to first order on the boundary so both surfaces carry
    the same calibrated integral."""
    if annulus is not None:
        r_min, r_max = annulus

        def build(f):
            return polar_graph_surface(f, r_min, r_max, nodes, nodes)

        def u_points(surf):
            S = surf.params()
            return np.stack([S[:, 0] * np.cos(S[:, 1]), S[:, 0] * np.sin(S[:, 1])], axis=1), S[:, 0]
    else:
        axes = _default_axes(g, nodes)

        def build(f):
            return surface_from_potential(f, "null", axes=axes)

        def u_points(surf):
            U = surf.params()
            return U, np.ones(U.shape[0])

    base = build(g)
    vol_m = volume_and_calibrated_integral(base)["vol"]
    rows = []
    for eps in eps_list:
        h = g + eta.scaled(eps)
        surf = build(h)
        U, jac = u_points(surf)
        H = h.hess(U)
        lam = np.linalg.eigvalsh(H)[:, 0]
        if np.any(lam <= 0):
            rows.append({"eps": float(eps), "flagged": True, "reason": "convexity lost",
                         "min_eig": float(lam.min())})
            continue
        vi = volume_and_calibrated_integral(surf)
        d = np.linalg.det(H)
        oracle = _simpson_nd(((0.5 * (1 + d) - np.sqrt(d)) * jac).reshape(surf.shape), surf.axes)
        deficit = vol_m - vi["vol"]
        rows.append({
            "eps": float(eps),
            "flagged": False,
            "vol_N": vi["vol"],
            "re_dz_integral_N": vi["re_dz_integral"],
            "vol_M": vol_m,
            "deficit": deficit,
            "amgm_oracle": oracle,
            "oracle_gap": deficit - oracle,
            "stokes_gap": vi["re_dz_integral"] - vol_m,
            "deficit_over_eps2": deficit / eps ** 2 if eps else None,
            "nonnegative": bool(deficit >= -tol),
        })
    return rows


ANNULUS_BUMP = "((sqrt(x1^2 + x2^2) - 0.5)*(1.5 - sqrt(x1^2 + x2^2)))^3*(1 + x1/3)"
