"""Deformations of graph-type split SLAG surfaces and the phase gradient.

Variations.  Base M = graph of grad g in the null picture (det Hess g = 1),
variation g + t gdot, so the variation field is nu = (0, grad gdot) in null
coordinates.  With omega = (1/2) sum du_i ^ dv_i and Im Phi = (dv - du)/2,

    theta = nu -| omega   pulls back to  -(1/2) d gdot,
    phi   = nu -| Im Phi  pulls back to  (1/2) i_W du,   W = h^{-1} grad gdot,

with h = Hess g the induced metric.  Since *theta = -(1/2) i_W du for the
usual star (vol_h = du when det h = 1), phi = STAR_SIGN * theta with
STAR_SIGN = -1.  The sign is recomputed from the flat fixture by
``calibrate_star_sign``.

Phase gradient.  For a Lagrangian surface of signature (p, q) with phase
theta (sign * tau^q dz = e^{tau theta} dvol) and mean curvature H, the
convention used here gives  V(theta) = -<T V, H>  for tangent V.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import forms, planes
from .potential.fields import GridField, ScalarField
from .report import ResidualReport

STAR_SIGN = -1.0

DEFAULT_BOX = ((0.5, 1.5), (0.5, 1.5))


# ---------------------------------------------------------------------------
# variations

@dataclass
class VariationData:
    """Base potential g, variation gdot, and the tensor grid they live on."""
    g: ScalarField
    gdot: ScalarField
    box: Sequence = DEFAULT_BOX
    nodes: int = 51
    det_tol: float = 1e-8
    margin: float = 0.1  # residuals are compared on a fixed sub-box, independent of h

    def __post_init__(self):
        if self.g.dim != self.gdot.dim:
            raise ValueError("g and gdot must have the same dimension")
        if len(self.box) != self.g.dim:
            raise ValueError(f"box must have {self.g.dim} intervals")

    @property
    def n(self) -> int:
        return self.g.dim

    @property
    def h(self) -> float:
        lo, hi = self.box[0]
        return (hi - lo) / (self.nodes - 1)

    def grids(self) -> tuple:
        shape = [self.nodes] * self.n
        return GridField.sample(self.g, self.box, shape), GridField.sample(self.gdot, self.box, shape)


def _star_components(W: np.ndarray) -> np.ndarray:
    """Components of i_W (du_1 ^ ... ^ du_n) on the (n-1)-subsets omitting k."""
    n = W.shape[1]
    sgn = np.array([(-1.0) ** k for k in range(n)])
    return W * sgn[None, :]


def _direct_phi(grad_g: np.ndarray, grad_gdot: np.ndarray, shape: tuple, h: float) -> np.ndarray:
    """phi = nu -| Im Phi on wide-stencil frames of u -> (u, grad g).

    Returns (N, n) components indexed by the omitted parameter direction."""
    n = grad_g.shape[1]
    N = grad_g.shape[0]
    # surface points in (x, y): x = (u + v)/2, y = (v - u)/2, with u the grid node
    # and v = grad g.  The u-part of a frame is exact: d u / d u_k = e_k.
    G = grad_g.reshape(shape + (n,))
    frames = np.full((N, 2 * n, n), np.nan)
    for k in range(n):
        dv = np.full(shape + (n,), np.nan)
        for c in range(n):
            fwd = [slice(None)] * n
            bwd = [slice(None)] * n
            mid = [slice(None)] * n
            fwd[k], bwd[k], mid[k] = slice(2, None), slice(None, -2), slice(1, -1)
            dv[tuple(mid) + (c,)] = (G[tuple(fwd) + (c,)] - G[tuple(bwd) + (c,)]) / (2 * h)
        dv = dv.reshape(N, n)
        du = np.zeros((N, n))
        du[:, k] = 1.0
        frames[:, :n, k] = 0.5 * (du + dv)
        frames[:, n:, k] = 0.5 * (dv - du)
    nu = np.concatenate([0.5 * grad_gdot, 0.5 * grad_gdot], axis=1)
    im_phi = forms.std_forms(n).im_dz
    out = np.full((N, n), np.nan)
    for k in range(n):
        others = [j for j in range(n) if j != k]
        F = np.concatenate([nu[:, :, None], frames[:, :, others]], axis=2)
        ok = np.isfinite(F).all(axis=(1, 2))
        vals = np.full(N, np.nan)
        if ok.any():
            vals[ok] = im_phi.evaluate_batch(F[ok])
        out[:, k] = vals
    return out


def _divergence(flux: np.ndarray, shape: tuple, h: float) -> np.ndarray:
    n = flux.shape[1]
    V = flux.reshape(shape + (n,))
    out = np.zeros(shape)
    for i in range(n):
        fwd = [slice(None)] * n
        bwd = [slice(None)] * n
        mid = [slice(None)] * n
        fwd[i], bwd[i], mid[i] = slice(2, None), slice(None, -2), slice(1, -1)
        d = np.full(shape, np.nan)
        d[tuple(mid)] = (V[tuple(fwd) + (i,)] - V[tuple(bwd) + (i,)]) / (2 * h)
        out = out + d
    return out.ravel()


def _curl(theta: np.ndarray, shape: tuple, h: float) -> np.ndarray:
    """max over i < j of |d_i theta_j - d_j theta_i| per node."""
    n = theta.shape[1]
    T = theta.reshape(shape + (n,))
    worst = np.zeros(shape)
    for i, j in itertools.combinations(range(n), 2):
        a = GridField(T[..., j], [(0.0, h * (s - 1)) for s in shape])
        b = GridField(T[..., i], [(0.0, h * (s - 1)) for s in shape])
        d = a.grad()[:, i] - b.grad()[:, j]
        worst = np.maximum(worst, np.abs(d.reshape(shape)))
    return worst.ravel()


@dataclass
class VariationResult:
    h: float
    first_order_residual: float
    d_theta_residual: float
    d_star_theta_residual: float
    star_relation_residual: float
    star_sign: float
    report: ResidualReport

    def residuals(self) -> dict:
        return {"first_order_residual": self.first_order_residual,
                "d_theta_residual": self.d_theta_residual,
                "d_star_theta_residual": self.d_star_theta_residual,
                "star_relation_residual": self.star_relation_residual}

    def to_json(self) -> dict:
        out = {"h": self.h, "star_sign": self.star_sign}
        out.update(self.residuals())
        out["report"] = self.report.summary()
        return out


def variation_harmonicity(data: VariationData, star_sign: Optional[float] = None,
                          tol: float = 1e-6) -> VariationResult:
    """All four first-order residuals on the interior nodes (two layers in).

    Main per-node value of the report: the first-order residual
    tr(h^{-1} Hess gdot).  Series: d*theta (discrete divergence), the star
    relation gap |phi - s * theta|, and d theta."""
    s = STAR_SIGN if star_sign is None else float(star_sign)
    n = data.n
    G, Gd = data.grids()
    shape = G.values.shape
    P = G.nodes()
    # preconditions on the analytic (or field-level) Hessian
    Ha = data.g.hess(P)
    lam = np.linalg.eigvalsh(Ha)
    if np.any(~np.isfinite(lam)) or lam[:, 0].min() <= 0:
        i = int(np.nanargmin(lam[:, 0]))
        raise ValueError(f"metric degenerate: Hess g not positive definite at {P[i].tolist()}")
    det_gap = float(np.abs(np.linalg.det(Ha) - 1.0).max())
    if det_gap > data.det_tol:
        raise ValueError(f"base potential does not solve det Hess g = 1 (gap {det_gap:.3g})")

    h = data.h
    Hg = G.hess()              # compact: induced metric
    grad_g = G.grad()
    grad_gd = Gd.grad()
    Hgd = Gd.hess()
    inner = G.interior_mask(2)
    lo = np.array([b[0] for b in data.box]) + data.margin
    hi = np.array([b[1] for b in data.box]) - data.margin
    region = np.all((P >= lo - 1e-12) & (P <= hi + 1e-12), axis=1)
    ok = inner & np.isfinite(Hg).all(axis=(1, 2))
    hinv = np.full_like(Hg, np.nan)
    dets = np.linalg.det(np.where(ok[:, None, None], Hg, np.eye(n)[None]))
    if np.any(dets[ok] <= 0):
        raise ValueError("metric degenerate: discrete Hess g lost positivity")
    hinv[ok] = np.linalg.inv(Hg[ok])

    first = np.full(P.shape[0], np.nan)
    first[ok] = np.einsum("mij,mji->m", hinv[ok], Hgd[ok])

    theta = -0.5 * grad_gd
    W = np.einsum("mij,mj->mi", hinv, grad_gd)
    sq = np.sqrt(np.abs(dets))
    star_theta = -0.5 * _star_components(W)
    flux = np.where(ok[:, None], sq[:, None] * W, np.nan)
    div = -0.5 * _divergence(flux, shape, h)

    phi = _direct_phi(grad_g, grad_gd, shape, h)
    star_gap = np.abs(phi - s * star_theta).max(axis=1)
    curl = _curl(theta, shape, h)

    keep = ok & region & np.isfinite(div) & np.isfinite(star_gap)
    first = np.where(keep, first, np.nan)
    div = np.where(keep, div, np.nan)
    star_gap = np.where(keep, star_gap, np.nan)
    curl = np.where(keep, curl, np.nan)

    def mx(a):
        a = np.abs(a[np.isfinite(a)])
        return float(a.max()) if a.size else float("nan")

    fo, dt, dst, sr = mx(first), mx(curl), mx(div), mx(star_gap)
    flags = {"first_order": bool(fo <= tol), "closed": bool(dt <= tol)}
    rep = ResidualReport(first, P, flags,
                         {"d_star_theta": div, "star_relation": star_gap, "d_theta": curl},
                         int((~keep).sum()), {"h": h, "det_gap": det_gap})
    return VariationResult(h, fo, dt, dst, sr, s, rep)


def calibrate_star_sign(nodes: int = 21) -> float:
    """Sign s with phi = s * theta on the flat fixture g = |u|^2/2, gdot = u1^2 - u2^2."""
    from .potential.fields import quadratic

    g = quadratic(np.eye(2), DEFAULT_BOX)
    gd = quadratic(np.diag([2.0, -2.0]), DEFAULT_BOX)
    plus = variation_harmonicity(VariationData(g, gd, nodes=nodes), star_sign=1.0)
    minus = variation_harmonicity(VariationData(g, gd, nodes=nodes), star_sign=-1.0)
    return 1.0 if plus.star_relation_residual < minus.star_relation_residual else -1.0


def refinement_table(g: ScalarField, gdot: ScalarField, node_list=(51, 101),
                     box: Sequence = DEFAULT_BOX, star_sign: Optional[float] = None) -> list:
    """Residuals at each grid and the ratio to the next-finer grid."""
    results = [variation_harmonicity(VariationData(g, gdot, box, k), star_sign) for k in node_list]
    rows = []
    for i, r in enumerate(results):
        row = {"nodes": node_list[i], "h": r.h}
        row.update(r.residuals())
        if i > 0:
            prev = results[i - 1]
            for key in ("d_star_theta_residual", "star_relation_residual"):
                cur = getattr(r, key)
                row[key.replace("_residual", "_ratio")] = getattr(prev, key) / cur if cur > 0 else None
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# phase gradient

@dataclass
class SurfaceJet:
    """Surface X: parameters (m, n) -> R^{2n}, sampled on a tensor grid.

    Tangent frames, second derivatives and the mean curvature
    H = sum g^{ij} (X_ij)^normal come from central differences of X on the
    grid (or from ``second`` when given, which returns (m, 2n, n, n))."""
    axes: Sequence[np.ndarray]
    mapping: Callable[[np.ndarray], np.ndarray]
    second: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    def params(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def spacing(self) -> np.ndarray:
        return np.array([a[1] - a[0] for a in self.axes])

    def jet(self) -> dict:
        n = self.n
        S = self.params()
        X = self.mapping(S).reshape(self.shape + (2 * n,))
        h = self.spacing()
        F = np.full(self.shape + (2 * n, n), np.nan)
        D2 = np.full(self.shape + (2 * n, n, n), np.nan)
        for i in range(n):
            for c in range(2 * n):
                GF = GridField(X[..., c], [(0.0, h[j] * (len(self.axes[j]) - 1)) for j in range(n)])
                F[..., c, i] = GF.grad().reshape(self.shape + (n,))[..., i]
                if self.second is None and i == 0:
                    D2[..., c, :, :] = GF.hess().reshape(self.shape + (n, n))
        F = F.reshape(-1, 2 * n, n)
        if self.second is not None:
            D2 = np.asarray(self.second(S), dtype=float)
        else:
            D2 = D2.reshape(-1, 2 * n, n, n)
        Jm = planes.metric(n)
        ok = np.isfinite(F).all(axis=(1, 2)) & np.isfinite(D2).all(axis=(1, 2, 3))
        m = F.shape[0]
        Gm = np.full((m, n, n), np.nan)
        Hmc = np.full((m, 2 * n), np.nan)
        Gm[ok] = np.einsum("mik,ij,mjl->mkl", F[ok], Jm, F[ok])
        ev = np.full((m, n), np.nan)
        ev[ok] = np.linalg.eigvalsh(Gm[ok])
        degenerate = ok & (np.abs(ev).min(axis=1, initial=np.inf, where=np.isfinite(ev)) <= 1e-12)
        ok &= ~degenerate
        Ginv = np.linalg.inv(Gm[ok])
        # tangential projection: P W = F G^{-1} F^T J W
        trace = np.einsum("mij,mcij->mc", Ginv, D2[ok])
        coef = np.einsum("mkl,mil,ij,mj->mk", Ginv, F[ok], Jm, trace)
        Hmc[ok] = trace - np.einsum("mik,mk->mi", F[ok], coef)
        return {"params": S, "frames": F, "metric": Gm, "H": Hmc, "ok": ok,
                "eigs": ev, "degenerate": degenerate}


def phase_gradient_check(surface: SurfaceJet, q: Optional[int] = None, tol: float = 1e-8,
                         lag_tol: float = 1e-8) -> ResidualReport:
    """Per node: max_i |d_i theta + <T X_i, H>| with theta from phase_pq.

    q fixes the expected number of time-like directions; a node whose induced
    metric has another signature raises (mixed-type surface)."""
    n = surface.n
    J = surface.jet()
    F, Gm, H, ok = J["frames"], J["metric"], J["H"], J["ok"]
    m = F.shape[0]
    if J["degenerate"].any():
        i = int(np.nonzero(J["degenerate"])[0][0])
        raise ValueError(f"induced metric degenerates at {J['params'][i].tolist()} "
                         "(signature change across the grid)")
    theta = np.full(m, np.nan)
    sig = None
    for i in np.nonzero(ok)[0]:
        ev = J["eigs"][i]
        s = (int((ev > 0).sum()), int((ev < 0).sum()))
        if sig is None:
            sig = s
        elif s != sig:
            raise ValueError(f"signature changes across the grid: {sig} and {s} "
                             f"(at {J['params'][i].tolist()})")
        theta[i] = planes.phase_pq(F[i], tol=lag_tol).theta
    if sig is None:
        raise ValueError("no interior nodes")
    if q is not None and sig[1] != q:
        raise ValueError(f"expected q = {q} time-like directions, found signature {sig}")

    h = surface.spacing()
    dtheta = np.full((m, n), np.nan)
    Th = theta.reshape(surface.shape)
    for i in range(n):
        GF = GridField(Th, [(0.0, h[j] * (len(surface.axes[j]) - 1)) for j in range(n)])
        dtheta[:, i] = GF.grad()[:, i]
    Jm = planes.metric(n)
    T = planes.tau_matrix(n)
    TX = np.einsum("ij,mjk->mik", T, F)
    pair = np.einsum("mik,ij,mj->mk", TX, Jm, H)
    res_i = dtheta + pair
    res = np.abs(res_i).max(axis=1)
    Hn = np.abs(H).max(axis=1)
    dn = np.abs(dtheta).max(axis=1)
    # H should be normal: <H, X_k> = 0
    orth = np.abs(np.einsum("mi,ij,mjk->mk", H, Jm, F)).max(axis=1)
    valid = np.isfinite(res)
    res = np.where(valid, res, np.nan)
    const_phase = bool(np.nanmax(dn) <= tol)
    minimal = bool(np.nanmax(Hn) <= tol)
    flags = {"constant_phase": const_phase, "minimal": minimal,
             "phase_minimal_agree": const_phase == minimal}
    return ResidualReport(res, J["params"], flags,
                          {"theta": theta, "dtheta_max": dn, "H_max": Hn, "H_normal_gap": orth},
                          int((~valid).sum()), {"signature": list(sig)})


def hyperbola_product(h: float, t_range=(-1.0, 1.0), s_range=(-1.0, 1.0)) -> SurfaceJet:
    """X(t, s) = (cosh t, s, sinh t, 0): hyperbola in the first D factor times
    a space-like line in the second.  Signature (1, 1), theta linear in t."""
    t = np.arange(t_range[0], t_range[1] + h / 2, h)
    s = np.arange(s_range[0], s_range[1] + h / 2, h)

    def mapping(S):
        tt, ss = S[:, 0], S[:, 1]
        return np.stack([np.cosh(tt), ss, np.sinh(tt), np.zeros_like(tt)], axis=1)

    return SurfaceJet([t, s], mapping, name="hyperbola-product")


def flat_plane(A, h: float = 0.125, extent: float = 1.0) -> SurfaceJet:
    """Linear surface s -> A s with A (2n x n); dyadic grids keep the arithmetic exact."""
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    ax = np.arange(-extent, extent + h / 2, h)

    def mapping(S):
        return S @ A.T

    return SurfaceJet([ax.copy() for _ in range(n)], mapping, name="flat")
