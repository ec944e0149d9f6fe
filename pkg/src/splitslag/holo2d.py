"""Dimension two: complex curves in C^2 versus unconstrained split SLAG
surfaces in D^2.

The fixed linear map sends (x1, x2, y1, y2) to complex coordinates

    z1' = x1 - i x2,    z2' = y1 + i y2,

under which dz1' ^ dz2' pulls back to omega + i Im dz exactly.  A complex
curve (z1'(zeta), z2'(zeta)) therefore becomes a surface on which omega and
Im dz both vanish, and the graph y = A x of A = [[a, b], [b, -a]] becomes
the complex line z2' = (a + i b) z1'.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from . import forms, planes
from .potential.surfaces import ImmersedSurface, eds_report
from .report import ResidualReport

# rows: (x1', x2', y1', y2') = real/imag parts of (z1', z2'), in terms of (x1, x2, y1, y2)
COORD_MAP = np.array([
    [1.0, 0.0, 0.0, 0.0],    # x1' = Re z1' = x1
    [0.0, 0.0, 1.0, 0.0],    # x2' = Re z2' = y1
    [0.0, -1.0, 0.0, 0.0],   # y1' = Im z1' = -x2
    [0.0, 0.0, 0.0, 1.0],    # y2' = Im z2' = y2
])


def complex_forms() -> tuple:
    """Re and Im of dz1' ^ dz2' on C^2 with real coordinates (x1', x2', y1', y2')."""
    d = 4
    dx1, dx2, dy1, dy2 = (forms.AltForm.coordinate(d, i) for i in range(4))
    re = dx1.wedge(dx2) - dy1.wedge(dy2)
    im = dx1.wedge(dy2) + dy1.wedge(dx2)
    return re, im


@dataclass
class IdentityReport:
    map: np.ndarray
    inverse: np.ndarray
    identity_residual: float
    re_residual: float
    im_residual: float
    involution_residual: float

    def to_json(self) -> dict:
        return {"map": self.map.tolist(), "inverse": self.inverse.tolist(),
                "identity_residual": self.identity_residual, "re_residual": self.re_residual,
                "im_residual": self.im_residual, "inverse_residual": self.involution_residual}


def coord_map_and_form_identity() -> IdentityReport:
    """Check Re M^*(dz1' ^ dz2') = omega and Im M^*(dz1' ^ dz2') = Im dz coefficientwise."""
    re_c, im_c = complex_forms()
    s = forms.std_forms(2)
    re_res = (re_c.pullback(COORD_MAP) - s.omega).norm()
    im_res = (im_c.pullback(COORD_MAP) - s.im_dz).norm()
    inv = COORD_MAP.T  # signed permutation, so orthogonal
    inv_res = float(np.abs(inv @ COORD_MAP - np.eye(4)).max())
    return IdentityReport(COORD_MAP, inv, max(re_res, im_res), re_res, im_res, inv_res)


def to_complex(X: np.ndarray) -> tuple:
    """(x1, x2, y1, y2) rows -> (z1', z2')."""
    W = X @ COORD_MAP.T
    return W[:, 0] + 1j * W[:, 2], W[:, 1] + 1j * W[:, 3]


def from_complex(z1, z2) -> np.ndarray:
    z1 = np.atleast_1d(np.asarray(z1, dtype=complex))
    z2 = np.atleast_1d(np.asarray(z2, dtype=complex))
    W = np.stack([z1.real, z2.real, z1.imag, z2.imag], axis=1)
    return W @ COORD_MAP  # inverse = transpose


@dataclass
class PlaneCorrespondence:
    A: np.ndarray
    slope: complex
    slag: bool
    graph_slag: bool
    line_residual: float

    def to_json(self) -> dict:
        return {"A": self.A.tolist(), "slope": [self.slope.real, self.slope.imag],
                "abs_slope": abs(self.slope), "slag": self.slag, "graph_slag": self.graph_slag,
                "line_residual": self.line_residual}


def plane_correspondence(a: float, b: float, tol: float = 1e-10) -> PlaneCorrespondence:
    A = np.array([[a, b], [b, -a]], dtype=float)
    slope = complex(a, b)
    slag = abs(slope) < 1 - tol
    gt = planes.graph_tests(planes.GraphMatrix("x", A), tol)
    # images of the graph basis lie on z2' = slope z1'
    z1, z2 = to_complex(np.vstack([np.eye(2), A]).T)
    line = float(np.abs(z2 - slope * z1).max())
    return PlaneCorrespondence(A, slope, bool(slag), gt.slag, line)


# ---------------------------------------------------------------------------
# curves

@dataclass
class ComplexCurveParam:
    """z1'(zeta), z2'(zeta) with derivatives, sampled on a disk of given radius.

    Either polynomial coefficient lists (ascending powers, complex) or
    callables f1, df1, f2, df2 acting on complex arrays."""
    coeffs1: Optional[Sequence[complex]] = None
    coeffs2: Optional[Sequence[complex]] = None
    f1: Optional[Callable] = None
    df1: Optional[Callable] = None
    f2: Optional[Callable] = None
    df2: Optional[Callable] = None
    radius: float = 1.0
    n: int = 41

    def __post_init__(self):
        poly = self.coeffs1 is not None and self.coeffs2 is not None
        call = all(f is not None for f in (self.f1, self.df1, self.f2, self.df2))
        if poly == call:
            raise ValueError("give either both coefficient lists or all four callables")
        if poly:
            c1 = np.asarray(self.coeffs1, dtype=complex)
            c2 = np.asarray(self.coeffs2, dtype=complex)
            self.f1 = lambda z: P.polyval(z, c1)
            self.f2 = lambda z: P.polyval(z, c2)
            self.df1 = lambda z: P.polyval(z, P.polyder(c1)) if c1.size > 1 else 0 * z
            self.df2 = lambda z: P.polyval(z, P.polyder(c2)) if c2.size > 1 else 0 * z

    @property
    def is_polynomial(self) -> bool:
        return self.coeffs1 is not None

    def axes(self) -> list:
        s = np.linspace(-self.radius, self.radius, self.n)
        return [s, s.copy()]

    def cr_residual(self, zeta: np.ndarray, h: float = 1e-6) -> float:
        """max |d f/d zeta-bar| by central differences, for callables."""
        worst = 0.0
        for f in (self.f1, self.f2):
            dx = (f(zeta + h) - f(zeta - h)) / (2 * h)
            dy = (f(zeta + 1j * h) - f(zeta - 1j * h)) / (2 * h)
            worst = max(worst, float(np.abs(0.5 * (dx + 1j * dy)).max()))
        return worst

    def derivative_residual(self, zeta: np.ndarray, h: float = 1e-6) -> float:
        """max |f' - (difference quotient)| for the supplied derivatives."""
        worst = 0.0
        for f, df in ((self.f1, self.df1), (self.f2, self.df2)):
            dx = (f(zeta + h) - f(zeta - h)) / (2 * h)
            worst = max(worst, float(np.abs(dx - df(zeta)).max()))
        return worst


def _taylor(c: np.ndarray, z0: complex) -> np.ndarray:
    """Taylor coefficients of the polynomial c at z0."""
    out = []
    cur = c.copy()
    fact = 1.0
    for k in range(len(c)):
        out.append(P.polyval(z0, cur) / fact)
        cur = P.polyder(cur) if cur.size > 1 else np.zeros(1, dtype=complex)
        fact *= k + 1
    return np.array(out)


def limiting_margin(curve: ComplexCurveParam, z0: complex, tol: float = 1e-12) -> Optional[float]:
    """45-degree margin 1 - |slope| of the limiting tangent line at a branch
    point (both derivatives vanish), from the leading Taylor terms."""
    if not curve.is_polynomial:
        return None
    t1 = _taylor(np.asarray(curve.coeffs1, dtype=complex), z0)[1:]
    t2 = _taylor(np.asarray(curve.coeffs2, dtype=complex), z0)[1:]

    def order(t):
        nz = np.nonzero(np.abs(t) > tol)[0]
        return (int(nz[0]), t[nz[0]]) if nz.size else (None, 0)

    o1, a1 = order(t1)
    o2, a2 = order(t2)
    if o1 is None and o2 is None:
        return None
    if o2 is None or (o1 is not None and o1 < o2):
        return 1.0
    if o1 is None or o2 < o1:
        return -np.inf
    return 1.0 - abs(a2 / a1)


def curve_to_surface(curve: ComplexCurveParam, tol: float = 1e-12,
                     cr_tol: float = 1e-6) -> tuple:
    """Push a complex curve into D^2 and report omega, Im dz, the 45-degree
    margin |dz1'/dzeta| - |dz2'/dzeta| and the induced space-like flag.

    Nodes where both derivatives vanish (branch points) are excluded from the
    pointwise report; their limiting-tangent margin is recorded separately."""
    ax = curve.axes()
    S, T = np.meshgrid(*ax, indexing="ij")
    zeta_all = (S + 1j * T).ravel()
    if not curve.is_polynomial:
        cr = curve.cr_residual(zeta_all)
        if cr > cr_tol:
            raise ValueError(f"curve is not holomorphic: Cauchy-Riemann residual {cr:.3g}")

    def mapping(Q):
        z = Q[:, 0] + 1j * Q[:, 1]
        return from_complex(curve.f1(z), curve.f2(z))

    def jac(Q):
        z = Q[:, 0] + 1j * Q[:, 1]
        w1 = np.broadcast_to(curve.df1(z), z.shape)
        w2 = np.broadcast_to(curve.df2(z), z.shape)
        ds = from_complex(w1, w2)
        dt = from_complex(1j * w1, 1j * w2)
        return np.stack([ds, dt], axis=2)

    def in_disk(Q):
        return np.hypot(Q[:, 0], Q[:, 1]) <= curve.radius + 1e-12

    surf = ImmersedSurface(ax, mapping, jac, mask=in_disk, name="holomorphic-curve")
    rep = eds_report(surf, tol=max(tol, 1e-12))
    z = zeta_all
    w1 = np.abs(np.broadcast_to(curve.df1(z), z.shape))
    w2 = np.abs(np.broadcast_to(curve.df2(z), z.shape))
    margin45 = w1 - w2
    branch = (w1 <= 1e-12) & (w2 <= 1e-12) & in_disk(np.column_stack([S.ravel(), T.ravel()]))
    valid = np.isfinite(rep.values)
    spacelike = np.asarray(rep.series["margin"]) > 0
    # sign agreement, ignoring nodes sitting exactly on the null boundary
    decisive = valid & (np.abs(margin45) > 1e-9)
    agree = bool(np.all((margin45[decisive] > 0) == spacelike[decisive]))
    rep.series["margin45"] = np.where(valid, margin45, np.nan)
    rep.flags.update({
        "unconstrained_slag": bool(rep.series_max("omega") <= tol and rep.max <= tol),
        "margin_sign_agrees": agree,
        "forty_five_rule": bool(np.all(margin45[valid] > 0)),
    })
    branch_info = []
    for zb in z[branch]:
        branch_info.append({"zeta": [float(zb.real), float(zb.imag)],
                            "limiting_margin": _float_or_none(limiting_margin(curve, complex(zb)))})
    rep.notes["branch_points"] = branch_info
    return surf, rep


def disk_line_curve(slope: complex, radius: float = 1.0, n: int = 41) -> ComplexCurveParam:
    return ComplexCurveParam([0, 1], [0, slope], radius=radius, n=n)


def _float_or_none(x):
    return None if x is None else float(x)
