"""Dense exterior algebra on R^d for small d (d = 2n <= 8).

Coefficients of a k-form are stored against the increasing multi-indices
of itertools.combinations(range(d), k).  Coordinates on R^{2n} are ordered
x_1..x_n, y_1..y_n, so x_j has index j-1 and y_j has index n+j-1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Optional

import numpy as np

from .dnum import DNumber, default_tol


@lru_cache(maxsize=None)
def basis_indices(dim: int, k: int) -> tuple:
    return tuple(combinations(range(dim), k))


@lru_cache(maxsize=None)
def _position(dim: int, k: int) -> dict:
    return {idx: p for p, idx in enumerate(basis_indices(dim, k))}


def _sort_sign(seq) -> tuple:
    """Sign of the permutation sorting seq, and the sorted tuple (0 if repeated)."""
    seq = list(seq)
    if len(set(seq)) < len(seq):
        return 0, None
    sign = 1
    # bubble count of inversions, fine for <= 8 entries
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign, tuple(sorted(seq))


class _Alternating:
    """Shared dense storage for forms and multivectors."""

    def __init__(self, degree: int, dim: int, coeffs=None):
        if degree < 0:
            raise ValueError(f"negative degree {degree}")
        self.degree = int(degree)
        self.dim = int(dim)
        size = math.comb(dim, degree)
        if coeffs is None:
            self.coeffs = np.zeros(size)
        else:
            c = np.asarray(coeffs, dtype=float).reshape(-1)
            if c.size != size:
                raise ValueError(f"expected {size} coefficients, got {c.size}")
            self.coeffs = c.copy()

    @property
    def indices(self) -> tuple:
        return basis_indices(self.dim, self.degree)

    @classmethod
    def basis(cls, dim: int, idx: Iterable[int], coeff: float = 1.0):
        idx = tuple(idx)
        sign, key = _sort_sign(idx)
        out = cls(len(idx), dim)
        if sign:
            out.coeffs[_position(dim, len(idx))[key]] = sign * coeff
        return out

    @classmethod
    def from_dict(cls, dim: int, degree: int, entries: dict):
        out = cls(degree, dim)
        pos = _position(dim, degree)
        for idx, c in entries.items():
            sign, key = _sort_sign(idx)
            if sign:
                out.coeffs[pos[key]] += sign * c
        return out

    def _check(self, other):
        if type(other) is not type(self) or other.degree != self.degree or other.dim != self.dim:
            raise ValueError("incompatible operands")

    def _new(self, coeffs):
        return type(self)(self.degree, self.dim, coeffs)

    def __add__(self, other):
        self._check(other)
        return self._new(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return self._new(self.coeffs - other.coeffs)

    def __neg__(self):
        return self._new(-self.coeffs)

    def __mul__(self, s):
        if isinstance(s, (int, float, np.floating)):
            return self._new(self.coeffs * float(s))
        return NotImplemented

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.norm() <= tol

    def items(self):
        for idx, c in zip(self.indices, self.coeffs):
            if c != 0.0:
                yield idx, float(c)

    def wedge(self, other):
        if type(other) is not type(self) or other.dim != self.dim:
            raise ValueError("incompatible operands")
        k = self.degree + other.degree
        out = type(self)(k, self.dim)
        if k > self.dim:
            return out
        pos = _position(self.dim, k)
        for I, a in self.items():
            for J, b in other.items():
                sign, key = _sort_sign(I + J)
                if sign:
                    out.coeffs[pos[key]] += sign * a * b
        return out

    def to_json(self) -> dict:
        return {"degree": self.degree, "dim": self.dim,
                "entries": [[list(idx), c] for idx, c in self.items()]}

    @classmethod
    def from_json(cls, data: dict):
        entries = {tuple(int(i) for i in idx): float(c) for idx, c in data["entries"]}
        return cls.from_dict(int(data["dim"]), int(data["degree"]), entries)

    def __repr__(self) -> str:
        terms = " + ".join(f"{c:g}*{list(idx)}" for idx, c in self.items()) or "0"
        return f"{type(self).__name__}(deg={self.degree}, dim={self.dim}: {terms})"


class AltForm(_Alternating):

    @classmethod
    def coordinate(cls, dim: int, i: int) -> "AltForm":
        return cls.basis(dim, (i,))

    @classmethod
    def from_covector(cls, vec) -> "AltForm":
        vec = np.asarray(vec, dtype=float)
        return cls(1, vec.size, vec)

    def contract(self, v) -> "AltForm":
        """Interior product v _| a, a (k-1)-form."""
        v = np.asarray(v, dtype=float)
        if self.degree == 0:
            raise ValueError("cannot contract a 0-form")
        out = AltForm(self.degree - 1, self.dim)
        pos = _position(self.dim, self.degree - 1)
        for I, c in self.items():
            for r, i in enumerate(I):
                if v[i] != 0.0:
                    rest = I[:r] + I[r + 1:]
                    out.coeffs[pos[rest]] += (-1) ** r * v[i] * c
        return out

    def evaluate(self, vectors) -> float:
        """a(v_1, .., v_k) with vectors given as the columns of a d x k array."""
        V = np.asarray(vectors, dtype=float).reshape(self.dim, self.degree)
        if self.degree == 0:
            return float(self.coeffs[0])
        return float(sum(c * np.linalg.det(V[list(I), :]) for I, c in self.items()))

    def evaluate_batch(self, frames) -> np.ndarray:
        """Evaluate on a stack of frames of shape (m, d, k)."""
        F = np.asarray(frames, dtype=float)
        out = np.zeros(F.shape[0])
        for I, c in self.items():
            out += c * np.linalg.det(F[:, list(I), :])
        return out

    def pullback(self, L) -> "AltForm":
        """L^* a for a linear map L: R^m -> R^d given as a d x m matrix."""
        L = np.asarray(L, dtype=float)
        if L.shape[0] != self.dim:
            raise ValueError(f"map has {L.shape[0]} rows, form lives on R^{self.dim}")
        m = L.shape[1]
        k = self.degree
        out = AltForm(k, m)
        if k > m:
            return out
        if k == 0:
            out.coeffs[:] = self.coeffs
            return out
        for p, J in enumerate(basis_indices(m, k)):
            sub = L[:, list(J)]
            out.coeffs[p] = sum(c * np.linalg.det(sub[list(I), :]) for I, c in self.items())
        return out

    def pullback_batch(self, frames) -> np.ndarray:
        """Pullback coefficients for a stack of maps (m_nodes, d, m); shape (m_nodes, C(m, k))."""
        F = np.asarray(frames, dtype=float)
        m = F.shape[2]
        k = self.degree
        combos = basis_indices(m, k)
        out = np.zeros((F.shape[0], len(combos)))
        for p, J in enumerate(combos):
            sub = F[:, :, list(J)]
            for I, c in self.items():
                out[:, p] += c * np.linalg.det(sub[:, list(I), :])
        return out

    def pair(self, mv: "MultiVector") -> float:
        if mv.dim != self.dim or mv.degree != self.degree:
            raise ValueError("degree/dimension mismatch in pairing")
        return float(self.coeffs @ mv.coeffs)

    def is_simple(self, tol: Optional[float] = None) -> bool:
        return simplicity_residual(self) <= default_tol(tol)


class MultiVector(_Alternating):

    @classmethod
    def from_vectors(cls, vectors) -> "MultiVector":
        """v_1 ^ .. ^ v_k from the columns of a d x k array."""
        V = np.asarray(vectors, dtype=float)
        if V.ndim == 1:
            V = V[:, None]
        d, k = V.shape
        out = cls(k, d)
        for p, I in enumerate(out.indices):
            out.coeffs[p] = np.linalg.det(V[list(I), :]) if k else 1.0
        return out


def simplicity_residual(a: AltForm) -> float:
    """Plücker test: max over basis (k-1)-vectors X of |(X _| a) ^ a|."""
    k, d = a.degree, a.dim
    if k <= 1 or k >= d - 1:
        return 0.0  # degree 0, 1, d-1, d forms are always decomposable
    worst = 0.0
    eye = np.eye(d)
    for X in basis_indices(d, k - 1):
        c = a
        for i in X:
            c = c.contract(eye[i])
        worst = max(worst, c.wedge(a).norm())
    return worst


def wedge_contract_simple(a: AltForm, b: AltForm, v, tol: Optional[float] = None) -> dict:
    return {"wedge": a.wedge(b), "contraction": a.contract(v), "a_is_simple": a.is_simple(tol)}


# ---------------------------------------------------------------------------
# standard forms on D^n = R^{2n}

def dx(n: int, j: int) -> AltForm:
    return AltForm.coordinate(2 * n, j)


def dy(n: int, j: int) -> AltForm:
    return AltForm.coordinate(2 * n, n + j)


def _wedge_all(forms) -> AltForm:
    out = forms[0]
    for f in forms[1:]:
        out = out.wedge(f)
    return out


@dataclass
class StdForms:
    n: int
    omega: AltForm
    re_dz: AltForm
    im_dz: AltForm
    du: AltForm           # du_1 ^ .. ^ du_n
    dv: AltForm           # dv_1 ^ .. ^ dv_n
    du1: list             # the 1-forms du_j = dx_j - dy_j
    dv1: list             # the 1-forms dv_j = dx_j + dy_j


def dz_expansion(n: int) -> tuple:
    """Re and Im parts of (dx_1 + tau dy_1) ^ .. ^ (dx_n + tau dy_n).

    Each of the 2^n products picks dx_j or dy_j per factor; tau^m is real
    for even m, so terms with an even number of dy factors go to Re.
    """
    d = 2 * n
    re = AltForm(n, d)
    im = AltForm(n, d)
    for picks in product((0, 1), repeat=n):
        idx = tuple(j + n * p for j, p in enumerate(picks))
        term = AltForm.basis(d, idx)
        if sum(picks) % 2 == 0:
            re = re + term
        else:
            im = im + term
    return re, im


def std_forms(n: int) -> StdForms:
    if n < 1:
        raise ValueError("n must be positive")
    d = 2 * n
    omega = AltForm(2, d)
    for j in range(n):
        omega = omega + dx(n, j).wedge(dy(n, j))
    du1 = [dx(n, j) - dy(n, j) for j in range(n)]
    dv1 = [dx(n, j) + dy(n, j) for j in range(n)]
    re, im = dz_expansion(n)
    return StdForms(n, omega, re, im, _wedge_all(du1), _wedge_all(dv1), du1, dv1)


def eval_dz_oracle(columns) -> DNumber:
    """dz evaluated on the columns (2n x n) via the explicit 2^n expansion."""
    P = np.asarray(columns, dtype=float)
    d, n = P.shape
    if d != 2 * n:
        raise ValueError("columns must be 2n x n")
    if n > 3:
        raise ValueError("oracle limited to n <= 3")
    re, im = dz_expansion(n)
    return DNumber(re.evaluate(P), im.evaluate(P))


def phi_form(n: int, rho_u: float = 1.0, rho_v: float = 1.0) -> tuple:
    """Re and Im parts of rho_u du e + rho_v dv ebar (constant densities).

    With e = (1 - tau)/2 and ebar = (1 + tau)/2 this is
    Re = (rho_u du + rho_v dv)/2 and Im = (rho_v dv - rho_u du)/2.
    """
    s = std_forms(n)
    re = 0.5 * (rho_u * s.du + rho_v * s.dv)
    im = 0.5 * (rho_v * s.dv - rho_u * s.du)
    return re, im


# ---------------------------------------------------------------------------
# Ricci-flat triple checker

def convention_constant(n: int) -> float:
    """alpha ^ beta / omega^n on the product model built from the 2-dim block
    (alpha = a^b, beta = a'^b', omega = a^a' + b^b') and, for odd n, one
    1-dim block (alpha = beta = a, omega = a^a').  Recorded per dimension."""
    return _model_constant(n)


@lru_cache(maxsize=None)
def _model_constant(n: int) -> float:
    alpha, beta, omega = product_model(n)
    top = alpha.wedge(beta)
    om = omega
    for _ in range(n - 1):
        om = om.wedge(omega)
    i = int(np.argmax(np.abs(om.coeffs)))
    return float(top.coeffs[i] / om.coeffs[i])


def product_model(n: int) -> tuple:
    """Pointwise (alpha, beta, omega) on R^{2n} from 2-dim blocks, plus a
    1-dim block when n is odd.  Coordinates per 2-block: (a, b, a', b')."""
    d = 2 * n
    alpha = beta = None
    omega = AltForm(2, d)
    off = 0
    blocks = [2] * (n // 2) + ([1] if n % 2 else [])
    for size in blocks:
        if size == 2:
            a, b, ap, bp = (AltForm.coordinate(d, off + i) for i in range(4))
            al, be = a.wedge(b), ap.wedge(bp)
            omega = omega + a.wedge(ap) + b.wedge(bp)
            off += 4
        else:
            a, ap = AltForm.coordinate(d, off), AltForm.coordinate(d, off + 1)
            al, be = a, ap
            omega = omega + a.wedge(ap)
            off += 2
        alpha = al if alpha is None else alpha.wedge(al)
        beta = be if beta is None else beta.wedge(be)
    return alpha, beta, omega


@dataclass
class RicciFlatReport:
    simple_ok: bool
    wedge_omega_ok: bool
    wedge_omega_residual: float
    proportionality: Optional[float]
    proportionality_residual: float
    strict_ok: Optional[bool]
    convention_constant: float
    simplicity_residuals: tuple

    def to_json(self) -> dict:
        return {
            "simple_ok": self.simple_ok,
            "wedge_omega_ok": self.wedge_omega_ok,
            "wedge_omega_residual": self.wedge_omega_residual,
            "proportionality": self.proportionality,
            "proportionality_residual": self.proportionality_residual,
            "strict_ok": self.strict_ok,
            "convention_constant": self.convention_constant,
            "simplicity_residuals": list(self.simplicity_residuals),
        }


def ricci_flat_check(alpha: AltForm, beta: AltForm, omega: AltForm, mode: str = "strict",
                     variant: str = "alpha_beta", tol: Optional[float] = None) -> RicciFlatReport:
    """Pointwise checks for a triple (alpha, beta, omega).

    (1) alpha and beta simple, (2) alpha^omega = beta^omega = 0,
    (3) alpha^beta = c omega^n with c != 0.  In strict mode c must also equal
    the recorded convention constant.  variant="phi_psi" takes (phi, psi)
    and uses alpha = phi - psi, beta = phi + psi.
    """
    t = default_tol(tol)
    if variant == "phi_psi":
        alpha, beta = alpha - beta, alpha + beta
    elif variant != "alpha_beta":
        raise ValueError(f"unknown variant {variant!r}")
    d = omega.dim
    if d % 2 or omega.degree != 2:
        raise ValueError("omega must be a 2-form on an even-dimensional space")
    n = d // 2
    if alpha.degree != n or beta.degree != n:
        raise ValueError(f"alpha and beta must have degree {n}")
    om_n = omega
    for _ in range(n - 1):
        om_n = om_n.wedge(omega)
    if om_n.norm() <= t:
        raise ValueError("degenerate omega")

    sres = (simplicity_residual(alpha), simplicity_residual(beta))
    simple_ok = max(sres) <= t
    wres = max(alpha.wedge(omega).norm(), beta.wedge(omega).norm())
    top = alpha.wedge(beta)
    # top-degree forms have one coefficient
    c = float(top.coeffs[0] / om_n.coeffs[0])
    prop_res = float(abs(top.coeffs[0] - c * om_n.coeffs[0]))
    prop = c if abs(c) > t else None
    const = convention_constant(n)
    strict = None
    if mode == "strict":
        strict = bool(simple_ok and wres <= t and prop is not None and abs(c - const) <= t)
    elif mode != "basic":
        raise ValueError(f"unknown mode {mode!r}")
    return RicciFlatReport(bool(simple_ok), bool(wres <= t), float(wres), prop, prop_res,
                           strict, const, sres)
