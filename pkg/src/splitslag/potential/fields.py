"""Scalar potentials on box domains.

A ScalarField evaluates on point arrays of shape (m, dim).  Gradients and
Hessians come from analytic callables when available, otherwise from
second-order central differences (Hessian symmetrized).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

Array = np.ndarray

_ALLOWED_FUNCS = {
    "exp": sp.exp, "log": sp.log, "sqrt": sp.sqrt,
    "sin": sp.sin, "cos": sp.cos, "tan": sp.tan,
    "asin": sp.asin, "acos": sp.acos, "atan": sp.atan,
    "sinh": sp.sinh, "cosh": sp.cosh, "tanh": sp.tanh,
    "asinh": sp.asinh, "acosh": sp.acosh, "atanh": sp.atanh,
    "abs": sp.Abs, "pi": sp.pi, "E": sp.E,
}


def _as_points(pts, dim: int) -> Array:
    P = np.asarray(pts, dtype=float)
    if P.ndim == 1:
        P = P.reshape(1, -1) if P.size == dim else P.reshape(-1, 1)
    if P.shape[1] != dim:
        raise ValueError(f"points must have {dim} columns, got shape {P.shape}")
    return P


def fd_gradient(fn: Callable, P: Array, h: float) -> Array:
    m, n = P.shape
    out = np.empty((m, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out[:, i] = (fn(P + e) - fn(P - e)) / (2 * h)
    return out


def fd_hessian(fn: Callable, P: Array, h: float) -> Array:
    m, n = P.shape
    H = np.empty((m, n, n))
    f0 = fn(P)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[:, i, i] = (fn(P + ei) - 2 * f0 + fn(P - ei)) / h ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            v = (fn(P + ei + ej) - fn(P + ei - ej) - fn(P - ei + ej) + fn(P - ei - ej)) / (4 * h * h)
            H[:, i, j] = H[:, j, i] = v
    return 0.5 * (H + np.transpose(H, (0, 2, 1)))


@dataclass
class ScalarField:
    dim: int
    value: Callable[[Array], Array]
    gradient: Optional[Callable[[Array], Array]] = None
    hessian: Optional[Callable[[Array], Array]] = None
    box: Optional[Sequence] = None           # [(lo, hi)] * dim
    domain: Optional[Callable[[Array], Array]] = None  # extra mask, e.g. an annulus
    fd_step: float = 1e-4
    name: str = ""
    expr: Optional[str] = None
    meta: dict = field(default_factory=dict)

    def __call__(self, pts) -> Array:
        return np.asarray(self.value(_as_points(pts, self.dim)), dtype=float)

    def grad(self, pts) -> Array:
        P = _as_points(pts, self.dim)
        if self.gradient is not None:
            return np.asarray(self.gradient(P), dtype=float).reshape(P.shape)
        return fd_gradient(self.value, P, self.fd_step)

    def hess(self, pts) -> Array:
        P = _as_points(pts, self.dim)
        if self.hessian is not None:
            H = np.asarray(self.hessian(P), dtype=float).reshape(P.shape[0], self.dim, self.dim)
            return 0.5 * (H + np.transpose(H, (0, 2, 1)))
        if self.gradient is not None:
            # differentiate the analytic gradient once
            h = self.fd_step
            m, n = P.shape
            H = np.empty((m, n, n))
            for j in range(n):
                e = np.zeros(n)
                e[j] = h
                H[:, :, j] = (self.gradient(P + e) - self.gradient(P - e)) / (2 * h)
            return 0.5 * (H + np.transpose(H, (0, 2, 1)))
        return fd_hessian(self.value, P, self.fd_step)

    def hess_richardson(self, pts, h: Optional[float] = None) -> Array:
        """(4 H(h/2) - H(h))/3 from the value-only stencil."""
        P = _as_points(pts, self.dim)
        h = self.fd_step if h is None else h
        return (4 * fd_hessian(self.value, P, h / 2) - fd_hessian(self.value, P, h)) / 3

    @property
    def has_analytic_hessian(self) -> bool:
        return self.hessian is not None

    def inside(self, pts, margin: float = 0.0) -> Array:
        """Mask of points inside the box (shrunk by margin) and the domain."""
        P = _as_points(pts, self.dim)
        ok = np.ones(P.shape[0], dtype=bool)
        if self.box is not None:
            for i, (lo, hi) in enumerate(self.box):
                ok &= (P[:, i] >= lo + margin) & (P[:, i] <= hi - margin)
        if self.domain is not None:
            ok &= np.asarray(self.domain(P), dtype=bool)
        return ok

    def stencil_margin(self) -> float:
        """Distance to the box needed by the difference stencils in use."""
        if self.hessian is not None:
            return 0.0
        if self.gradient is not None:
            return self.fd_step
        return 2 * self.fd_step

    # -- algebra ------------------------------------------------------------
    def __add__(self, other: "ScalarField") -> "ScalarField":
        return _combine(self, other, 1.0, 1.0)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return _combine(self, other, 1.0, -1.0)

    def scaled(self, s: float) -> "ScalarField":
        return ScalarField(
            self.dim,
            lambda P: s * self.value(P),
            None if self.gradient is None else (lambda P: s * self.gradient(P)),
            None if self.hessian is None else (lambda P: s * self.hessian(P)),
            self.box, self.domain, self.fd_step, f"{s}*({self.name})")

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_expr(cls, expr: str, dim: int, box=None, variables: Optional[Sequence[str]] = None,
                  name: str = "") -> "ScalarField":
        """Parse an arithmetic expression in the variables (default x1..x_dim
        with u1.. accepted as aliases) and build analytic derivatives."""
        sym, e = parse_expression(expr, dim, variables)
        grad = [sp.diff(e, s) for s in sym]
        hess = [[sp.diff(g, s) for s in sym] for g in grad]
        f = sp.lambdify(sym, e, "numpy")
        gf = sp.lambdify(sym, grad, "numpy")
        hf = sp.lambdify(sym, hess, "numpy")

        def value(P):
            return np.broadcast_to(np.asarray(f(*P.T), dtype=float), (P.shape[0],)).copy()

        def gradient(P):
            cols = [np.broadcast_to(np.asarray(c, dtype=float), (P.shape[0],)) for c in gf(*P.T)]
            return np.stack(cols, axis=1)

        def hessian(P):
            rows = hf(*P.T)
            m = P.shape[0]
            H = np.empty((m, dim, dim))
            for i in range(dim):
                for j in range(dim):
                    H[:, i, j] = np.broadcast_to(np.asarray(rows[i][j], dtype=float), (m,))
            return H

        return cls(dim, value, gradient, hessian, box, None, 1e-4, name or expr, expr)


def parse_expression(expr: str, dim: int, variables: Optional[Sequence[str]] = None):
    """Whitelisted parse: numbers, + - * / ^ ( ), the variables and the
    functions exp log sqrt sin cos tan asin acos atan sinh cosh tanh asinh
    acosh atanh abs, constants pi and E."""
    if variables is None:
        names = [f"x{i + 1}" for i in range(dim)]
        aliases = {f"u{i + 1}": names[i] for i in range(dim)}
    else:
        names = list(variables)
        if len(names) != dim:
            raise ValueError(f"{len(names)} variable names for a {dim}-dim field")
        aliases = {}
    if "__" in expr or any(c in expr for c in "[]{};'\"\\@=<>!&|~`#$"):
        raise ValueError(f"illegal character in expression {expr!r}")
    sym = sp.symbols(names, real=True)
    local = dict(_ALLOWED_FUNCS)
    local.update(dict(zip(names, sym)))
    for a, target in aliases.items():
        local[a] = local[target]
    try:
        e = parse_expr(expr, local_dict=local, global_dict={"Integer": sp.Integer, "Float": sp.Float,
                                                             "Rational": sp.Rational, "Symbol": sp.Symbol},
                       transformations=standard_transformations + (convert_xor,), evaluate=True)
    except Exception as exc:  # sympy raises a zoo of types
        raise ValueError(f"cannot parse expression {expr!r}: {exc}") from exc
    if not isinstance(e, sp.Expr):
        raise ValueError(f"expression {expr!r} is not scalar")
    free = {str(s) for s in e.free_symbols}
    unknown = free - set(names)
    if unknown:
        raise ValueError(f"unknown names in expression: {sorted(unknown)}")
    for fn in e.atoms(sp.Function):
        if type(fn).__name__.lower() not in {k.lower() for k in _ALLOWED_FUNCS} | {"abs"}:
            raise ValueError(f"function {type(fn).__name__} not allowed")
    return sym, e


def _combine(a: ScalarField, b: ScalarField, sa: float, sb: float) -> ScalarField:
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    grad = hess = None
    if a.gradient is not None and b.gradient is not None:
        grad = lambda P: sa * a.gradient(P) + sb * b.gradient(P)  # noqa: E731
    if a.hessian is not None and b.hessian is not None:
        hess = lambda P: sa * a.hessian(P) + sb * b.hessian(P)  # noqa: E731
    dom = None
    if a.domain is not None or b.domain is not None:
        def dom(P):
            ok = np.ones(P.shape[0], dtype=bool)
            for f in (a, b):
                if f.domain is not None:
                    ok &= f.domain(P)
            return ok
    return ScalarField(a.dim, lambda P: sa * a.value(P) + sb * b.value(P), grad, hess,
                       a.box if a.box is not None else b.box, dom, min(a.fd_step, b.fd_step),
                       f"{a.name} {'+' if sb > 0 else '-'} {b.name}")


def quadratic(M, box=None, b=None, name: str = "") -> ScalarField:
    """f(x) = x.M.x/2 + b.x with M symmetric."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n = M.shape[0]
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
    return ScalarField(
        n,
        lambda P: 0.5 * np.einsum("mi,ij,mj->m", P, M, P) + P @ b,
        lambda P: P @ M.T + b,
        lambda P: np.broadcast_to(M, (P.shape[0], n, n)).copy(),
        box, name=name or "quadratic")


@dataclass
class GridField:
    """Samples of a scalar on a tensor grid (spacing h per axis)."""
    values: Array
    box: Sequence
    name: str = "grid"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != len(self.box):
            raise ValueError("grid values must have one axis per box dimension")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def axes(self) -> list:
        return [np.linspace(lo, hi, k) for (lo, hi), k in zip(self.box, self.values.shape)]

    @property
    def h(self) -> np.ndarray:
        return np.array([(hi - lo) / (k - 1) for (lo, hi), k in zip(self.box, self.values.shape)])

    def nodes(self) -> Array:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def interior_mask(self, width: int = 1) -> Array:
        mask = np.zeros(self.values.shape, dtype=bool)
        sl = tuple(slice(width, k - width) for k in self.values.shape)
        mask[sl] = True
        return mask.ravel()

    def grad(self) -> Array:
        """Central differences; returns (N, dim) with NaN on the boundary layer."""
        out = np.full(self.values.shape + (self.dim,), np.nan)
        h = self.h
        for i in range(self.dim):
            out[..., i] = _central(self.values, i, h[i])
        return out.reshape(-1, self.dim)

    def hess(self) -> Array:
        """Compact second differences; NaN on the boundary layer."""
        d = self.dim
        h = self.h
        V = self.values
        H = np.full(V.shape + (d, d), np.nan)
        for i in range(d):
            H[..., i, i] = _second(V, i, h[i])
            for j in range(i + 1, d):
                H[..., i, j] = H[..., j, i] = _central(_central(V, i, h[i]), j, h[j])
        return H.reshape(-1, d, d)

    @classmethod
    def sample(cls, f: ScalarField, box: Sequence, shape: Sequence[int]) -> "GridField":
        axes = [np.linspace(lo, hi, k) for (lo, hi), k in zip(box, shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        P = np.stack([m.ravel() for m in mesh], axis=1)
        return cls(f(P).reshape(tuple(shape)), list(box), f.name)

    def to_field(self) -> ScalarField:
        """Interpolated field (cubic where possible) for evaluation off the grid."""
        from scipy.interpolate import RegularGridInterpolator

        method = "cubic" if min(self.values.shape) >= 4 else "linear"
        interp = RegularGridInterpolator(self.axes, self.values, method=method)
        return ScalarField(self.dim, lambda P: interp(P), box=list(self.box),
                           fd_step=float(self.h.min()), name=self.name)


def _central(V: Array, axis: int, h: float) -> Array:
    out = np.full(V.shape, np.nan)
    fwd = [slice(None)] * V.ndim
    bwd = [slice(None)] * V.ndim
    mid = [slice(None)] * V.ndim
    fwd[axis] = slice(2, None)
    bwd[axis] = slice(None, -2)
    mid[axis] = slice(1, -1)
    out[tuple(mid)] = (V[tuple(fwd)] - V[tuple(bwd)]) / (2 * h)
    return out


def _second(V: Array, axis: int, h: float) -> Array:
    out = np.full(V.shape, np.nan)
    fwd = [slice(None)] * V.ndim
    bwd = [slice(None)] * V.ndim
    mid = [slice(None)] * V.ndim
    fwd[axis] = slice(2, None)
    bwd[axis] = slice(None, -2)
    mid[axis] = slice(1, -1)
    out[tuple(mid)] = (V[tuple(fwd)] - 2 * V[tuple(mid)] + V[tuple(bwd)]) / h ** 2
    return out
