"""Square matrices over the double numbers.

A D-matrix A = Re + tau*Im is kept as two real arrays.  Its null
decomposition A = e*B + ebar*C has B = Re - Im and C = Re + Im; products,
determinants and cofactors act on B and C separately.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dnum import DNumber, default_tol


@dataclass(frozen=True)
class DMatrix:
    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        re = np.array(self.re, dtype=float)
        im = np.array(self.im, dtype=float)
        if re.ndim != 2 or re.shape[0] != re.shape[1] or re.shape != im.shape:
            raise ValueError(f"D-matrix parts must be equal square arrays, got {re.shape} and {im.shape}")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @property
    def n(self) -> int:
        return self.re.shape[0]

    @property
    def B(self) -> np.ndarray:
        return self.re - self.im

    @property
    def C(self) -> np.ndarray:
        return self.re + self.im

    @classmethod
    def from_null(cls, B, C) -> "DMatrix":
        B = np.asarray(B, dtype=float)
        C = np.asarray(C, dtype=float)
        return cls(0.5 * (B + C), 0.5 * (C - B))

    @classmethod
    def identity(cls, n: int) -> "DMatrix":
        return cls(np.eye(n), np.zeros((n, n)))

    @classmethod
    def scalar(cls, z: DNumber, n: int) -> "DMatrix":
        return cls(z.re * np.eye(n), z.im * np.eye(n))

    @classmethod
    def from_entries(cls, rows) -> "DMatrix":
        re = [[d.re for d in row] for row in rows]
        im = [[d.im for d in row] for row in rows]
        return cls(re, im)

    def entry(self, i: int, j: int) -> DNumber:
        return DNumber(self.re[i, j], self.im[i, j])

    def __matmul__(self, other: "DMatrix") -> "DMatrix":
        return DMatrix.from_null(self.B @ other.B, self.C @ other.C)

    def __add__(self, other: "DMatrix") -> "DMatrix":
        return DMatrix(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "DMatrix") -> "DMatrix":
        return DMatrix(self.re - other.re, self.im - other.im)

    def scale(self, z: DNumber) -> "DMatrix":
        return DMatrix.from_null(z.u * self.B, z.v * self.C)

    def conj(self) -> "DMatrix":
        return DMatrix(self.re, -self.im)

    @property
    def T(self) -> "DMatrix":
        return DMatrix(self.re.T, self.im.T)

    def adjoint(self) -> "DMatrix":
        return DMatrix(self.re.T, -self.im.T)

    def realify(self) -> np.ndarray:
        """The real 2n x 2n matrix acting on (x, y) with z = x + tau*y."""
        return np.block([[self.re, self.im], [self.im, self.re]])

    def apply_real(self, vecs: np.ndarray) -> np.ndarray:
        """Apply to real column vectors ordered (x_1..x_n, y_1..y_n)."""
        return self.realify() @ vecs

    def allclose(self, other: "DMatrix", tol: Optional[float] = None) -> bool:
        t = default_tol(tol)
        return (np.max(np.abs(self.re - other.re)) <= t
                and np.max(np.abs(self.im - other.im)) <= t)

    def to_json(self) -> dict:
        return {"n": self.n, "re": self.re.ravel().tolist(), "im": self.im.ravel().tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "DMatrix":
        n = int(data["n"])
        return cls(np.reshape(data["re"], (n, n)), np.reshape(data["im"], (n, n)))


def det_d(A: DMatrix) -> DNumber:
    """det_D(eB + ebar C) = e det B + ebar det C (two LU factorizations)."""
    return DNumber.from_null(float(np.linalg.det(A.B)), float(np.linalg.det(A.C)))


def det_d_leibniz(A: DMatrix) -> DNumber:
    """Permutation-sum definition; test oracle for small n."""
    from itertools import permutations

    n = A.n
    total = DNumber(0.0)
    for perm in permutations(range(n)):
        # parity by counting inversions
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = DNumber(1.0 if inv % 2 == 0 else -1.0)
        for i, j in enumerate(perm):
            term = term * A.entry(i, j)
        total = total + term
    return total


def _cofactor(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    if n == 1:
        return np.ones((1, 1))
    out = np.empty_like(M)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
            out[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return out


@dataclass(frozen=True)
class UnitaryReport:
    is_unitary: bool
    is_special_unitary: bool
    residual: float
    det: DNumber


def unitary_report(A: DMatrix, tol: Optional[float] = None) -> UnitaryReport:
    t = default_tol(tol)
    prod = A @ A.adjoint()
    diff = np.sqrt(np.sum((prod.re - np.eye(A.n)) ** 2 + prod.im ** 2))
    ok = bool(diff <= t * A.n)
    d = det_d(A)
    special = ok and d.isclose(DNumber(1.0), t)
    return UnitaryReport(ok, bool(special), float(diff), d)


def is_unitary(A: DMatrix, tol: Optional[float] = None) -> bool:
    return unitary_report(A, tol).is_unitary


def is_special_unitary(A: DMatrix, tol: Optional[float] = None) -> bool:
    return unitary_report(A, tol).is_special_unitary


def from_gl(B) -> DMatrix:
    """e*B + ebar*(B^T)^-1, the unitary matrix attached to B in GL_n(R)."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape[0] != B.shape[1]:
        raise ValueError("from_gl needs a square matrix")
    try:
        Binv = np.linalg.inv(B)
    except np.linalg.LinAlgError as exc:
        raise ValueError("not invertible") from exc
    if not np.all(np.isfinite(Binv)) or np.linalg.cond(B) > 1e14:
        raise ValueError("not invertible")
    return DMatrix.from_null(B, Binv.T)


@dataclass(frozen=True)
class AdjugateInverse:
    cofactor: DMatrix          # A @ cofactor.T == det_D(A) I
    adjugate: DMatrix          # classical adjugate, cofactor transposed
    det: DNumber
    inverse: Optional[DMatrix]
    inverse_note: Optional[str] = None


def adjugate_inverse(A: DMatrix, tol: Optional[float] = None) -> AdjugateInverse:
    t = default_tol(tol)
    cof = DMatrix.from_null(_cofactor(A.B), _cofactor(A.C))
    d = det_d(A)
    if abs(d.u) <= t or abs(d.v) <= t:
        return AdjugateInverse(cof, cof.T, d, None, "det_D null")
    inv = DMatrix.from_null(cof.B.T / d.u, cof.C.T / d.v)
    return AdjugateInverse(cof, cof.T, d, inv)
