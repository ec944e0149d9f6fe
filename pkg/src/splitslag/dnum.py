"""Double numbers D = R[tau]/(tau^2 - 1).

An element is stored as the pair (re, im) meaning re + tau*im.  The null
coordinates are derived views:

    u = re - im,  v = re + im,   z = u*e + v*ebar

with the idempotents e = (1 - tau)/2 and ebar = (1 + tau)/2.  With this
choice tau*e = -e and tau*ebar = ebar, so multiplication is componentwise in
(u, v).  Every sign convention elsewhere in the package follows from it.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional

# default absolute tolerance; SLAG_TOL overrides it process-wide
DEFAULT_TOL = float(os.environ.get("SLAG_TOL", "1e-10"))

NULL_NOT_INVERTIBLE = "null, not invertible"

COMPONENTS = ("D+", "-D+", "tauD+", "-tauD+", "null")


def default_tol(tol: Optional[float] = None) -> float:
    return DEFAULT_TOL if tol is None else float(tol)


@dataclass(frozen=True)
class DNumber:
    re: float
    im: float = 0.0

    # -- null coordinates -------------------------------------------------
    @property
    def u(self) -> float:
        return self.re - self.im

    @property
    def v(self) -> float:
        return self.re + self.im

    @classmethod
    def from_null(cls, u: float, v: float) -> "DNumber":
        return cls(0.5 * (u + v), 0.5 * (v - u))

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "DNumber":
        if isinstance(other, DNumber):
            return other
        if isinstance(other, (int, float)):
            return DNumber(float(other), 0.0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return DNumber(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return DNumber(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return DNumber(-self.re, -self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        # tau^2 = 1
        return DNumber(self.re * o.re + self.im * o.im,
                       self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        inv = o.inverse()
        if inv is None:
            raise ZeroDivisionError(NULL_NOT_INVERTIBLE)
        return self * inv

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (DNumber(1.0) / self) ** (-k)
        return DNumber.from_null(self.u ** k, self.v ** k)

    def conj(self) -> "DNumber":
        return DNumber(self.re, -self.im)

    def quad(self) -> float:
        """z * conj(z) = re^2 - im^2 = u*v."""
        return self.u * self.v

    def is_null(self, tol: Optional[float] = None) -> bool:
        t = default_tol(tol)
        return abs(self.u) <= t or abs(self.v) <= t

    def inverse(self, tol: float = 0.0) -> Optional["DNumber"]:
        u, v = self.u, self.v
        if abs(u) <= tol or abs(v) <= tol:
            return None
        return DNumber.from_null(1.0 / u, 1.0 / v)

    def component(self, tol: float = 0.0) -> str:
        return classify(self, tol)

    def isclose(self, other, tol: Optional[float] = None) -> bool:
        o = self._coerce(other)
        t = default_tol(tol)
        return abs(self.re - o.re) <= t and abs(self.im - o.im) <= t

    def to_json(self) -> list:
        return [float(self.re), float(self.im)]

    @classmethod
    def from_json(cls, data) -> "DNumber":
        if len(data) != 2:
            raise ValueError("a double number is encoded as [re, im]")
        return cls(float(data[0]), float(data[1]))

    def __repr__(self) -> str:
        sign = "+" if self.im >= 0 else "-"
        return f"({self.re!r} {sign} {abs(self.im)!r}t)"


TAU = DNumber(0.0, 1.0)
ONE = DNumber(1.0, 0.0)
E = DNumber(0.5, -0.5)      # (1 - tau)/2
EBAR = DNumber(0.5, 0.5)    # (1 + tau)/2


def classify(z: DNumber, tol: float = 0.0) -> str:
    """Which of the four components of D* holds z, or 'null'."""
    u, v = z.u, z.v
    if abs(u) <= tol or abs(v) <= tol:
        return "null"
    if u > 0 and v > 0:
        return "D+"
    if u < 0 and v < 0:
        return "-D+"
    if u < 0 < v:
        return "tauD+"      # tau itself has (u, v) = (-1, 1)
    return "-tauD+"


@dataclass(frozen=True)
class MulInv:
    product: DNumber
    conj_a: DNumber
    quad_a: float
    inverse_a: Optional[DNumber]
    inverse_note: Optional[str] = None


def mul_inv(a: DNumber, b: DNumber, tol: float = 0.0) -> MulInv:
    inv = a.inverse(tol)
    return MulInv(a * b, a.conj(), a.quad(), inv,
                  None if inv is not None else NULL_NOT_INVERTIBLE)


def dexp(z: DNumber) -> DNumber:
    """exp(x + tau y) = e^x (cosh y + tau sinh y)."""
    s = math.exp(z.re)
    return DNumber(s * math.cosh(z.im), s * math.sinh(z.im))


def dlog(z: DNumber) -> Optional[DNumber]:
    if classify(z) != "D+":
        return None
    return DNumber.from_null(math.log(z.u), math.log(z.v))


def polar(z: DNumber) -> Optional[tuple]:
    """(rho, theta) with z = rho * exp(tau*theta); only on D+."""
    if classify(z) != "D+":
        return None
    u, v = z.u, z.v
    return math.sqrt(u * v), 0.5 * math.log(v / u)


def from_polar(rho: float, theta: float) -> DNumber:
    return DNumber(rho * math.cosh(theta), rho * math.sinh(theta))


@dataclass(frozen=True)
class ExpLogPolar:
    exp_z: DNumber
    log_z: Optional[DNumber]
    polar: Optional[tuple]
    component: str


def exp_log_polar(z: DNumber) -> ExpLogPolar:
    return ExpLogPolar(dexp(z), dlog(z), polar(z), classify(z))


def null_convert(z: DNumber) -> tuple:
    return z.u, z.v


def from_null(u: float, v: float) -> DNumber:
    return DNumber.from_null(u, v)
