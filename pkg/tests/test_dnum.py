import math

import pytest
from hypothesis import given, strategies as st

from splitslag.dnum import (DNumber, E, EBAR, NULL_NOT_INVERTIBLE, TAU, classify, dexp,
                            dlog, exp_log_polar, from_null, from_polar, mul_inv,
                            null_convert, polar)

reals = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
dnums = st.builds(DNumber, reals, reals)


def test_product_and_inverse():
    r = mul_inv(DNumber(2, 1), DNumber(3, 2))
    assert r.product == DNumber(8, 7)
    assert r.quad_a == 3
    assert r.conj_a == DNumber(2, -1)
    assert r.inverse_a.isclose(DNumber(2 / 3, -1 / 3), 1e-15)


def test_null_element_has_no_inverse():
    r = mul_inv(DNumber(1, 1), DNumber(1))
    assert r.inverse_a is None
    assert r.inverse_note == NULL_NOT_INVERTIBLE
    with pytest.raises(ZeroDivisionError, match="null"):
        DNumber(1) / DNumber(1, 1)


def test_tau_squared_and_idempotents():
    assert TAU * TAU == DNumber(1, 0)
    assert E * E == E and EBAR * EBAR == EBAR
    assert E * EBAR == DNumber(0, 0)
    assert TAU * E == -E


def test_exp_log_polar_examples():
    z = dexp(DNumber(0, 1))
    assert abs(z.re - math.cosh(1)) < 1e-15 and abs(z.im - math.sinh(1)) < 1e-15
    assert dexp(DNumber(0)) == DNumber(1)
    assert dlog(DNumber(1)) == DNumber(0, 0)
    assert polar(DNumber(1)) == (1.0, 0.0)
    rho, th = polar(DNumber(8, 7))
    assert abs(rho - math.sqrt(15)) < 1e-12
    assert abs(th - 0.5 * math.log(15)) < 1e-12
    assert from_polar(rho, th).isclose(DNumber(8, 7), 1e-12)


def test_log_outside_positive_cone_is_tagged():
    r = exp_log_polar(DNumber(-2, 1))
    assert r.log_z is None and r.polar is None
    assert r.component == "-D+"
    assert classify(TAU) == "tauD+"
    assert classify(-TAU) == "-tauD+"
    assert classify(DNumber(1, 1)) == "null"


def test_null_coordinates():
    assert null_convert(DNumber(3, 1)) == (2, 4)
    assert null_convert(DNumber(1)) == (1, 1)
    assert null_convert(TAU) == (-1, 1)
    assert null_convert(DNumber(8, 7)) == (1, 15)
    assert from_null(1, 15) == DNumber(8, 7)


@given(dnums, dnums)
def test_quad_is_multiplicative(a, b):
    lhs = (a * b).quad()
    rhs = a.quad() * b.quad()
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(a.u * b.u * a.v * b.v), abs(rhs))


@given(dnums, dnums, dnums)
def test_ring_laws(a, b, c):
    assert a * b == b * a
    scale = max(1.0, abs(a.re) + abs(a.im)) * max(1.0, abs(b.re) + abs(b.im)) * max(1.0, abs(c.re) + abs(c.im))
    assert ((a * b) * c).isclose(a * (b * c), 1e-12 * scale)


@given(reals, reals)
def test_null_round_trip(x, y):
    z = DNumber(x, y)
    assert from_null(*null_convert(z)).isclose(z, 1e-12 * max(1.0, abs(x) + abs(y)))


@given(st.floats(0.01, 50), st.floats(0.01, 50))
def test_log_inverts_exp_on_positive_cone(u, v):
    z = from_null(u, v)
    assert dexp(dlog(z)).isclose(z, 1e-12 * max(u, v))
    rho, th = polar(z)
    assert from_polar(rho, th).isclose(z, 1e-12 * max(u, v))


@given(dnums)
def test_inverse_when_non_null(a):
    inv = a.inverse(1e-6)
    if inv is not None:
        # error scales with the conditioning max|u|,|v| / min
        cond = max(abs(a.u), abs(a.v)) / min(abs(a.u), abs(a.v))
        assert (a * inv).isclose(DNumber(1), 1e-12 * max(1.0, cond))
