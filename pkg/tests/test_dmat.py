import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitslag.dmat import (DMatrix, adjugate_inverse, det_d, det_d_leibniz, from_gl,
                            is_special_unitary, is_unitary, unitary_report)
from splitslag.dnum import DNumber, TAU

EXAMPLE = DMatrix.from_null([[1, 2], [3, 4]], [[0, 1], [-1, 0]])


def test_det_example():
    d = det_d(EXAMPLE)
    assert d.isclose(DNumber(-0.5, 1.5), 1e-14)
    assert abs(d.quad() + 2) < 1e-13
    assert abs(np.linalg.det(EXAMPLE.realify()) - d.quad()) < 1e-12
    assert det_d(DMatrix.identity(3)) == DNumber(1, 0)


def test_det_routes_agree(rng):
    for n in range(1, 5):
        A = DMatrix(rng.normal(size=(n, n)), rng.normal(size=(n, n)))
        assert det_d(A).isclose(det_d_leibniz(A), 1e-10)


def test_from_gl_example():
    A = from_gl(np.diag([2.0, 1.0]))
    assert is_unitary(A, 1e-12)
    d = det_d(A)
    assert d.isclose(DNumber(1.25, -0.75), 1e-14)
    assert abs(d.quad() - 1) < 1e-14


def test_from_gl_sl_member_is_special(rng):
    B = rng.normal(size=(3, 3))
    if np.linalg.det(B) < 0:
        B[:, 0] *= -1
    B /= np.linalg.det(B) ** (1 / 3)
    assert is_special_unitary(from_gl(B), 1e-10)


def test_from_gl_singular():
    with pytest.raises(ValueError, match="not invertible"):
        from_gl([[1.0, 2.0], [2.0, 4.0]])


def test_tau_identity_not_special():
    assert is_unitary(DMatrix.identity(2))
    r = unitary_report(DMatrix.scalar(TAU, 1))
    assert not r.is_special_unitary
    assert r.det == TAU


def test_adjugate_inverse():
    r = adjugate_inverse(DMatrix.identity(2))
    assert r.inverse.allclose(DMatrix.identity(2))
    r = adjugate_inverse(EXAMPLE)
    assert (EXAMPLE @ r.inverse).allclose(DMatrix.identity(2), 1e-12)
    prod = EXAMPLE @ r.cofactor.T
    assert prod.allclose(DMatrix.scalar(r.det, 2), 1e-12)
    sing = DMatrix.from_null([[1, 2], [3, 4]], np.zeros((2, 2)))
    r = adjugate_inverse(sing)
    assert r.inverse is None and r.inverse_note == "det_D null"


mats = st.integers(1, 4).flatmap(
    lambda n: st.tuples(*(st.lists(st.floats(-3, 3), min_size=n * n, max_size=n * n) for _ in range(4)))
    .map(lambda t: tuple(np.reshape(x, (n, n)) for x in t)))


@settings(max_examples=60)
@given(mats)
def test_det_is_multiplicative(parts):
    a = DMatrix(parts[0], parts[1])
    b = DMatrix(parts[2], parts[3])
    lhs = det_d(a @ b)
    rhs = det_d(a) * det_d(b)
    scale = max(1.0, abs(rhs.re) + abs(rhs.im))
    assert lhs.isclose(rhs, 1e-9 * scale)


@settings(max_examples=60)
@given(mats)
def test_realification_determinant(parts):
    a = DMatrix(parts[0], parts[1])
    q = det_d(a).quad()
    assert abs(np.linalg.det(a.realify()) - q) <= 1e-8 * max(1.0, abs(q))
