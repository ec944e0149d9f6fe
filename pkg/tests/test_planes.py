import math

import numpy as np
import pytest

from splitslag import forms, planes
from splitslag.dmat import det_d, from_gl
from splitslag.planes import GraphMatrix

SINH = 0.75
COSH = math.sqrt(1 + SINH ** 2)


def tilted():
    # e1 and cosh(t) e2 + sinh(t) T e1, with T e1 the y1 axis
    return np.array([[1, 0], [0, COSH], [0, SINH], [0, 0]], float)


def standard(n):
    return np.vstack([np.eye(n), np.zeros((n, n))])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_standard_plane(n):
    r = planes.analyze_plane(standard(n))
    assert r.spacelike and r.positive_component and r.lagrangian and r.slag
    assert r.dz.isclose(1.0, 1e-15)
    if n <= 3:
        assert r.dz_route_gap <= 1e-15


def test_tilted_plane():
    r = planes.analyze_plane(tilted())
    assert r.spacelike and not r.lagrangian and not r.slag
    assert abs(r.dz.re - 1.25) < 1e-14 and abs(r.dz.im) < 1e-14
    c = planes.canonical_angles(tilted())
    assert abs(c.lambdas[0] - 0.75) < 1e-12
    assert abs(c.angles[0] - math.asinh(0.75)) < 1e-12
    assert max(c.reconstruction_residuals()) < 1e-8


def test_degenerate_plane():
    # a null line: x1 + y1 direction together with x2
    P = np.array([[1, 0], [0, 1], [1, 0], [0, 0]], float)
    r = planes.analyze_plane(P)
    assert r.degenerate and r.slag is None


def test_dz_routes_agree_on_random_frames(rng):
    worst = 0.0
    for _ in range(100):
        n = rng.integers(1, 4)
        P = rng.normal(size=(2 * n, n))
        a = planes.dz_of(P)
        b = forms.eval_dz_oracle(P)
        worst = max(worst, abs(a.re - b.re), abs(a.im - b.im))
    assert worst <= 1e-12


def test_canonical_round_trip(rng):
    n = 4
    ang = np.sort(rng.uniform(0, 1.5, size=2))[::-1]
    P = planes.canonical_plane(ang, n)
    U = planes.unitary_with_phase(n, rng, 0.0)
    Q = U.apply_real(P)
    c = planes.canonical_angles(Q)
    assert np.allclose(sorted(c.angles, reverse=True), ang, atol=1e-8)
    assert max(c.reconstruction_residuals()) < 1e-8


def test_graph_x_slag():
    A = np.diag([0.5, -0.5])
    g = planes.graph_tests(GraphMatrix("x", A))
    assert g.slag
    r = planes.analyze_plane(GraphMatrix("x", A).plane())
    assert r.slag and abs(r.dz.im) < 1e-12


def test_graph_null_slag():
    g = planes.graph_tests(GraphMatrix("null", np.diag([2.0, 0.5])))
    assert g.spacelike and g.lagrangian and g.slag
    r = planes.analyze_plane(GraphMatrix("null", np.diag([2.0, 0.5])).plane())
    assert r.slag


def test_graph_x_not_slag():
    g = planes.graph_tests(GraphMatrix("x", 0.9 * np.eye(2)))
    assert g.lagrangian and g.spacelike and not g.slag
    assert abs(g.witnesses["im_det"] - 1.8) < 1e-12


def test_cayley():
    B = planes.cayley_graph(np.diag([0.5, -0.5]))
    assert np.allclose(B, np.diag([3, 1 / 3]), atol=1e-14)
    assert np.allclose(planes.cayley_graph(np.zeros((2, 2))), np.eye(2))
    with pytest.raises(ValueError, match="not expressible"):
        planes.cayley_graph(np.eye(2))


def test_cayley_random(rng):
    for _ in range(20):
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        lam = rng.uniform(-0.95, 0.95, 3)
        A = Q @ np.diag(lam) @ Q.T
        B = planes.cayley_graph(A)
        assert np.allclose(B, B.T, atol=1e-12)
        assert np.allclose(np.sort(np.linalg.eigvalsh(B)), np.sort((1 + lam) / (1 - lam)), atol=1e-10)
        assert np.allclose(planes.cayley_inverse(B), A, atol=1e-12)


def test_phase_mixed_signature():
    P = np.array([[1, 0], [0, 0], [0, 0], [0, 1]], float)  # e1, T e2
    r = planes.phase_pq(P)
    assert r.signature == (1, 1) and r.sign == 1 and abs(r.theta) < 1e-14
    r = planes.phase_pq(standard(3))
    assert r.signature == (3, 0) and r.theta == 0.0


def test_phase_of_rotated_plane():
    s = 0.4
    B = np.diag([math.exp(s), 1.0])
    A = from_gl(B)
    P = A.apply_real(standard(2))
    r = planes.phase_pq(P)
    d = det_d(A)
    assert abs(r.theta - 0.5 * math.log(d.v / d.u)) < 1e-12
    assert abs(abs(r.theta) - s) < 1e-12


def test_phase_null_directions():
    with pytest.raises(ValueError, match="null directions"):
        planes.phase_pq(np.array([[1.0], [1.0]]))


def test_pairing():
    assert abs(planes.pairing_calibration(standard(2), standard(2)) - 1) < 1e-14
    assert abs(planes.pairing_calibration(standard(2), tilted()) - 1.25) < 1e-12
    s = 0.6
    line = np.array([[math.cosh(s)], [math.sinh(s)]])
    assert abs(planes.pairing_calibration(standard(1), line) - math.cosh(s)) < 1e-14


def test_null_decomposition_sums_to_plane():
    for P in (standard(2), tilted(), planes.canonical_plane([0.3], 3)):
        terms = planes.null_decomposition(P)
        n = P.shape[1]
        assert len(terms) == 2 ** n
        total = sum((mv for _, mv in terms[1:]), terms[0][1])
        xi = forms.MultiVector.from_vectors(planes.orthonormalize(P))
        assert np.abs(total.coeffs - xi.coeffs).max() < 1e-12


def test_null_decomposition_too_large():
    with pytest.raises(ValueError, match="too large"):
        planes.null_decomposition(standard(5))


@pytest.mark.parametrize("stratum", ["generic", "lagrangian", "unit_det", "slag"])
def test_sampled_planes_are_spacelike_positive(stratum, rng):
    for _ in range(20):
        P = planes.sample_plane(3, rng, stratum)[0]
        r = planes.analyze_plane(P, lag_tol=1e-8)
        assert r.spacelike and r.positive_component
        assert r.dz.re >= 1 - 1e-9
        if stratum == "slag":
            assert r.slag


def test_mealy_small_and_thread_independent():
    a = planes.mealy_experiment(3, count=1200, seed=3)
    b = planes.mealy_experiment(3, count=1200, seed=3, threads=3)
    assert a.passed and a.n_slag > 0
    assert a.to_json() == b.to_json()
