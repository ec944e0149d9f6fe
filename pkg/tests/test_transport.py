import numpy as np
import pytest
from scipy.stats import norm

from splitslag import transport
from splitslag.potential import ScalarField, annulus_points, ma_residual_null, quadratic, radial_solution
from splitslag.transport import Density1D


def test_uniform_to_uniform_exact():
    p = transport.ot_1d(Density1D.uniform(0, 1), Density1D.uniform(0, 2))
    assert np.abs(p.T - 2 * p.u).max() <= 1e-10
    assert np.abs(p.g - p.u ** 2).max() <= 1e-10
    assert np.abs(p.residual).max() <= 1e-10
    assert p.checks["monotone"] and p.checks["convex"]


def test_identity_map():
    d = Density1D.from_callable(lambda x: 1 + 0.5 * np.sin(3 * x), 0, 2, k=10)
    p = transport.ot_1d(d, d)
    assert np.abs(p.T - p.u).max() < 1e-9
    assert np.abs(p.g - 0.5 * p.u ** 2).max() < 1e-9


def test_normal_to_shifted_normal():
    m, s = 0.5, 1.5
    rho = Density1D.from_callable(norm.pdf, -4, 4, k=12)
    tgt = Density1D.from_callable(lambda x: norm.pdf(x, m, s), m - 4 * s, m + 4 * s, k=12)
    p = transport.ot_1d(rho, tgt)
    assert np.abs(p.T - (m + s * p.u)).max() <= 1e-4
    # change of variables rho = rho~(T) T'
    assert np.abs(p.pushforward_residual[1:-1]).max() < 1e-4


def test_residual_is_second_order():
    rho = lambda x: 1 + 0.5 * x  # noqa: E731
    tgt = lambda x: np.exp(-x)  # noqa: E731
    errs = []
    for k in (7, 8):
        p = transport.ot_1d(Density1D.from_callable(rho, 0, 1, k), Density1D.from_callable(tgt, 0, 3, k))
        inner = (p.u >= 0.1) & (p.u <= 0.9)
        errs.append(np.abs(p.residual[inner]).max())
    assert 3 < errs[0] / errs[1] < 5


def test_density_must_be_positive():
    with pytest.raises(ValueError, match="positive"):
        Density1D(np.linspace(0, 1, 5), [1, 1, 0, 1, 1])


def test_discrete_examples():
    p = transport.ot_discrete([[0, 0], [1, 0]], [[0, 1], [2, 1]])
    assert list(p.perm) == [0, 1] and p.total_cost == 3.0
    assert p.checks["cyclically_monotone"]
    pts = np.random.default_rng(0).normal(size=(6, 2))
    p = transport.ot_discrete(pts, pts)
    assert list(p.perm) == list(range(6)) and p.total_cost == 0.0
    with pytest.raises(ValueError, match="differ"):
        transport.ot_discrete(pts, pts[:5])


@pytest.mark.parametrize("seed", range(10))
def test_discrete_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    dim = int(rng.integers(1, 3))
    mu, nu = rng.normal(size=(n, dim)), rng.normal(size=(n, dim))
    p = transport.ot_discrete(mu, nu)
    _, best = transport.brute_force_assignment(mu, nu)
    assert abs(p.total_cost - best) < 1e-9
    if dim == 1:
        assert p.checks["matches_sorted"]


def test_discrete_converges_to_continuous_map():
    errs = []
    for n in (16, 64, 256):
        rng = np.random.default_rng(n)
        mu = rng.permutation((np.arange(n) + 0.5) / n)
        nu = rng.permutation(2 * (np.arange(n) + 0.5) / n)
        p = transport.ot_discrete(mu, nu)
        errs.append(np.abs(nu[p.perm] - 2 * mu).max())
    assert errs[-1] < 1e-12  # quantile atoms map exactly


def test_cost_checks():
    rng = np.random.default_rng(3)
    U, V = rng.normal(size=(5, 2)), rng.normal(size=(5, 2))
    q = transport.kahler_cost_check(transport.quadratic_cost(2), U, V)
    assert q["cross_hessian_ok"] and q["twist_ok"] and abs(q["min_abs_det"] - 1) < 1e-12
    b = transport.kahler_cost_check(transport.bilinear_cost(2), U, V)
    assert b["cross_hessian_ok"]
    sep = transport.CostFunction(2, lambda U, V: np.sum(U ** 2, axis=1) + np.sum(np.sin(V), axis=1))
    s = transport.kahler_cost_check(sep, U, V)
    assert not s["cross_hessian_ok"] and not s["twist_ok"]


def test_kmw_radial():
    g = radial_solution(1.0)
    P = annulus_points(0.5, 1.5, 20, 20)
    one = lambda X: np.ones(X.shape[0])  # noqa: E731
    r = transport.kmw_check(g, one, one, P)
    assert r.max <= 1e-9 and r.flags["lagrangian"] and r.flags["convex"]
    assert r.flags["oracle_agrees"]


def test_kmw_one_dimensional():
    g = quadratic([[2.0]], box=[(0, 1)])
    r = transport.kmw_check(g, lambda X: np.ones(X.shape[0]), lambda Y: 0.5 * np.ones(Y.shape[0]),
                            np.linspace(0.1, 0.9, 9)[:, None])
    assert r.max == 0.0 and r.flags["oracle_agrees"]


def test_kmw_perturbed_matches_ma_residual():
    g = radial_solution(1.0) + ScalarField.from_expr("0.1*x1^3", 2)
    P = annulus_points(0.6, 1.4, 10, 12)
    one = lambda X: np.ones(X.shape[0])  # noqa: E731
    r = transport.kmw_check(g, one, one, P)
    ma = ma_residual_null(g, pts=P)
    assert r.max > 1e-3
    assert np.allclose(2 * r.values, ma.values, atol=1e-12)
    # residual vanishes where u1 = 0 (third derivative term is 0.6 u1)
    on_axis = np.abs(P[:, 0]) < 1e-12
    assert np.abs(r.values[on_axis]).max() < 1e-12
