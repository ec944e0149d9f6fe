import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitslag.potential import (GridField, ScalarField, annulus_points, eds_report,
                                 im_det_null, ma_residual_null, null_field_from_x,
                                 null_potential_from_x, odd_sigma_sum, parse_expression,
                                 quadratic, radial_solution, slag_residual_x,
                                 surface_from_potential, volume_and_calibrated_integral,
                                 volume_experiment)
from splitslag.potential.appc import appc_residual, twisted_normal_param, twisted_phi
from splitslag.potential.surfaces import ANNULUS_BUMP


def sym(rng, n, scale=1.0):
    A = rng.normal(size=(n, n)) * scale
    return 0.5 * (A + A.T)


# -- expressions ------------------------------------------------------------

def test_expression_grammar():
    f = ScalarField.from_expr("x1^2 + sin(x2) - E*u1", 2)
    P = np.array([[0.5, 0.25]])
    assert np.isclose(f(P)[0], 0.25 + np.sin(0.25) - np.e * 0.5)
    assert np.allclose(f.grad(P), [[1 - np.e, np.cos(0.25)]])
    assert np.allclose(f.hess(P), [[[2, 0], [0, -np.sin(0.25)]]])


@pytest.mark.parametrize("bad", ["__import__('os')", "x3 + 1", "open(x1)", "x1; x2", "x1 == 2"])
def test_expression_rejects(bad):
    with pytest.raises(ValueError):
        parse_expression(bad, 2)


def test_fd_matches_analytic(rng):
    f = ScalarField.from_expr("exp(x1)*cos(x2) + x1^3*x2", 2)
    g = ScalarField(2, f.value, box=[(-1, 1)] * 2)
    P = rng.uniform(-0.5, 0.5, size=(10, 2))
    assert np.abs(g.hess(P) - f.hess(P)).max() < 1e-5
    assert np.abs(g.grad(P) - f.grad(P)).max() < 1e-8


def test_grid_field_matches_analytic():
    f = ScalarField.from_expr("x1^3 + x1*x2^2", 2)
    G = GridField.sample(f, [(0, 1), (0, 1)], (41, 41))
    ok = G.interior_mask()
    H = G.hess()[ok]
    assert np.abs(H - f.hess(G.nodes()[ok])).max() < 1e-10  # cubic: exact up to roundoff


# -- x-picture residual -------------------------------------------------------

def test_slag_residual_quadratic():
    f = quadratic(np.diag([0.5, -0.5]), box=[(-1, 1)] * 2)
    r = slag_residual_x(f, [[0.0, 0.0], [0.3, -0.2]])
    assert r.max == 0.0
    assert np.allclose(r.series["margin"], 0.5)
    assert r.flags["slag"]


def test_n3_identity(rng):
    for _ in range(50):
        H = sym(rng, 3)
        assert abs(im_det_null(H) - (np.trace(H) + np.linalg.det(H))) < 1e-12


def test_dual_routes(rng):
    for n in range(1, 7):
        for _ in range(20):
            H = sym(rng, n)
            a, b = im_det_null(H), odd_sigma_sum(H)
            assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


def test_boundary_exclusion():
    f = ScalarField.from_expr("x1^2*x2", 2, box=[(0, 1), (0, 1)])
    f = ScalarField(2, f.value, box=[(0, 1), (0, 1)])  # finite differences only
    r = slag_residual_x(f, [[0.5, 0.5], [0.0, 0.5], [1.0, 1.0]])
    assert r.excluded == 2


# -- null picture -------------------------------------------------------------

def test_ma_examples():
    g = quadratic(np.eye(2), box=[(-1, 1)] * 2)
    r = ma_residual_null(g, pts=[[0.1, 0.2]])
    assert r.max == 0 and r.flags["convex"]
    g = quadratic(np.diag([3.0, 1.0]), box=[(-1, 1)] * 2)
    r = ma_residual_null(g, pts=np.zeros((3, 2)))
    assert np.allclose(r.values, 2.0)


def test_radial_solution():
    g = radial_solution(1.0)
    assert np.isclose(g.grad(np.array([[1.0, 0.0]]))[0, 0], np.sqrt(2))
    P = annulus_points(0.5, 1.5, 50, 50)
    r = ma_residual_null(g, pts=P)
    assert r.max <= 1e-10 and r.flags["convex"]
    big = radial_solution(100.0)
    r = ma_residual_null(big, pts=P)
    assert r.max <= 1e-10
    # radial eigenvalue r/sqrt(r^2 + c) and angular sqrt(r^2 + c)/r
    r_ = np.hypot(P[:, 0], P[:, 1])
    s_ = np.sqrt(r_ ** 2 + 100.0)
    ev = np.linalg.eigvalsh(big.hess(P))
    assert np.allclose(ev[:, 0], r_ / s_) and np.allclose(ev[:, 1], s_ / r_)


def test_radial_rejects_origin():
    with pytest.raises(ValueError):
        radial_solution(1.0, r_min=0.0)
    with pytest.raises(ValueError):
        radial_solution(-1.0)


def test_null_potential_examples():
    zero = quadratic(np.zeros((2, 2)))
    r = null_potential_from_x(zero, [[0.3, -0.4]])
    assert np.allclose(r.u, r.v) and np.isclose(r.g_value[0], 0.125)
    f = quadratic(0.5 * np.eye(2))  # f = |x|^2/4
    x = np.array([[0.4, 0.2]])
    r = null_potential_from_x(f, x)
    assert np.allclose(r.v, 3 * r.u)
    assert np.isclose(r.g_value[0], 1.5 * np.sum(r.u ** 2))
    assert r.g_gradient_check < 1e-8


def test_null_potential_spacelike_violation():
    f = quadratic(1.2 * np.eye(2))
    with pytest.raises(ValueError, match="margin"):
        null_potential_from_x(f, [[0.0, 0.0]])


def test_null_gradient_converges():
    f = ScalarField.from_expr("0.2*x1^2 - 0.1*x2^2 + 0.05*x1^3 + 0.03*x1*x2^2", 2)
    x = np.array([[0.2, -0.1], [-0.1, 0.3]])
    errs = [null_potential_from_x(f, x, h=h).g_gradient_check for h in (1e-2, 5e-3)]
    assert errs[1] < errs[0] / 3


def test_cayley_consistency():
    f = ScalarField.from_expr("0.3*x1^2 - 0.2*x1*x2 + 0.1*x2^3", 2, box=[(-0.5, 0.5)] * 2)
    X = np.array([[0.1, 0.2], [-0.3, 0.1], [0.0, -0.4]])
    xs = surface_from_potential(f, "x").mapping(X)
    np_ = null_potential_from_x(f, X)
    g = null_field_from_x(f)
    ns = surface_from_potential(g, "null", axes=[np.zeros(1)] * 2).mapping(np_.u)
    assert np.abs(xs - ns).max() < 1e-9


# -- surfaces -----------------------------------------------------------------

def test_radial_surface_is_slag():
    s = surface_from_potential(radial_solution(1.0), "null", nodes=41)
    r = eds_report(s)
    assert r.flags["slag"] and r.max <= 1e-9
    assert r.excluded > 0  # the box corners and the hole


def test_plane_potential_surface():
    f = ScalarField.from_expr("0.3*x1 - 0.7*x2", 2, box=[(0, 1)] * 2)
    r = eds_report(surface_from_potential(f, "x", nodes=9))
    assert r.max == 0 and r.series_max("omega") == 0 and r.flags["slag"]


def test_im_dz_residual_where_equation_fails():
    # Im det_D(I + tau Hess f) = tr + det in n = 3; nonzero only away from x1 = 0
    f = ScalarField.from_expr("0.1*x1^3 + 0.2*x2^2 - 0.2*x3^2", 3, box=[(-0.5, 0.5)] * 3)
    P = np.array([[0.0, 0.1, 0.2], [0.4, 0.1, 0.2]])
    x = slag_residual_x(f, P)
    s = surface_from_potential(f, "x", axes=[np.zeros(1)] * 3)
    e = eds_report(s, params=P)
    assert abs(x.values[0]) < 1e-14 and abs(e.values[0]) < 1e-14
    assert abs(x.values[1]) > 0.1 and abs(e.values[1]) > 0.05


def test_unit_square_volume():
    f = quadratic(np.zeros((2, 2)), box=[(0, 1), (0, 1)])
    out = volume_and_calibrated_integral(surface_from_potential(f, "x", nodes=11))
    assert abs(out["vol"] - 1) < 1e-14 and abs(out["re_dz_integral"] - 1) < 1e-14


def test_volume_experiment_square():
    g = quadratic(np.eye(2), box=[(0, 1), (0, 1)])
    eta = ScalarField.from_expr("(x1*(1 - x1)*x2*(1 - x2))^2", 2, box=[(0, 1), (0, 1)])
    rows = volume_experiment(g, eta, [0.0, 0.025, 0.05, 0.1], nodes=101)
    assert abs(rows[0]["deficit"]) < 1e-12
    ratios = [r["deficit_over_eps2"] for r in rows[1:]]
    for r in rows[1:]:
        assert r["deficit"] > 0 and abs(r["oracle_gap"]) < 1e-9 and abs(r["stokes_gap"]) < 1e-9
    assert (max(ratios) - min(ratios)) / min(ratios) < 0.2


def test_volume_experiment_annulus():
    g = radial_solution(1.0)
    eta = ScalarField.from_expr(ANNULUS_BUMP, 2)
    rows = volume_experiment(g, eta, [0.1], nodes=101, annulus=(0.5, 1.5))
    assert abs(rows[0]["vol_M"] - 2 * np.pi) < 1e-8
    assert rows[0]["deficit"] > 0 and rows[0]["nonnegative"]


def test_volume_experiment_flags_convexity_loss():
    g = quadratic(np.eye(2), box=[(0, 1), (0, 1)])
    eta = ScalarField.from_expr("-(x1*(1 - x1)*x2*(1 - x2))", 2, box=[(0, 1), (0, 1)])
    rows = volume_experiment(g, eta, [100.0], nodes=21)
    assert rows[0]["flagged"]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-0.9, 0.9), min_size=4, max_size=4))
def test_mealy_pointwise_am_gm(v):
    J = np.eye(2) + np.reshape(v, (2, 2)) * 0.5
    S = 0.5 * (J + J.T)
    if np.linalg.eigvalsh(S)[0] > 0:
        assert 0.5 * (1 + np.linalg.det(J)) >= np.sqrt(np.linalg.det(S)) - 1e-12


# -- degenerate projections -------------------------------------------------

def test_appc_examples():
    pts = np.random.default_rng(1).uniform(-1, 1, size=(100, 3))
    u0 = ScalarField.from_expr("0", 2)
    h = ScalarField.from_expr("x1^2 - x2^2", 2)
    assert appc_residual(u0, h, pts).max < 1e-12
    a = 0.5
    u = ScalarField.from_expr(f"{a}*x1", 2)
    h = ScalarField.from_expr(f"x1^2 - x2^2/{1 - a * a}", 2)
    assert appc_residual(u, h, pts).max < 1e-12


def test_appc_decomposition_random():
    pts = np.random.default_rng(2).uniform(-1, 1, size=(100, 3))
    u = ScalarField.from_expr("0.3*sin(x1) + 0.2*x1*x2", 2)
    h = ScalarField.from_expr("exp(0.5*x1)*cos(x2) + x1^3", 2)
    r = appc_residual(u, h, pts)
    assert r.flags["decomposition_ok"]
    assert r.series["gap"].max() < 1e-9


def test_twisted_normal_matches_x_residual():
    u = ScalarField.from_expr("0.5*x1", 2)
    h = ScalarField.from_expr("x1^2 - x2^2/0.75", 2)
    axes = [np.linspace(-0.3, 0.3, 5)] * 3
    s = twisted_normal_param(u, h, 2, 3, axes)
    r = eds_report(s, tol=1e-9)
    assert r.series_max("omega") < 1e-12 and r.max < 1e-12
    phi = twisted_phi(u, h, 2, 3)
    x = slag_residual_x(phi, s.params())
    assert x.max < 1e-12
