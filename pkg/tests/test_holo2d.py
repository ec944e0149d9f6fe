import numpy as np
import pytest

from splitslag import holo2d, planes
from splitslag.holo2d import ComplexCurveParam


def test_form_identity_exact():
    r = holo2d.coord_map_and_form_identity()
    assert r.identity_residual == 0.0 and r.involution_residual == 0.0


def test_round_trip_coordinates(rng):
    X = rng.normal(size=(10, 4))
    z1, z2 = holo2d.to_complex(X)
    assert np.allclose(z1, X[:, 0] - 1j * X[:, 1])
    assert np.allclose(z2, X[:, 2] + 1j * X[:, 3])
    assert np.allclose(holo2d.from_complex(z1, z2), X)


@pytest.mark.parametrize("ab,slag", [((0.3, 0.4), True), ((0.0, 0.0), True), ((1.0, 0.0), False)])
def test_plane_correspondence_examples(ab, slag):
    r = holo2d.plane_correspondence(*ab)
    assert r.slag == slag == r.graph_slag
    assert r.line_residual < 1e-15


def test_plane_correspondence_lattice():
    grid = np.linspace(-1.4, 1.4, 8)
    for a in grid:
        for b in grid:
            r = holo2d.plane_correspondence(a, b)
            assert r.slag == r.graph_slag


def test_constant_second_coordinate():
    c = ComplexCurveParam([0, 1], [0.5 + 0.2j], radius=1.0, n=11)
    _, rep = holo2d.curve_to_surface(c)
    assert rep.max == 0 and rep.series_max("omega") == 0
    assert rep.flags["unconstrained_slag"] and rep.flags["forty_five_rule"]


def test_quarter_square_curve():
    c = ComplexCurveParam([0, 1], [0, 0, 0.25], radius=1.0, n=41)
    _, rep = holo2d.curve_to_surface(c)
    assert rep.max <= 1e-12 and rep.series_max("omega") <= 1e-12
    assert rep.flags["margin_sign_agrees"]
    inside = np.hypot(rep.points[:, 0], rep.points[:, 1]) < 1 - 1e-9
    m45 = np.asarray(rep.series["margin45"])
    assert np.all(m45[inside & np.isfinite(m45)] > 0)


def test_square_curve_changes_type_at_half():
    c = ComplexCurveParam([0, 1], [0, 0, 1], radius=1.0, n=41)
    _, rep = holo2d.curve_to_surface(c)
    assert rep.flags["unconstrained_slag"] and rep.flags["margin_sign_agrees"]
    r = np.hypot(rep.points[:, 0], rep.points[:, 1])
    margin = np.asarray(rep.series["margin"])
    ok = np.isfinite(margin) & (np.abs(r - 0.5) > 1e-6)
    assert np.all((margin[ok] > 0) == (r[ok] < 0.5))


def test_branch_point_limiting_margin():
    c = ComplexCurveParam([0, 0, 1], [0, 0, 0, 1], radius=1.0, n=21)
    _, rep = holo2d.curve_to_surface(c)
    bp = rep.notes["branch_points"]
    assert len(bp) == 1 and bp[0]["zeta"] == [0.0, 0.0]
    assert bp[0]["limiting_margin"] == 1.0
    assert holo2d.limiting_margin(ComplexCurveParam([0, 0, 0, 1], [0, 0, 2]), 0j) == -np.inf
    assert holo2d.limiting_margin(ComplexCurveParam([0, 0, 2], [0, 0, 1]), 0j) == 0.5


def test_callable_curve_and_rejection():
    ok = ComplexCurveParam(f1=lambda z: z, df1=lambda z: np.ones_like(z),
                           f2=lambda z: 0.3 * np.exp(z), df2=lambda z: 0.3 * np.exp(z),
                           radius=0.5, n=11)
    _, rep = holo2d.curve_to_surface(ok)
    assert rep.max <= 1e-12 and rep.flags["margin_sign_agrees"]
    bad = ComplexCurveParam(f1=lambda z: z, df1=lambda z: np.ones_like(z),
                            f2=lambda z: np.conj(z), df2=lambda z: np.ones_like(z), n=5)
    with pytest.raises(ValueError, match="Cauchy-Riemann"):
        holo2d.curve_to_surface(bad)


def test_form_transport_random_polynomial(rng):
    c1 = rng.normal(size=4) + 1j * rng.normal(size=4)
    c2 = rng.normal(size=4) + 1j * rng.normal(size=4)
    _, rep = holo2d.curve_to_surface(ComplexCurveParam(c1, c2, radius=0.8, n=15))
    assert rep.max <= 1e-12 and rep.series_max("omega") <= 1e-12
    assert rep.flags["margin_sign_agrees"]
