import numpy as np
import pytest

from splitslag import deform
from splitslag.deform import VariationData
from splitslag.potential import ScalarField, quadratic, radial_solution

BOX = deform.DEFAULT_BOX


def test_star_sign_calibration():
    assert deform.calibrate_star_sign() == deform.STAR_SIGN


def test_flat_harmonic_variation():
    g = quadratic(np.eye(2), BOX)
    gd = ScalarField.from_expr("x1^2 - x2^2", 2, box=BOX)
    r = deform.variation_harmonicity(VariationData(g, gd, nodes=21))
    for v in r.residuals().values():
        assert v < 1e-10


def test_linear_variation_on_radial_base():
    rows = deform.refinement_table(radial_solution(1.0), ScalarField.from_expr("0.7*x1 - 0.3*x2", 2))
    assert rows[0]["first_order_residual"] < 1e-9
    assert rows[0]["d_theta_residual"] < 1e-9
    assert 3.0 <= rows[1]["d_star_theta_ratio"] <= 5.0
    assert 3.0 <= rows[1]["star_relation_ratio"] <= 5.0


def test_non_harmonic_variation_detected():
    rows = deform.refinement_table(radial_solution(1.0), ScalarField.from_expr("x1^2 + x2^2", 2))
    for row in rows:
        assert row["first_order_residual"] > 1.0
        assert row["d_star_theta_residual"] > 0.1
    # the divergence does not refine away
    assert rows[1]["d_star_theta_ratio"] < 1.5


def test_wrong_star_sign_fails():
    g = quadratic(np.eye(2), BOX)
    gd = ScalarField.from_expr("x1^2 - x2^2", 2, box=BOX)
    r = deform.variation_harmonicity(VariationData(g, gd, nodes=21), star_sign=-deform.STAR_SIGN)
    assert r.star_relation_residual > 0.1


def test_bad_base_rejected():
    gd = ScalarField.from_expr("x1", 2)
    with pytest.raises(ValueError, match="det Hess g = 1"):
        deform.variation_harmonicity(VariationData(quadratic(np.diag([3.0, 1.0]), BOX), gd, nodes=11))
    with pytest.raises(ValueError, match="degenerate"):
        deform.variation_harmonicity(VariationData(quadratic(np.diag([-1.0, -1.0]), BOX), gd, nodes=11))


def test_flat_plane_phase():
    # e1 and T e2: signature (1, 1)
    A = np.array([[1, 0], [0, 0], [0, 0], [0, 1]], float)
    r = deform.phase_gradient_check(deform.flat_plane(A), q=1)
    assert r.max == 0.0
    assert r.flags["constant_phase"] and r.flags["minimal"]


def test_time_like_line_product():
    # straight time-like line T e1 times the space-like x2 axis
    A = np.array([[0, 0], [0, 1], [1, 0], [0, 0]], float)
    r = deform.phase_gradient_check(deform.flat_plane(A), q=1)
    assert r.flags["constant_phase"] and r.flags["minimal"] and r.max == 0.0


def test_hyperbola_product_refinement():
    res = []
    for h in (0.1, 0.05):
        r = deform.phase_gradient_check(deform.hyperbola_product(h), q=1)
        assert not r.flags["constant_phase"] and not r.flags["minimal"]
        assert r.flags["phase_minimal_agree"]
        theta = np.asarray(r.series["theta"])
        t = r.points[:, 0]
        ok = np.isfinite(theta)
        assert np.allclose(theta[ok] - t[ok], theta[ok][0] - t[ok][0], atol=1e-12)
        res.append(r.max)
    assert res[1] <= 0.1 * 0.05 and 3.0 <= res[0] / res[1] <= 5.0


def test_signature_change_rejected():
    # the hyperbola through t = 0 glued to a curve whose tangent turns null
    def mapping(S):
        t, s = S[:, 0], S[:, 1]
        return np.stack([t, s, 0.5 * t ** 2, np.zeros_like(t)], axis=1)

    ax = np.linspace(-2, 2, 21)
    with pytest.raises(ValueError, match="signature"):
        deform.phase_gradient_check(deform.SurfaceJet([ax, ax], mapping))
