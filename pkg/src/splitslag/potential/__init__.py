"""Potentials, PDE residuals, graph surfaces and volume experiments."""
from .fields import GridField, ScalarField, parse_expression, quadratic
from .residuals import (NullPotential, annulus_points, im_det_null, ma_residual_null,
                        null_field_from_x, null_potential_from_x, odd_sigma_sum,
                        radial_solution, slag_residual_x)
from .surfaces import (ImmersedSurface, eds_report, polar_graph_surface, surface_from_potential,
                       volume_and_calibrated_integral, volume_experiment)
from .appc import appc_residual, twisted_normal_param
from .pogorelov import pogorelov_fixture

__all__ = [
    "GridField", "ScalarField", "parse_expression", "quadratic",
    "NullPotential", "annulus_points", "im_det_null", "ma_residual_null", "null_field_from_x",
    "null_potential_from_x", "odd_sigma_sum", "radial_solution", "slag_residual_x",
    "ImmersedSurface", "eds_report", "polar_graph_surface", "surface_from_potential",
    "volume_and_calibrated_integral", "volume_experiment",
    "appc_residual", "twisted_normal_param", "pogorelov_fixture",
]
