from __future__ import annotations

import pytest

from relcont.errors import ContractViolation
from relcont.gravity import (
    BoundaryPiece,
    MatchedSpacetime,
    matched_report,
    matched_results,
    star_spacetime,
    total_action,
)
from relcont.geometry import Chart
from relcont.hypersurface import random_graph_surface
from relcont.oracles import random_metric
from relcont.solutions import ConstantDensityStar, minkowski

RANDOM = Chart(name="random", bounds=((-0.5, 1.5),) * 4)


def star_results(constants, **parameters):
    star = ConstantDensityStar(constants, mass=0.2, radius=1.0, **parameters)
    results = matched_results(star_spacetime(star, nodes=4, per_axis=2))
    return {result.name: result for result in results}


def test_matched_star_passes_every_junction_check(constants):
    results = star_results(constants)
    assert set(results) == {"eulerian_el_residual", "einstein_interior_residual", "einstein_exterior_residual",
                            "junction_metric", "junction_curvature", "obrien_synge", "boundary_traction",
                            "junction_implies_traction"}
    for result in results.values():
        assert result.max_residual < result.tolerance, result.name


def test_rescaled_exterior_mass_breaks_the_metric_junction(constants):
    results = star_results(constants, exterior_mass_scale=1.1)
    assert results["junction_metric"].max_residual > 1e-3
    assert results["junction_implies_traction"].max_residual == 0.0
    assert results["junction_implies_traction"].detail.startswith("premise failed")
    assert results["junction_metric"].detail is None
    assert results["einstein_exterior_residual"].max_residual < 1e-6


def test_truncated_star_has_pressure_on_its_boundary(constants):
    results = star_results(constants, boundary_radius_fraction=0.8)
    assert results["boundary_traction"].max_residual > 1e-3


def test_degenerate_region_contributes_no_action(constants):
    region = ((0.0, 0.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0))
    matched = MatchedSpacetime(minkowski(RANDOM), region, constants, nodes=2)
    breakdown = total_action(matched)
    assert breakdown.total == 0.0
    assert breakdown.matter == 0.0


def test_ghy_terms_cancel_across_a_surface_with_the_same_metric(constants):
    metric = random_metric(RANDOM, seed=3)
    surface = random_graph_surface(metric, seed=3, nodes=3)
    region = ((0.0, 0.0),) + RANDOM.bounds[1:]
    matched = MatchedSpacetime(metric, region, constants, boundary=[BoundaryPiece(surface, metric, False)], nodes=3)
    breakdown = total_action(matched)
    assert breakdown.ghy_interior != 0.0
    assert breakdown.ghy_interior + breakdown.ghy_exterior == pytest.approx(0.0, abs=1e-12)


def test_matter_model_must_live_on_the_interior_metric(constants):
    star = ConstantDensityStar(constants)
    matched = star_spacetime(star, nodes=2)
    with pytest.raises(ContractViolation):
        MatchedSpacetime(star.exterior_metric, star.interior_region, constants, model=matched.model)


def test_matched_report_is_sorted_and_passes(constants):
    star = ConstantDensityStar(constants, mass=0.2, radius=1.0)
    report = matched_report(star_spacetime(star, nodes=4, per_axis=2), seed=3)
    names = [record.name for record in report.checks]
    assert names == sorted(names)
    assert report.passed
    assert report.environment.seed == 3
