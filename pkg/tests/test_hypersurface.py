from __future__ import annotations

import math

import numpy as np
import pytest

from relcont.errors import ContractViolation
from relcont.geometry import Chart
from relcont.hypersurface import (
    Hypersurface,
    constant_normal_variation,
    extrinsic_agreement,
    gauss_codazzi_residual,
    ghy_metric_variation,
    ghy_metric_variation_fd,
    ghy_surface_variation,
    ghy_surface_variation_fd,
    hyperplane,
    induced_geometry,
    junction_check,
    mean_curvature_integral,
    random_graph_surface,
    random_surface_variation,
    sphere,
    supporting_variations,
    time_slice,
)
from relcont.models import SurfaceKind
from relcont.oracles import random_metric, random_symmetric_field
from relcont.solutions import euclidean, minkowski

SPACE = Chart(name="euclidean", bounds=((-3.0, 3.0),) * 3)
RANDOM = Chart(name="random", bounds=((-0.5, 1.5),) * 4)


@pytest.fixture
def unit_sphere():
    return sphere(euclidean(SPACE), radius=1.5, nodes=32)


def test_sphere_mean_curvature_integral(unit_sphere):
    assert mean_curvature_integral(unit_sphere) == pytest.approx(8.0 * math.pi * 1.5, rel=1e-10)


def test_sphere_normal_points_outward(unit_sphere):
    geo = induced_geometry(unit_sphere, np.array([1.0, 2.0]))
    assert float(geo.k) == pytest.approx(2.0 / 1.5)
    assert float(np.dot(np.asarray(geo.normal), np.asarray(geo.point))) > 0.0


def test_sphere_quadrature_converges(unit_sphere):
    exact = 8.0 * math.pi * 1.5
    coarse = abs(mean_curvature_integral(unit_sphere.with_nodes(4)) - exact)
    fine = abs(mean_curvature_integral(unit_sphere.with_nodes(8)) - exact)
    assert fine < 0.1 * coarse


def test_normal_displacement_of_sphere_grows_ghy_at_eight_pi(unit_sphere):
    variation = constant_normal_variation(1.0, 2)
    assert ghy_surface_variation(unit_sphere, variation) == pytest.approx(8.0 * math.pi, rel=1e-8)
    assert ghy_surface_variation_fd(unit_sphere, variation) == pytest.approx(8.0 * math.pi, rel=1e-6)


def test_flat_hyperplane_has_no_extrinsic_curvature():
    chart = Chart(name="box", bounds=((-1.0, 1.0),) * 4)
    plane = hyperplane(minkowski(chart), axis=1, value=0.2, nodes=3)
    geo = induced_geometry(plane, np.array([0.1, 0.2, 0.3]))
    assert np.max(np.abs(np.asarray(geo.K))) < 1e-12
    assert plane.kind(np.zeros(3)) == SurfaceKind.TIMELIKE
    assert time_slice(minkowski(chart), 0.0, nodes=3).kind(np.zeros(3)) == SurfaceKind.SPACELIKE


def test_surface_needs_codimension_one():
    with pytest.raises(ContractViolation):
        Hypersurface(lambda s: s, Chart(bounds=((0.0, 1.0),) * 3), euclidean(SPACE))


def test_extrinsic_routes_agree_on_random_surface():
    surface = random_graph_surface(random_metric(RANDOM, seed=4), seed=4, nodes=3)
    parallel, symmetry = extrinsic_agreement(surface, surface.sample_points(2))
    assert parallel < 1e-8
    assert symmetry < 1e-8


def test_gauss_codazzi_on_random_surface():
    surface = random_graph_surface(random_metric(RANDOM, seed=6), seed=6, nodes=3)
    result = gauss_codazzi_residual(surface, np.array([0.5, 0.4, 0.6]))
    assert abs(float(result.scalar)) < 1e-5
    assert np.max(np.abs(np.asarray(result.codazzi))) < 1e-5


def test_ghy_metric_variation_matches_perturbation():
    metric = random_metric(RANDOM, seed=2)
    surface = random_graph_surface(metric, seed=2, nodes=6)
    delta = random_symmetric_field(RANDOM, seed=3, amplitude=0.05)
    analytic = ghy_metric_variation(surface, delta)
    oracle = ghy_metric_variation_fd(surface, delta)
    assert abs(analytic - oracle) < 1e-4 * max(1.0, abs(oracle))


def test_ghy_surface_variation_matches_perturbation():
    metric = random_metric(RANDOM, seed=8)
    surface = random_graph_surface(metric, seed=8, nodes=8)
    variation = random_surface_variation(surface.chart, seed=8)
    analytic = ghy_surface_variation(surface, variation)
    oracle = ghy_surface_variation_fd(surface, variation)
    assert abs(analytic - oracle) < 1e-5 * max(1.0, abs(oracle))


def test_supporting_variations_match_perturbation(unit_sphere):
    variation = random_surface_variation(unit_sphere.chart, seed=1)
    result = supporting_variations(unit_sphere.with_nodes(6), variation, points=unit_sphere.sample_points(2))
    assert set(result.errors) == {"tangent", "normal", "h", "volume", "K", "k"}
    assert max(result.errors.values()) < 1e-4


def test_identical_sides_have_no_junction_jumps():
    metric = random_metric(RANDOM, seed=5)
    surface = random_graph_surface(metric, seed=5, nodes=2)
    jumps = junction_check(surface, metric, metric)
    assert max(jumps) < 1e-14
