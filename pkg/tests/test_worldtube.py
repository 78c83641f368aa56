from __future__ import annotations

import jax.numpy as jnp
import numpy as np
import pytest

from relcont.errors import ContractViolation, DomainError, InversionError, SignatureError
from relcont.geometry import Chart, TensorField
from relcont.solutions import minkowski, schwarzschild
from relcont.worldtube import (
    ReferenceFields,
    WorldTube,
    boost_tube,
    deformation_at,
    make_tube,
    projection,
    projection_from_generalized,
    pushforward,
    random_tube,
    shear_tube,
    static_tube,
    uniform_reference,
    velocities,
)

BODY = Chart(name="body", bounds=((0.0, 1.0),) * 4)
SPACE = Chart(name="space", bounds=((-1.0, 3.0),) * 4)


@pytest.fixture
def metric():
    return minkowski(SPACE)


def test_static_tube_is_undeformed(metric):
    tube = static_tube(BODY, SPACE)
    refs = uniform_reference(BODY, body_metric=np.eye(3))
    d = deformation_at(tube, metric, refs.body_metric, jnp.array([0.5, 0.5, 0.5, 0.5]))
    assert np.allclose(d.right_cauchy_green[1:, 1:], np.eye(3), atol=1e-12)
    assert np.allclose(d.cauchy, np.diag([0.0, 1.0, 1.0, 1.0]), atol=1e-12)


def test_deformation_routes_agree_and_are_degenerate_along_the_flow(metric):
    tube = shear_tube(BODY, SPACE, shear=0.3)
    refs = uniform_reference(BODY, body_metric=np.diag([1.0, 2.0, 0.5]))
    X = jnp.array([0.3, 0.4, 0.6, 0.2])
    d = deformation_at(tube, metric, refs.body_metric, X)
    u = tube.velocity(X)
    assert np.max(np.abs(d.right_cauchy_green[0])) < 1e-8
    assert np.max(np.abs(d.cauchy @ u)) < 1e-8
    assert np.max(np.abs(d.right_cauchy_green[1:, 1:] - d.right_cauchy_green_coordinate)) < 1e-8
    assert np.max(np.abs(d.cauchy - d.cauchy_coordinate)) < 1e-8


def test_newton_inverse_recovers_body_point():
    tube = random_tube(BODY, SPACE, seed=5, amplitude=0.05)
    X = np.array([0.2, 0.7, 0.4, 0.6])
    assert np.allclose(tube.inverse(np.asarray(tube(X))), X, atol=1e-9)


def test_newton_inverse_rejects_points_outside_the_image():
    tube = static_tube(BODY, SPACE)
    with pytest.raises(InversionError):
        tube.inverse(np.array([2.5, 0.5, 0.5, 0.5]))


def test_pushforward_of_reference_velocity_is_generalized_velocity():
    tube = boost_tube(BODY, SPACE, velocity=0.6)
    refs = uniform_reference(BODY)
    X = jnp.array([0.5, 0.2, 0.3, 0.4])
    pushed = pushforward(tube, refs.velocity, tube(X))
    assert np.allclose(pushed, tube.velocity(X), atol=1e-12)
    assert np.allclose(tube.velocity(X), [1.25, 0.75, 0.0, 0.0], atol=1e-12)


def test_boost_rejects_superluminal_velocity():
    with pytest.raises(DomainError):
        boost_tube(BODY, SPACE, velocity=1.0)


def test_make_tube_rejects_unknown_family():
    with pytest.raises(ContractViolation):
        make_tube("spiral", BODY, SPACE)


def test_tube_check_rejects_spacelike_flow(metric):
    tube = WorldTube(lambda X: X.at[1].add(2.0 * X[0]), BODY, SPACE, name="tilted")
    with pytest.raises(SignatureError):
        tube.check(metric, BODY.sample_grid(2))


def test_uniform_reference_is_advected():
    refs = uniform_reference(BODY, 2.0, 0.5, np.eye(3))
    residuals = refs.advection_residuals(BODY.sample_grid(2))
    assert set(residuals) == {"mass", "entropy", "body_metric", "degeneracy"}
    assert max(residuals.values()) < 1e-12


def test_drifting_mass_is_not_advected():
    mass = TensorField(lambda X: 1.0 + 0.2 * X[0], BODY, 0, 0, 1, name="R")
    refs = ReferenceFields(BODY, mass)
    assert refs.advection_residuals(BODY.sample_grid(2))["mass"] == pytest.approx(0.2)


def test_generalized_projector_annihilates_velocity():
    g = jnp.diag(jnp.array([-1.0, 1.0, 1.0, 1.0]))
    w = jnp.array([2.0, 0.3, -0.1, 0.2])
    p = projection_from_generalized(g, w)
    assert np.max(np.abs(p @ w)) < 1e-12
    assert np.allclose(p, p.T)


def test_boosted_dust_velocities_and_projection(metric):
    tube = boost_tube(BODY, SPACE, velocity=0.6)
    point = np.asarray(tube(jnp.array([0.5, 0.2, 0.3, 0.4])))
    result = velocities(tube, metric, point)
    assert np.allclose(result.u, [1.25, 0.75, 0.0, 0.0], atol=1e-10)
    p = projection(metric, jnp.asarray(result.u), point)
    assert np.max(np.abs(p.lower @ result.u)) < 1e-12
    assert np.allclose(p.mixed @ p.mixed, p.mixed, atol=1e-12)


def test_projection_rejects_unnormalized_velocity(metric):
    with pytest.raises(ContractViolation):
        projection(metric, jnp.array([2.0, 0.0, 0.0, 0.0]), np.zeros(4))


def test_static_schwarzschild_tube_is_the_identity(constants):
    chart = Chart(name="schwarzschild", bounds=((0.0, 1.0), (3.0, 8.0), (0.6, 2.5), (0.0, 6.0)))
    tube = make_tube("schwarzschild_static", chart, chart)
    points = chart.sample_grid(2)
    tube.check(schwarzschild(chart, constants, mass=0.5), points)
    for X in points:
        assert np.allclose(np.asarray(tube(X)), X)
        assert np.allclose(np.asarray(tube.jacobian(X)), np.eye(4))
