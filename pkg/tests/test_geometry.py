from __future__ import annotations

import jax.numpy as jnp
import numpy as np
import pytest
from pydantic import ValidationError

from relcont.errors import BoundaryEvaluationError, ContractViolation, SignatureError
from relcont.geometry import (
    Chart,
    Connection,
    MetricField,
    TensorField,
    bianchi_residual,
    christoffel,
    contraction_identity_residual,
    curvature,
    divergence,
    lie_derivative,
    lie_flow_oracle,
    partial_derivative,
    symmetric_contraction_rhs,
    trace_field,
)
from relcont.models import Constants, Signature
from relcont.oracles import random_metric, random_tensor_field, random_vector_field
from relcont.solutions import schwarzschild


def test_chart_rejects_empty_interval():
    with pytest.raises(ValidationError):
        Chart(name="bad", bounds=((0.0, 1.0), (2.0, 2.0)))


def test_chart_contains_is_strict():
    chart = Chart(bounds=((0.0, 1.0),))
    assert chart.contains([0.5])
    assert not chart.contains([1.0])
    assert not chart.contains([0.99], margin=0.02)


def test_minkowski_curvature_vanishes(flat):
    result = curvature(flat, jnp.array([0.1, 0.2, -0.3, 0.4]))
    for part in result:
        assert np.max(np.abs(np.asarray(part))) < 1e-12


def test_round_sphere_scalar_curvature(round_sphere):
    for theta in (0.5, 1.3, 2.4):
        scalar = curvature(round_sphere, jnp.array([theta, 1.0])).scalar
        assert float(scalar) == pytest.approx(0.5, abs=1e-10)


def test_schwarzschild_is_ricci_flat():
    chart = Chart(name="schw", bounds=((0.0, 1.0), (3.0, 8.0), (0.4, 2.7), (0.0, 6.0)))
    metric = schwarzschild(chart, Constants(), mass=1.0)
    for point in chart.sample_grid(2):
        assert np.max(np.abs(np.asarray(curvature(metric, jnp.asarray(point)).ricci))) < 1e-6


def test_bianchi_identity_on_random_metric(random_chart):
    metric = random_metric(random_chart, seed=7)
    for point in random_chart.sample_grid(2)[:3]:
        assert np.max(np.abs(np.asarray(bianchi_residual(metric, jnp.asarray(point))))) < 1e-6


def test_levi_civita_connection_is_compatible(random_chart):
    metric = random_metric(random_chart, seed=3)
    torsion, nabla_g = Connection(metric).compatibility_residual(jnp.array([0.2, 0.4, 0.6, 0.8]))
    assert float(torsion) < 1e-12
    assert float(nabla_g) < 1e-10


def test_black_box_gradient_matches_exact(random_chart):
    field = random_tensor_field(random_chart, 1, 1, seed=11)
    point = jnp.array([0.3, 0.5, 0.7, 0.9])
    exact = np.asarray(field.gradient(point))
    approx = np.asarray(field.black_box().gradient(point))
    assert np.max(np.abs(exact - approx)) < 1e-7


def test_black_box_refuses_points_near_the_edge(random_chart):
    field = random_tensor_field(random_chart, 0, 0, seed=1).black_box()
    with pytest.raises(BoundaryEvaluationError):
        field.gradient(np.array([1.5 - 1e-6, 0.5, 0.5, 0.5]))


def test_metric_validate_detects_wrong_signature(box):
    riemannian = MetricField(lambda x: jnp.eye(4) + 0.0 * x[0], box, Signature.LORENTZIAN, name="euclid")
    with pytest.raises(SignatureError):
        riemannian.validate(box.sample_grid(2))


def test_lie_derivative_of_scalar_is_directional_derivative(box):
    scalar = TensorField(lambda x: x[0] * x[1], box, name="f")
    zeta = TensorField(lambda x: jnp.array([1.0, 0.0, 0.0, 0.0]) + 0.0 * x[0], box, 1, 0, name="e0")
    assert float(lie_derivative(scalar, zeta, jnp.array([0.1, 0.7, 0.0, 0.0]))) == pytest.approx(0.7)


def test_lie_derivative_rejects_non_vector(box):
    scalar = TensorField(lambda x: x[0], box, name="f")
    with pytest.raises(ContractViolation):
        lie_derivative(scalar, scalar, jnp.zeros(4))


@pytest.mark.parametrize("rank", [(1, 1), (0, 2), (2, 0), (1, 0), (0, 1)])
def test_contraction_identity_holds_for_random_fields(random_chart, rank):
    p, q = rank
    kappa = random_tensor_field(random_chart, p, q, seed=1)
    pi = random_tensor_field(random_chart, q, p, seed=2, weight=1)
    zeta = random_vector_field(random_chart, seed=3, amplitude=0.5)
    connection = Connection(random_metric(random_chart, seed=4))
    for point in random_chart.sample_grid(2):
        residual = contraction_identity_residual(kappa, pi, zeta, jnp.asarray(point), connection)
        assert float(residual) < 1e-8


def test_contraction_identity_rejects_wrong_weight(random_chart):
    kappa = random_tensor_field(random_chart, 1, 1, seed=1)
    pi = random_tensor_field(random_chart, 1, 1, seed=2)
    zeta = random_vector_field(random_chart, seed=3)
    with pytest.raises(ContractViolation):
        contraction_identity_residual(kappa, pi, zeta, jnp.zeros(4))


def test_symmetric_special_case_matches_lie_derivative(random_chart):
    base = random_tensor_field(random_chart, 0, 2, seed=5)
    c = TensorField(lambda x: 0.5 * (base(x) + base(x).T), random_chart, 0, 2, name="c")
    pi_base = random_tensor_field(random_chart, 2, 0, seed=6, weight=1)
    pi = TensorField(lambda x: 0.5 * (pi_base(x) + pi_base(x).T), random_chart, 2, 0, 1, name="pi")
    zeta = random_vector_field(random_chart, seed=7, amplitude=0.5)
    point = jnp.array([0.1, 0.4, 0.9, 1.2])
    lhs = jnp.sum(lie_derivative(c, zeta, point) * pi(point))
    assert float(jnp.abs(lhs - symmetric_contraction_rhs(c, pi, zeta, point))) < 1e-8


def test_lie_derivative_matches_flow_oracle(random_chart):
    field = random_tensor_field(random_chart, 0, 2, seed=8)
    zeta = random_vector_field(random_chart, seed=9, amplitude=0.3)
    point = np.array([0.4, 0.5, 0.6, 0.7])
    coordinate = np.asarray(lie_derivative(field, zeta, jnp.asarray(point)))
    assert np.max(np.abs(coordinate - lie_flow_oracle(field, zeta, point))) < 1e-5


def test_lie_derivative_commutes_with_trace(random_chart):
    field = random_tensor_field(random_chart, 1, 1, seed=12)
    zeta = random_vector_field(random_chart, seed=13)
    point = jnp.array([0.2, 0.3, 0.4, 0.5])
    traced = lie_derivative(trace_field(field), zeta, point)
    assert float(jnp.abs(traced - jnp.trace(lie_derivative(field, zeta, point)))) < 1e-10


def test_partial_derivative_follows_the_product_rule():
    chart = Chart(name="plane", bounds=((0.0, 5.0), (0.0, 5.0)))
    field = TensorField(lambda x: x[0] * x[1], chart, name="f")
    point = jnp.array([2.0, 3.0])
    assert float(partial_derivative(field, point, 0)) == pytest.approx(3.0)
    assert float(partial_derivative(field.black_box(), point, 0)) == pytest.approx(3.0, abs=1e-9)
    with pytest.raises(ContractViolation):
        partial_derivative(field, point, 2)


def test_sphere_christoffel_symbol(round_sphere):
    theta = np.pi / 3
    gamma = christoffel(round_sphere, jnp.array([theta, 1.0]))
    assert float(gamma[0, 1, 1]) == pytest.approx(-np.sin(theta) * np.cos(theta))
    assert np.allclose(gamma, np.swapaxes(gamma, 1, 2))


def test_divergence_of_position_density_is_the_dimension(box, flat):
    position = TensorField(lambda x: x, box, 1, 0, 1, name="x")
    assert float(divergence(position, Connection(flat), jnp.array([0.1, 0.2, 0.3, 0.4]))) == pytest.approx(4.0)
    with pytest.raises(ContractViolation):
        divergence(TensorField(lambda x: x, box, 1, 0, name="x"), None, jnp.zeros(4))
