from __future__ import annotations

import math

import jax.numpy as jnp
import numpy as np
import pytest

from relcont.numerics import (
    adjugate,
    boundary_faces,
    central_difference,
    derivative,
    fd_derivative,
    gauss_legendre,
    generalized_inverse,
    levi_civita,
    residual_norms,
    richardson_central,
    sample_grid,
)


def test_gauss_legendre_is_exact_for_low_degree_polynomials():
    rule = gauss_legendre([(0.0, 1.0), (0.0, 2.0)], 3)
    values = rule.points[:, 0] ** 3 * rule.points[:, 1] ** 2
    assert rule.integrate(values) == pytest.approx(2.0 / 3.0, rel=1e-13)


def test_gauss_legendre_accepts_per_axis_node_counts():
    rule = gauss_legendre([(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], (2, 3, 4))
    assert rule.points.shape == (24, 3)
    assert rule.weights.sum() == pytest.approx(1.0)


def test_boundary_faces_satisfy_divergence_theorem():
    bounds = [(0.0, 1.0), (0.0, 2.0)]
    field = lambda p: np.stack([p[:, 0] ** 2 * p[:, 1], p[:, 1] ** 3], axis=-1)
    div = lambda p: 2.0 * p[:, 0] * p[:, 1] + 3.0 * p[:, 1] ** 2

    rule = gauss_legendre(bounds, 4)
    bulk = rule.integrate(div(rule.points))
    faces = boundary_faces(bounds, 4)
    flux = sum(face.side * face.rule.integrate(field(face.rule.points)[:, face.axis]) for face in faces)

    assert len(faces) == 4
    assert flux == pytest.approx(bulk, rel=1e-12)


def test_fourth_order_differences_match_exact_derivative():
    point = np.array([0.3, -0.7])
    fn = lambda x: jnp.array([jnp.sin(x[0]) * x[1], jnp.exp(x[1])])
    exact = np.asarray(derivative(fn, point, exact=True))
    approx = fd_derivative(fn, point, 1e-3)
    assert exact.shape == (2, 2)
    assert np.max(np.abs(exact - approx)) < 1e-10


def test_richardson_is_fourth_order():
    errors = [abs(richardson_central(math.exp, h) - 1.0) for h in (0.1, 0.05)]
    assert errors[0] / errors[1] > 12.0
    assert abs(central_difference(math.exp, 0.05) - 1.0) > errors[1]


def test_levi_civita_signs():
    eps = levi_civita(3)
    assert eps[0, 1, 2] == 1.0
    assert eps[1, 0, 2] == -1.0
    assert eps[2, 0, 1] == 1.0
    assert eps[0, 0, 1] == 0.0


def test_adjugate_is_det_times_inverse():
    matrix = jnp.array([[2.0, 1.0, 0.0], [0.5, 3.0, 1.0], [0.0, -1.0, 4.0]])
    expected = jnp.linalg.det(matrix) * jnp.linalg.inv(matrix)
    assert np.allclose(adjugate(matrix), expected, atol=1e-12)


def test_generalized_inverse_annihilates_kernel():
    matrix = jnp.diag(jnp.array([0.0, 1.0, 2.0]))
    assert np.allclose(generalized_inverse(matrix), np.diag([0.0, 1.0, 0.5]), atol=1e-12)


def test_residual_norms_edge_cases():
    assert residual_norms([]) == (0.0, 0.0)
    assert residual_norms([1.0, float("nan")]) == (math.inf, math.inf)
    max_residual, l2 = residual_norms([3.0, -4.0])
    assert max_residual == 4.0
    assert l2 == pytest.approx(math.sqrt(12.5))


def test_sample_grid_stays_inside_margin():
    grid = sample_grid([(0.0, 1.0), (-2.0, 2.0)], 3)
    assert grid.shape == (9, 2)
    assert grid[:, 0].min() == pytest.approx(0.05)
    assert grid[:, 1].max() == pytest.approx(1.8)
    assert sample_grid([(0.0, 1.0)], 1).tolist() == [[0.5]]
