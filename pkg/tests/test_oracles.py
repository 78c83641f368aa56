from __future__ import annotations

import math

import jax.numpy as jnp
import numpy as np
import pytest

from relcont.errors import ContractViolation
from relcont.geometry import Chart
from relcont.oracles import (
    body_stretch,
    fd_variation_oracle,
    moving_domain_sides,
    random_metric,
    random_tensor_field,
)

CHART = Chart(name="random", bounds=((-0.5, 1.5),) * 4)


def test_random_fields_are_deterministic_in_the_seed():
    point = jnp.array([0.1, 0.2, 0.3, 0.4])
    first = random_tensor_field(CHART, 1, 1, seed=3)(point)
    again = random_tensor_field(CHART, 1, 1, seed=3)(point)
    other = random_tensor_field(CHART, 1, 1, seed=4)(point)
    assert np.array_equal(np.asarray(first), np.asarray(again))
    assert not np.allclose(first, other)


def test_random_metric_is_lorentzian():
    metric = random_metric(CHART, seed=9)
    metric.validate(CHART.sample_grid(2))
    assert np.allclose(metric(jnp.zeros(4)), np.asarray(metric(jnp.zeros(4))).T)


def test_fd_variation_oracle_recovers_a_derivative():
    assert fd_variation_oracle(lambda eps: math.sin(1.0 + eps)) == pytest.approx(math.cos(1.0), abs=1e-10)
    with pytest.raises(ContractViolation):
        fd_variation_oracle(math.sin, step=0.0)


def test_body_stretch_rejects_the_time_axis():
    with pytest.raises(ContractViolation):
        body_stretch(2.0, axis=0)


def test_moving_domain_sides_agree_for_a_growing_box():
    bounds = [(0.0, 1.0), (0.0, 1.0)]
    density = lambda eps, x: (1.0 + eps) * (1.0 + x[0] * x[1])
    embedding = lambda eps, X: X * (1.0 + eps * X[0])
    sides = moving_domain_sides(density, embedding, bounds, nodes=6)
    assert sides.lhs == pytest.approx(sides.rhs, abs=1e-7)
    assert sides.bulk == pytest.approx(1.25, abs=1e-12)
