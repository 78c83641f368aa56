from __future__ import annotations

import jax
import jax.numpy as jnp
import numpy as np
import pytest

from relcont.dynamics import (
    ContinuumFields,
    ContinuumModel,
    ConvectiveFields,
    check_consistent_state,
    continuity_residual,
    convective_el_residual,
    eulerian_el_residual,
    euler_projection_residual,
    fluid_equations_residual,
    stress_energy,
)
from relcont.errors import ContractViolation, InconsistentStateError
from relcont.geometry import Chart, TensorField
from relcont.lagrangians import ContinuumLagrangian, ContinuumState, EntropicGas, SaintVenantKirchhoff, eulerian_state
from relcont.numerics import sample_grid
from relcont.oracles import random_metric
from relcont.solutions import minkowski
from relcont.worldtube import ReferenceFields, boost_tube, random_tube, shear_tube, static_tube, uniform_reference

BODY = Chart(name="body", bounds=((0.0, 1.0),) * 4)
SPACE = Chart(name="space", bounds=((-1.0, 3.0),) * 4)
METRIC = minkowski(SPACE)


def images(tube, per_axis=2):
    return np.asarray(jax.vmap(tube.map)(jnp.asarray(sample_grid(BODY.bounds, per_axis))))


def dust_model(tube, refs=None):
    fields = ContinuumFields.from_tube(ContinuumLagrangian(), tube, refs or uniform_reference(BODY, 1.0), METRIC)
    return ContinuumModel(fields)


def test_stress_energy_routes_agree_for_elastic_gas():
    lagrangian = ContinuumLagrangian(EntropicGas(0.3), SaintVenantKirchhoff(1.0, 0.5))
    tube = shear_tube(BODY, SPACE, shear=0.25)
    refs = uniform_reference(BODY, 1.5, 0.4, np.diag([1.3, 1.2, 0.8]))
    state = eulerian_state(tube, refs, METRIC, jnp.array([0.4, 0.3, 0.6, 0.5]))
    stress = stress_energy(lagrangian, state)
    assert np.max(np.abs(stress.total - stress.metric_route)) < 1e-8
    assert np.max(np.abs(stress.total - stress.split)) < 1e-8
    assert float(stress.pressure) > 0.0


def test_dust_at_rest_has_energy_density_rho_c2():
    g = METRIC(jnp.zeros(4))
    state = ContinuumState(jnp.array([1.0, 0.0, 0.0, 0.0]), 2.0, 0.0, jnp.zeros((4, 4)), g)
    stress = stress_energy(ContinuumLagrangian(), state)
    assert float(stress.energy_density) == pytest.approx(2.0)
    assert float(stress.pressure) == pytest.approx(0.0)
    assert float(stress.total[0, 0]) == pytest.approx(-2.0)


@pytest.mark.parametrize("tube", [static_tube(BODY, SPACE, rate=1.0), boost_tube(BODY, SPACE, velocity=0.6)],
                         ids=["static", "boosted"])
def test_uniform_dust_satisfies_euler_lagrange(tube):
    result = eulerian_el_residual(dust_model(tube), images(tube))
    assert result.generic.max_residual < 1e-10
    assert result.metric_form.max_residual < 1e-10
    assert result.agreement < 1e-10


def test_boosted_dust_satisfies_euler_and_energy_equations():
    tube = boost_tube(BODY, SPACE, velocity=0.6)
    model = dust_model(tube)
    balance = fluid_equations_residual(model, images(tube))
    assert balance.momentum.max_residual < 1e-10
    assert balance.energy.max_residual < 1e-10
    assert euler_projection_residual(model, balance) < 1e-10


def test_black_box_model_reports_fd_mode():
    tube = static_tube(BODY, SPACE, rate=1.0)
    model = dust_model(tube).black_box()
    result = eulerian_el_residual(model, images(tube))
    assert result.generic.mode.value == "fd"
    assert result.generic.max_residual < 1e-6


def test_drifting_mass_breaks_continuity():
    tube = static_tube(BODY, SPACE, rate=1.0)
    mass = TensorField(lambda X: 1.0 + 0.2 * X[0], BODY, 0, 0, 1, name="R")
    fields = ContinuumFields.from_tube(ContinuumLagrangian(), tube, ReferenceFields(BODY, mass), METRIC)
    result = continuity_residual(fields, "mass", images(tube))
    assert result.generalized.max_residual == pytest.approx(0.2, abs=1e-8)
    assert result.proper.max_residual > 0.1


def test_uniform_mass_is_advected():
    tube = boost_tube(BODY, SPACE, velocity=0.6)
    fields = ContinuumFields.from_tube(ContinuumLagrangian(), tube, uniform_reference(BODY, 1.0, 0.2), METRIC)
    for quantity in ("mass", "entropy"):
        result = continuity_residual(fields, quantity, images(tube))
        assert result.generalized.max_residual < 1e-10
        assert result.proper.max_residual < 1e-10


def test_continuity_rejects_missing_cauchy_tensor():
    tube = static_tube(BODY, SPACE)
    fields = ContinuumFields.from_tube(ContinuumLagrangian(), tube, uniform_reference(BODY), METRIC)
    with pytest.raises(ContractViolation):
        continuity_residual(fields, "cauchy", images(tube))


def test_convective_picture_of_static_elastic_block():
    tube = static_tube(BODY, SPACE, rate=1.0)
    refs = uniform_reference(BODY, 1.0, 0.0, np.eye(3))
    fields = ConvectiveFields.from_tube(ContinuumLagrangian(stored=SaintVenantKirchhoff(1.0, 0.5)), tube, refs,
                                        METRIC)
    assert convective_el_residual(fields, sample_grid(BODY.bounds, 2)).max_residual < 1e-10


def test_spacelike_velocity_is_an_inconsistent_state():
    g = METRIC(jnp.zeros(4))
    state = ContinuumState(jnp.array([0.5, 1.0, 0.0, 0.0]), 1.0, 0.0, jnp.zeros((4, 4)), g)
    with pytest.raises(InconsistentStateError):
        check_consistent_state(ContinuumLagrangian(), state)


def test_continuity_proper_form_holds_where_the_lapse_varies():
    chart = Chart(name="random", bounds=((-0.5, 1.5),) * 4)
    metric = random_metric(chart, seed=42)
    tube = random_tube(BODY, chart, seed=42)
    fields = ContinuumFields.from_tube(ContinuumLagrangian(EntropicGas(0.1)), tube,
                                       uniform_reference(BODY, 1.0, 0.5), metric)
    points = np.asarray(jax.vmap(tube.map)(jnp.asarray(sample_grid(BODY.bounds, 2))))
    lapses = [float(jnp.sqrt(-(fields.w(x) @ metric(x) @ fields.w(x)))) for x in points]
    assert max(lapses) - min(lapses) > 1e-4
    for quantity in ("mass", "entropy"):
        result = continuity_residual(fields, quantity, points)
        assert result.generalized.max_residual < 1e-8
        assert result.proper.max_residual < 1e-8
