from __future__ import annotations

import jax.numpy as jnp
import numpy as np
import pytest

from relcont.errors import ContractViolation, DomainError
from relcont.geometry import Chart
from relcont.lagrangians import (
    ContinuumLagrangian,
    ContinuumState,
    EntropicGas,
    FiberStoredEnergy,
    LinearEnergy,
    SaintVenantKirchhoff,
    covariance_check,
    eulerian_state,
    isotropy_residual,
    material_lagrangian,
    particle_lagrangian,
    spacetime_covariance_identity,
)
from relcont.oracles import body_stretch, body_twist, random_spacetime
from relcont.solutions import minkowski
from relcont.worldtube import projection_from_generalized, shear_tube, static_tube, stretch_tube, uniform_reference

BODY = Chart(name="body", bounds=((0.0, 1.0),) * 4)
SPACE = Chart(name="space", bounds=((-1.0, 3.0),) * 4)
METRIC = minkowski(SPACE)
X = jnp.array([0.4, 0.3, 0.6, 0.5])


def elastic_state():
    tube = shear_tube(BODY, SPACE, shear=0.25)
    refs = uniform_reference(BODY, 1.5, 0.4, np.diag([1.3, 1.2, 0.8]))
    return eulerian_state(tube, refs, METRIC, X)


def general_lagrangian():
    return ContinuumLagrangian(EntropicGas(0.3), SaintVenantKirchhoff(1.0, 0.5))


def test_dust_at_rest_density_is_minus_rest_mass():
    state = ContinuumState(jnp.array([1.0, 0.0, 0.0, 0.0]), 2.0, 0.0, jnp.zeros((4, 4)), METRIC(X))
    assert float(ContinuumLagrangian().density(state)) == pytest.approx(-2.0)


def test_closed_form_partials_match_autodiff():
    lagrangian = general_lagrangian()
    state = elastic_state()
    auto = lagrangian.partials(state)
    closed = lagrangian.closed_form_partials(state)
    sym = lambda a: 0.5 * (a + a.T)
    assert float(auto.value) == pytest.approx(float(closed.value), abs=1e-12)
    assert np.max(np.abs(auto.d_w - closed.d_w)) < 1e-8
    assert float(auto.d_rho) == pytest.approx(float(closed.d_rho), abs=1e-8)
    assert float(auto.d_s) == pytest.approx(float(closed.d_s), abs=1e-8)
    assert np.max(np.abs(sym(auto.d_cauchy) - sym(closed.d_cauchy))) < 1e-8
    assert np.max(np.abs(sym(auto.d_metric) - sym(closed.d_metric))) < 1e-8


@pytest.mark.parametrize("lagrangian", [ContinuumLagrangian(), ContinuumLagrangian(LinearEnergy(0.2)),
                                        general_lagrangian()], ids=["dust", "linear", "general"])
def test_spacetime_covariance_identity(lagrangian):
    identity = spacetime_covariance_identity(lagrangian, elastic_state())
    assert float(identity.residual) < 1e-8
    assert float(identity.metric_hat_residual) < 1e-8
    assert np.max(np.abs(identity.stress_from_metric - identity.stress_generic)) < 1e-8


def test_isotropy_identity_separates_isotropic_and_fiber_energies():
    state = elastic_state()
    projector = projection_from_generalized(state.metric, state.w)
    assert float(isotropy_residual(SaintVenantKirchhoff(1.0, 0.5), state.cauchy, projector)) < 1e-8
    assert float(isotropy_residual(FiberStoredEnergy(stiffness=1.0), state.cauchy, projector)) > 1e-3


def test_anisotropic_energy_has_no_eulerian_density():
    with pytest.raises(ContractViolation):
        ContinuumLagrangian(stored=FiberStoredEnergy()).density(elastic_state())


def test_entropic_gas_rejects_small_exponent():
    with pytest.raises(DomainError):
        EntropicGas(exponent=1.0)


def test_spacetime_covariance_of_material_density():
    tube = static_tube(BODY, SPACE)
    refs = uniform_reference(BODY, 1.0, 0.3)
    residual = covariance_check(ContinuumLagrangian(EntropicGas(0.2)), "spacetime", random_spacetime(4, seed=2),
                                tube, refs, METRIC, BODY.sample_grid(2))
    assert residual < 1e-8


def test_material_covariance_holds_for_isotropic_energy():
    tube = stretch_tube(BODY, SPACE, stretch=1.1)
    refs = uniform_reference(BODY, 1.0, 0.0, np.eye(3))
    lagrangian = ContinuumLagrangian(stored=SaintVenantKirchhoff(1.0, 0.5))
    assert covariance_check(lagrangian, "material", body_stretch(1.5), tube, refs, METRIC,
                            BODY.sample_grid(2)) < 1e-8
    assert covariance_check(ContinuumLagrangian(), "material", body_twist(0.3), tube, refs, METRIC,
                            BODY.sample_grid(2)) < 1e-8


def test_material_covariance_fails_for_fiber_energy():
    tube = stretch_tube(BODY, SPACE, stretch=1.1)
    refs = uniform_reference(BODY, 1.0, 0.0, np.eye(3))
    lagrangian = ContinuumLagrangian(stored=FiberStoredEnergy(stiffness=1.0))
    assert covariance_check(lagrangian, "material", body_stretch(1.5), tube, refs, METRIC,
                            BODY.sample_grid(2)) > 1e-3


def test_covariance_check_rejects_unknown_kind():
    tube = static_tube(BODY, SPACE)
    with pytest.raises(ContractViolation):
        covariance_check(ContinuumLagrangian(), "body", lambda x: x, tube, uniform_reference(BODY), METRIC, [])


def test_material_density_of_dust_matches_particle_lagrangian_per_unit_mass():
    tube = static_tube(BODY, SPACE, rate=1.0)
    refs = uniform_reference(BODY, 3.0)
    density = material_lagrangian(ContinuumLagrangian(), tube, refs, METRIC, X)
    particle = particle_lagrangian(METRIC(tube(X)), tube.velocity(X), 3.0)
    assert float(density) == pytest.approx(float(particle))
