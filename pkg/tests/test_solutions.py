from __future__ import annotations

import numpy as np
import pytest

from relcont.errors import DomainError
from relcont.geometry import Chart
from relcont.models import Constants
from relcont.solutions import ConstantDensityStar, FRWSolution, schwarzschild, schwarzschild_radius


@pytest.mark.parametrize("coefficient", [0.0, 0.1], ids=["dust", "linear"])
def test_frw_closed_form_solves_friedmann_equations(constants, coefficient):
    frw = FRWSolution(constants, rest_density=1.0, coefficient=coefficient)
    for t in np.linspace(1.0, 2.0, 4):
        residuals = frw.friedmann_residuals(t)
        assert abs(residuals.expansion) < 1e-10
        assert abs(residuals.acceleration) < 1e-10


def test_frw_proper_density_dilutes_with_volume(constants):
    frw = FRWSolution(constants)
    ratio = float(frw.proper_density(2.0) / frw.proper_density(1.0))
    assert ratio == pytest.approx(float((frw.scale_factor(1.0) / frw.scale_factor(2.0)) ** 3))


def test_frw_rejects_chart_before_the_big_bang(constants):
    with pytest.raises(DomainError):
        FRWSolution(constants, coefficient=100.0)


def test_schwarzschild_rejects_charts_inside_the_horizon(constants):
    chart = Chart(name="inside", bounds=((0.0, 1.0), (1.0, 4.0), (0.5, 2.5), (0.0, 6.0)))
    assert schwarzschild_radius(constants, 1.0) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        schwarzschild(chart, constants, mass=1.0)


def test_constant_density_star_satisfies_tov(constants):
    star = ConstantDensityStar(constants, mass=0.2, radius=1.0)
    result = star.tov_check()
    assert result.balance < 1e-10
    assert result.integration < 1e-8
    assert float(star.pressure_at(1.0)) == pytest.approx(0.0, abs=1e-14)
    assert float(star.central_pressure) > 0.0


def test_star_beyond_the_compactness_bound_is_rejected(constants):
    with pytest.raises(DomainError):
        ConstantDensityStar(constants, mass=0.45, radius=1.0)


def test_star_rejects_boundary_outside_the_fluid(constants):
    with pytest.raises(DomainError):
        ConstantDensityStar(constants, boundary_radius_fraction=1.2)


def test_star_mass_and_energy_density_are_consistent():
    constants = Constants(G=1.0, c=2.0)
    star = ConstantDensityStar(constants, mass=0.5, radius=1.5)
    expected = 3.0 * 0.5 * 4.0 / (4.0 * np.pi * 1.5 ** 3)
    assert star.energy_density == pytest.approx(expected)


def test_frw_density_drift_breaks_friedmann_equations(constants):
    frw = FRWSolution(constants, rest_density=1.0, coefficient=0.1, density_drift=0.2)
    for t in (1.0, 2.0):
        residuals = frw.friedmann_residuals(t)
        assert max(abs(residuals.expansion), abs(residuals.acceleration)) > 1e-4


def test_frw_matter_density_matches_the_closed_form_without_drift(constants):
    frw = FRWSolution(constants, rest_density=1.0, coefficient=0.1)
    for t in (1.0, 1.7):
        assert float(frw.matter_density(t)) == pytest.approx(float(frw.proper_density(t)), rel=1e-10)
