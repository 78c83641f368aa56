"""
Solution Oracles for relcont
============================

Closed-form metrics and matter profiles the harness verifies against:
Minkowski and Euclidean backgrounds, flat FRW with e = K rho, exterior
Schwarzschild and the constant-density star (Schwarzschild interior).

Coordinates are (t, x, y, z) for FRW and (t, r, theta, phi) for the
Schwarzschild family. All closed forms are jax expressions.

Usage:
    from relcont.solutions import ConstantDensityStar

    star = ConstantDensityStar(constants, mass=0.2, radius=1.0)
    p_surface = star.pressure_at(star.radius)
"""

import math
from typing import NamedTuple, Optional

import jax
import jax.numpy as jnp
import numpy as np
from scipy.integrate import solve_ivp

from relcont.errors import DomainError
from relcont.geometry import Chart, MetricField
from relcont.log import log
from relcont.models import Constants, Signature


# ============================================================
# Flat backgrounds
# ============================================================

def minkowski(chart: Chart, light_speed: float = 1.0) -> MetricField:
    background = jnp.eye(chart.dimension).at[0, 0].set(-light_speed ** 2)
    return MetricField(lambda x: background + 0.0 * x[0], chart, Signature.LORENTZIAN, name="minkowski")


def euclidean(chart: Chart) -> MetricField:
    identity = jnp.eye(chart.dimension)
    return MetricField(lambda x: identity + 0.0 * x[0], chart, Signature.RIEMANNIAN, name="euclidean")


# ============================================================
# FRW
# ============================================================

class FRWSolution:
    """Flat FRW universe filled with a fluid of specific energy e = K rho.

    a(t)^3 = rho0 (6 pi G t^2 - K / c^2) solves both Friedmann equations with
    proper density rho = rho0 / a^3; K = 0 is dust. In comoving coordinates
    w = d/dt and the coordinate mass density is rho_bar = c rho0.
    """

    def __init__(self, constants: Constants, rest_density: float = 1.0, coefficient: float = 0.0,
                 density_drift: float = 0.0, time_range=(1.0, 2.0), box: float = 1.0):
        self.constants = constants
        self.rest_density = rest_density
        self.coefficient = coefficient
        self.density_drift = density_drift
        t0, t1 = map(float, time_range)
        c = constants.c
        if not 6.0 * math.pi * constants.G * t0 ** 2 > coefficient / c ** 2:
            raise DomainError(
                f"FRW chart starts at t = {t0}, before the big bang of a^3 = rho0 (6 pi G t^2 - K/c^2) "
                f"with K = {coefficient}"
            )
        self.chart = Chart(name="frw", bounds=((t0, t1),) + ((0.0, box),) * 3)
        self.time_mid = 0.5 * (t0 + t1)
        self.metric = MetricField(self._components, self.chart, Signature.LORENTZIAN, name="frw")

    def scale_factor(self, t):
        c = self.constants.c
        cube = self.rest_density * (6.0 * math.pi * self.constants.G * t ** 2 - self.coefficient / c ** 2)
        return jnp.cbrt(cube)

    def hubble_rate(self, t):
        """a'/a from the closed form."""
        return jax.grad(self.scale_factor)(t) / self.scale_factor(t)

    def _components(self, x):
        a2 = self.scale_factor(x[0]) ** 2
        return jnp.diag(jnp.array([-self.constants.c ** 2, a2, a2, a2]))

    def proper_density(self, t):
        return self.rest_density / self.scale_factor(t) ** 3

    def coordinate_density(self, x):
        """rho_bar = c rho0, times (1 + drift (t - t_mid)) for the negative control."""
        return self.constants.c * self.rest_density * (1.0 + self.density_drift * (x[0] - self.time_mid))

    def velocity(self, x):
        return jnp.zeros(4).at[0].set(1.0) + 0.0 * x[0]

    def matter_density(self, t):
        """rho = N rho_bar / (c sqrt|g|) on the comoving flow, read from the coordinate density."""
        middle = 0.5 * sum(self.chart.bounds[1])
        x = jnp.array([t, middle, middle, middle], dtype=jnp.float64)
        g = self.metric(x)
        w = self.velocity(x)
        lapse = jnp.sqrt(-(w @ g @ w))
        volume = jnp.sqrt(jnp.abs(jnp.linalg.det(g)))
        return lapse * self.coordinate_density(x) / (self.constants.c * volume)

    def energy_density(self, t):
        rho = self.matter_density(t)
        return rho * (self.constants.c ** 2 + self.coefficient * rho)

    def pressure(self, t):
        return self.coefficient * self.matter_density(t) ** 2

    def friedmann_residuals(self, t) -> "FriedmannResiduals":
        """(a'/a)^2 - 8 pi G eps / (3 c^2) and a''/a + 4 pi G (eps + 3p) / (3 c^2)."""
        G, c = self.constants.G, self.constants.c
        a = self.scale_factor(t)
        a_dot = jax.grad(self.scale_factor)(t)
        a_ddot = jax.grad(jax.grad(self.scale_factor))(t)
        eps = self.energy_density(t)
        p = self.pressure(t)
        first = (a_dot / a) ** 2 - 8.0 * math.pi * G * eps / (3.0 * c ** 2)
        second = a_ddot / a + 4.0 * math.pi * G * (eps + 3.0 * p) / (3.0 * c ** 2)
        return FriedmannResiduals(float(first), float(second))

    def slice_curvature(self, t) -> float:
        """k of the t = const slice for the future-pointing normal: 3 a' / (a c)."""
        return 3.0 * float(self.hubble_rate(t)) / self.constants.c


class FriedmannResiduals(NamedTuple):
    expansion: float
    acceleration: float


# ============================================================
# Schwarzschild exterior
# ============================================================

def schwarzschild_radius(constants: Constants, mass: float) -> float:
    return 2.0 * constants.G * mass / constants.c ** 2


def schwarzschild_components(x, constants: Constants, mass: float, mass_gradient: float = 0.0,
                             reference_radius: float = 0.0):
    """Static exterior metric; mass_gradient makes M(r) = M (1 + m' (r - r_ref)) (not a vacuum solution)."""
    r, theta = x[1], x[2]
    c = constants.c
    local_mass = mass * (1.0 + mass_gradient * (r - reference_radius))
    f = 1.0 - 2.0 * constants.G * local_mass / (c ** 2 * r)
    return jnp.diag(jnp.array([-c ** 2 * f, 1.0 / f, r ** 2, r ** 2 * jnp.sin(theta) ** 2]))


def schwarzschild(chart: Chart, constants: Constants, mass: float, mass_gradient: float = 0.0) -> MetricField:
    r_min = chart.bounds[1][0]
    if not r_min > schwarzschild_radius(constants, mass * (1.0 + max(mass_gradient, 0.0) * chart.scale)):
        raise DomainError(f"chart {chart.name!r} reaches inside the horizon r_s = {schwarzschild_radius(constants, mass):.4g}")
    return MetricField(lambda x: schwarzschild_components(x, constants, mass, mass_gradient, r_min),
                       chart, Signature.LORENTZIAN, name="schwarzschild")


# ============================================================
# Constant-density star
# ============================================================

class TOVCheck(NamedTuple):
    balance: float       # max |p' - TOV right side| from the closed form (relative to p_c)
    integration: float   # max |p_ivp - p_closed| / p_c along the radius


class ConstantDensityStar:
    """Uniform energy density eps inside r <= R matched to Schwarzschild outside.

    Interior: g_tt = -c^2 (3/2 sqrt(B) - 1/2 sqrt(A))^2, g_rr = 1/A with
    A = 1 - 2 G M r^2 / (c^2 R^3), B = 1 - 2 G M / (c^2 R),
    p = eps (sqrt(A) - sqrt(B)) / (3 sqrt(B) - sqrt(A)), M = 4/3 pi R^3 eps / c^2.

    ``exterior_mass_scale`` rescales the exterior mass and
    ``boundary_radius_fraction`` truncates the fluid before p reaches zero;
    both are negative controls.
    """

    def __init__(self, constants: Constants, mass: float = 0.2, radius: float = 1.0,
                 exterior_mass_scale: float = 1.0, boundary_radius_fraction: float = 1.0,
                 time_range=(0.0, 1.0), outer_radius: Optional[float] = None):
        self.constants = constants
        self.mass = mass
        self.radius = radius
        compactness = 2.0 * constants.G * mass / (constants.c ** 2 * radius)
        if not compactness < 8.0 / 9.0:
            raise DomainError(f"2GM/(c^2 R) = {compactness:.4g} violates the bound 8/9 for finite central pressure")
        if not 0.0 < boundary_radius_fraction <= 1.0:
            raise DomainError(f"boundary_radius_fraction must lie in (0, 1], got {boundary_radius_fraction}")
        self.energy_density = 3.0 * mass * constants.c ** 2 / (4.0 * math.pi * radius ** 3)
        self.exterior_mass = mass * exterior_mass_scale
        self.surface_radius = radius * boundary_radius_fraction
        self.outer_radius = outer_radius or 2.0 * radius
        t0, t1 = map(float, time_range)
        self.time_range = (t0, t1)

        angles = ((0.0, math.pi), (0.0, 2.0 * math.pi))
        # metric charts reach past the surface and the caps so stencils there stay inside
        pad = 0.25 * (t1 - t0) + 0.1
        times = (t0 - pad, t1 + pad)
        interior_chart = Chart(name="star_interior", bounds=(times, (0.0, 1.25 * radius)) + angles)
        exterior_chart = Chart(name="star_exterior", bounds=(times, (0.75 * radius, self.outer_radius)) + angles)
        self.interior_metric = MetricField(self._interior_components, interior_chart, Signature.LORENTZIAN,
                                           name="star_interior")
        self.exterior_metric = schwarzschild(exterior_chart, constants, self.exterior_mass)

        self.interior_region = ((t0, t1), (0.0, self.surface_radius)) + angles
        self.exterior_region = ((t0, t1), (self.surface_radius, self.outer_radius)) + angles
        log("Scene", f"constant-density star: M={mass:g} R={radius:g} eps={self.energy_density:.6g} "
                     f"p_c={float(self.central_pressure):.6g}")

    # ------------------------------------------------------------
    # Closed forms
    # ------------------------------------------------------------

    def _metric_functions(self, r):
        G, c = self.constants.G, self.constants.c
        A = 1.0 - 2.0 * G * self.mass * r ** 2 / (c ** 2 * self.radius ** 3)
        B = 1.0 - 2.0 * G * self.mass / (c ** 2 * self.radius)
        return A, B

    def lapse_factor(self, r):
        """sqrt(-g_tt) / c = 3/2 sqrt(B) - 1/2 sqrt(A)."""
        A, B = self._metric_functions(r)
        return 1.5 * jnp.sqrt(B) - 0.5 * jnp.sqrt(A)

    def _interior_components(self, x):
        r, theta = x[1], x[2]
        A, _ = self._metric_functions(r)
        c = self.constants.c
        return jnp.diag(jnp.array([-c ** 2 * self.lapse_factor(r) ** 2, 1.0 / A,
                                   r ** 2, r ** 2 * jnp.sin(theta) ** 2]))

    def pressure_at(self, r):
        A, B = self._metric_functions(r)
        return self.energy_density * (jnp.sqrt(A) - jnp.sqrt(B)) / (3.0 * jnp.sqrt(B) - jnp.sqrt(A))

    @property
    def central_pressure(self):
        return self.pressure_at(0.0)

    def enclosed_mass(self, r):
        return self.mass * (r / self.radius) ** 3

    def velocity(self, x):
        return jnp.zeros(4).at[0].set(1.0 / self.lapse_factor(x[1]))

    def energy(self, x):
        return self.energy_density + 0.0 * x[1]

    def pressure(self, x):
        return self.pressure_at(x[1])

    # ------------------------------------------------------------
    # Hydrostatic balance
    # ------------------------------------------------------------

    def tov_rhs(self, r, p):
        """dp/dr = -G (eps + p)(m + 4 pi r^3 p / c^2) / (c^2 r^2 (1 - 2 G m / (r c^2)))."""
        G, c = self.constants.G, self.constants.c
        m = self.enclosed_mass(r)
        return (-G * (self.energy_density + p) * (m + 4.0 * math.pi * r ** 3 * p / c ** 2)
                / (c ** 2 * r ** 2 * (1.0 - 2.0 * G * m / (r * c ** 2))))

    def tov_check(self, samples: int = 33) -> TOVCheck:
        """Closed-form p against the TOV balance (AD) and against a solve_ivp integration."""
        p_c = float(self.central_pressure)
        radii = np.linspace(0.05 * self.radius, self.radius, samples)
        slope = jax.vmap(jax.grad(self.pressure_at))(jnp.asarray(radii))
        rhs = jax.vmap(lambda r: self.tov_rhs(r, self.pressure_at(r)))(jnp.asarray(radii))
        balance = float(jnp.max(jnp.abs(slope - rhs))) / p_c

        start = 1e-6 * self.radius
        solution = solve_ivp(lambda r, p: [float(self.tov_rhs(r, p[0]))], (start, self.radius),
                             [float(self.pressure_at(start))], t_eval=radii, rtol=1e-11, atol=1e-14 * p_c,
                             method="DOP853")
        if not solution.success:
            raise DomainError(f"TOV integration failed: {solution.message}")
        closed = np.asarray(jax.vmap(self.pressure_at)(jnp.asarray(radii)))
        integration = float(np.max(np.abs(solution.y[0] - closed))) / p_c
        return TOVCheck(balance, integration)
