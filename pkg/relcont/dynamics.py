"""
Continuum Dynamics for relcont
==============================

Stress-energy-momentum assembly, reduced Euler-Lagrange residuals in the
Eulerian and convective pictures, the explicit Euler / Euler-Cauchy and
energy equations, continuity (advection) residuals and boundary tractions.

Stress tensors are (1, 1) densities stored as T[nu, mu] = T^nu_mu.

Usage:
    from relcont.dynamics import ContinuumFields, ContinuumModel, eulerian_el_residual

    fields = ContinuumFields.from_tube(lagrangian, tube, refs, metric)
    residual = eulerian_el_residual(ContinuumModel(fields), points)
"""

from abc import ABC, abstractmethod
from typing import Callable, NamedTuple, Optional

import jax
import jax.numpy as jnp
import numpy as np

from relcont.errors import ContractViolation, InconsistentStateError
from relcont.geometry import (
    Connection,
    MetricField,
    TensorField,
    covariant_derivative,
    divergence,
    hat_components,
    hat_pairing,
    lie_derivative,
)
from relcont.lagrangians import ContinuumLagrangian, ContinuumState
from relcont.models import DerivativeMode
from relcont.numerics import concrete, evaluate_points, residual_norms
from relcont.worldtube import ReferenceFields, WorldTube, projection_from_generalized, pullback, pushforward_field


# ============================================================
# Residual fields
# ============================================================

class ResidualField:
    """Residual values at sample points with their max-abs and L2 norms."""

    def __init__(self, name: str, values, points, mode: DerivativeMode, tolerance: Optional[float] = None):
        self.name = name
        self.values = np.asarray(values, dtype=float)
        self.points = np.asarray(points, dtype=float)
        self.mode = DerivativeMode(mode)
        self.tolerance = tolerance

    @property
    def max_residual(self) -> float:
        return residual_norms(self.values)[0]

    @property
    def l2_residual(self) -> float:
        return residual_norms(self.values)[1]

    @property
    def passed(self) -> bool:
        return self.tolerance is not None and self.max_residual < self.tolerance

    def __repr__(self) -> str:
        return f"ResidualField({self.name!r}, max={self.max_residual:.3e}, mode={self.mode.value})"


def sample_residual(name: str, fn: Callable, points, exact: bool, tolerance: Optional[float] = None) -> ResidualField:
    values = evaluate_points(fn, points, exact)
    mode = DerivativeMode.EXACT if exact else DerivativeMode.FD
    return ResidualField(name, values, points, mode, tolerance)


# ============================================================
# Continuum state fields
# ============================================================

class ContinuumFields:
    """Eulerian fields (w, rho_bar, s_bar, c) and the metric on the spacetime chart."""

    def __init__(self, lagrangian: ContinuumLagrangian, metric: MetricField, w: TensorField, mass: TensorField,
                 entropy: Optional[TensorField] = None, cauchy: Optional[TensorField] = None,
                 name: str = "continuum"):
        if w.rank != (1, 0) or mass.rank != (0, 0) or mass.weight != 1:
            raise ContractViolation(f"{name}: expected w (1,0) and a weight-1 scalar mass density")
        self.lagrangian = lagrangian
        self.metric = metric
        self.w = w
        self.mass = mass
        self.entropy = entropy
        self.cauchy = cauchy
        self.name = name

    @classmethod
    def from_tube(cls, lagrangian: ContinuumLagrangian, tube: WorldTube, refs: ReferenceFields,
                  metric: MetricField, name: Optional[str] = None) -> "ContinuumFields":
        """Push the reference fields forward by the world-tube."""
        cauchy = None if refs.body_metric is None else pushforward_field(tube, refs.body_metric, name="c")
        return cls(lagrangian, metric,
                   pushforward_field(tube, refs.velocity, name="w"),
                   pushforward_field(tube, refs.mass, name="rho_bar"),
                   pushforward_field(tube, refs.entropy, name="s_bar"),
                   cauchy, name=name or f"{lagrangian.name} on {tube.name}")

    @property
    def chart(self):
        return self.metric.chart

    @property
    def exact(self) -> bool:
        parts = [self.w, self.mass, self.metric, self.entropy, self.cauchy]
        return all(f.differentiable for f in parts if f is not None)

    def state(self, x) -> ContinuumState:
        w = self.w(x)
        dim = self.chart.dimension
        s_bar = 0.0 * self.mass(x) if self.entropy is None else self.entropy(x)
        cauchy = jnp.zeros((dim, dim)) if self.cauchy is None else self.cauchy(x)
        return ContinuumState(w, self.mass(x), s_bar, cauchy, self.metric(x))

    def black_box(self) -> "ContinuumFields":
        bb = lambda f: None if f is None else f.black_box()
        return ContinuumFields(self.lagrangian, self.metric.black_box(), self.w.black_box(), self.mass.black_box(),
                               bb(self.entropy), bb(self.cauchy), name=f"{self.name} (fd)")


# ============================================================
# Stress-energy-momentum
# ============================================================

class StressEnergy(NamedTuple):
    total: jnp.ndarray           # generic assembly from the Lagrangian partials
    split: jnp.ndarray           # (p delta + (eps + p) u u_flat / c^2 - t_el) mu(g)
    metric_route: jnp.ndarray    # 2 g . dl/dg
    energy_density: jnp.ndarray  # eps_tot
    pressure: jnp.ndarray
    velocity: jnp.ndarray        # u
    elastic: jnp.ndarray         # t_el, (1, 1), orthogonal to u


def elastic_stress(lagrangian: ContinuumLagrangian, state: ContinuumState, rho):
    """t_el = 2 rho (d varpi / d g at fixed w, c) . g."""
    w, _, _, cauchy, g = state
    if lagrangian.stored is None:
        return jnp.zeros_like(g)
    d = jax.grad(lambda gg: lagrangian.stored.energy(projection_from_generalized(gg, w), cauchy))(g)
    return 2.0 * rho * (0.5 * (d + d.T)) @ g


def stress_energy(lagrangian: ContinuumLagrangian, state: ContinuumState) -> StressEnergy:
    w, rho_bar, s_bar, cauchy, g = state
    light = lagrangian.light_speed
    dim = g.shape[0]
    delta = jnp.eye(dim)
    parts = lagrangian.partials(state)

    d_cauchy = 0.5 * (parts.d_cauchy + parts.d_cauchy.T)
    total = ((parts.value - rho_bar * parts.d_rho - s_bar * parts.d_s) * delta
             + jnp.outer(w, parts.d_w) - 2.0 * d_cauchy @ cauchy)
    metric_route = 2.0 * (0.5 * (parts.d_metric + parts.d_metric.T)) @ g

    kin = lagrangian.kinematics(w, rho_bar, s_bar, g)
    u = light * w / kin.lapse
    e = lagrangian.internal_energy(kin.rho, kin.eta)
    e_rho, _ = lagrangian.energy_partials(kin.rho, kin.eta)
    varpi = 0.0
    if lagrangian.stored is not None:
        varpi = lagrangian.stored.energy(projection_from_generalized(g, w), cauchy)
    eps = kin.rho * (light ** 2 + e + varpi)
    pressure = kin.rho ** 2 * e_rho
    t_el = elastic_stress(lagrangian, state, kin.rho)
    split = (pressure * delta + (eps + pressure) * jnp.outer(u, g @ u) / light ** 2 - t_el) * kin.volume
    return StressEnergy(total, split, metric_route, eps, pressure, u, t_el)


def check_consistent_state(lagrangian: ContinuumLagrangian, state: ContinuumState, tolerance: float = 1e-8) -> None:
    """u normalizable and i_w c = 0 (concrete states only)."""
    w, _, _, cauchy, g = state
    norm2 = concrete(w @ g @ w)
    if norm2 is not None and not norm2 < 0:
        raise InconsistentStateError(f"{lagrangian.name}: w is not timelike (g(w,w) = {float(norm2):.3e})")
    leak = concrete(jnp.max(jnp.abs(cauchy @ w)))
    if leak is not None and float(leak) > tolerance * (1.0 + float(np.max(np.abs(concrete(cauchy))))):
        raise InconsistentStateError(f"{lagrangian.name}: i_w c = {float(leak):.3e}, the Cauchy tensor must annihilate w")


# ============================================================
# Matter models
# ============================================================

class MatterModel(ABC):
    """Matter on a spacetime chart described by its stress-energy (1, 1) density."""

    metric: MetricField
    light_speed: float = 1.0
    name: str = "matter"

    @property
    def chart(self):
        return self.metric.chart

    @property
    def exact(self) -> bool:
        return self.metric.differentiable

    @abstractmethod
    def stress(self, x) -> StressEnergy:
        pass

    @abstractmethod
    def action_density(self, x):
        """Matter Lagrangian density ell at x."""
        pass

    def metric_derivative(self, x):
        """Symmetric dl/dg as a (2, 0) density, recovered from T = 2 g . dl/dg."""
        T = self.stress(x).metric_route
        g_inv = jnp.linalg.inv(self.metric(x))
        d = 0.5 * T @ g_inv
        return 0.5 * (d + d.T)

    def stress_field(self, route: str = "total") -> TensorField:
        return TensorField(lambda x: getattr(self.stress(x), route), self.chart, 1, 1, 1, self.exact,
                           name=f"T[{self.name}]")

    def velocity_field(self) -> TensorField:
        return TensorField(lambda x: self.stress(x).velocity, self.chart, 1, 0, 0, self.exact, name="u")

    def energy_field(self) -> TensorField:
        return TensorField(lambda x: self.stress(x).energy_density, self.chart, 0, 0, 0, self.exact, name="eps")

    def inner_stress_field(self) -> TensorField:
        """Rest-frame stress t = -p P + t_el as a (1, 1) tensor field."""
        def components(x):
            s = self.stress(x)
            g = self.metric(x)
            mixed = jnp.eye(g.shape[0]) + jnp.outer(s.velocity, g @ s.velocity) / self.light_speed ** 2
            return -s.pressure * mixed + s.elastic
        return TensorField(components, self.chart, 1, 1, 0, self.exact, name="t")


class ContinuumModel(MatterModel):
    """Matter given by a continuum Lagrangian and its Eulerian fields."""

    def __init__(self, fields: ContinuumFields):
        self.fields = fields
        self.metric = fields.metric
        self.lagrangian = fields.lagrangian
        self.light_speed = fields.lagrangian.light_speed
        self.name = fields.name

    @property
    def exact(self) -> bool:
        return self.fields.exact

    def state(self, x) -> ContinuumState:
        return self.fields.state(x)

    def stress(self, x) -> StressEnergy:
        return stress_energy(self.lagrangian, self.fields.state(x))

    def action_density(self, x):
        return self.lagrangian.density(self.fields.state(x))

    def metric_derivative(self, x):
        d = self.lagrangian.partials(self.fields.state(x)).d_metric
        return 0.5 * (d + d.T)

    def black_box(self) -> "ContinuumModel":
        return ContinuumModel(self.fields.black_box())


class PerfectFluidModel(MatterModel):
    """Perfect fluid given directly by u (normalized), eps_tot and p profiles."""

    def __init__(self, metric: MetricField, velocity: Callable, energy_density: Callable, pressure: Callable,
                 light_speed: float = 1.0, name: str = "perfect_fluid"):
        self.metric = metric
        self._velocity = velocity
        self._energy = energy_density
        self._pressure = pressure
        self.light_speed = light_speed
        self.name = name
        self._differentiable = metric.differentiable

    @property
    def exact(self) -> bool:
        return self._differentiable

    def stress(self, x) -> StressEnergy:
        g = self.metric(x)
        u = self._velocity(x)
        eps = self._energy(x)
        p = self._pressure(x)
        volume = jnp.sqrt(jnp.abs(jnp.linalg.det(g)))
        dim = g.shape[0]
        T = (p * jnp.eye(dim) + (eps + p) * jnp.outer(u, g @ u) / self.light_speed ** 2) * volume
        return StressEnergy(T, T, T, eps, p, u, jnp.zeros((dim, dim)))

    def action_density(self, x):
        """On-shell perfect-fluid Lagrangian -eps_tot mu(g)."""
        return -self._energy(x) * self.metric.volume_density(x)

    def black_box(self) -> "PerfectFluidModel":
        model = PerfectFluidModel(self.metric.black_box(), lambda x: np.asarray(self._velocity(x)),
                                  lambda x: np.asarray(self._energy(x)), lambda x: np.asarray(self._pressure(x)),
                                  self.light_speed, name=f"{self.name} (fd)")
        model._differentiable = False
        return model


# ============================================================
# Euler-Lagrange residuals
# ============================================================

class ELResidual(NamedTuple):
    generic: ResidualField       # div(ell delta + w (x) dl/dw - dl/dkappa : kappa_hat)
    metric_form: ResidualField   # div(2 g . dl/dg)
    agreement: float             # max |generic - metric_form|


def eulerian_el_residual(model: MatterModel, points) -> ELResidual:
    """Covariant divergence of the stress-energy density (Levi-Civita connection of the metric).

    With the Levi-Civita connection the explicit-x and dl/dgamma . nabla gamma
    terms vanish, so the reduced Euler-Lagrange residual is div T.
    """
    connection = Connection(model.metric)
    generic_field = model.stress_field("total")
    metric_field = model.stress_field("metric_route")
    exact = model.exact

    def both(x):
        return jnp.stack([divergence(generic_field, connection, x), divergence(metric_field, connection, x)])

    values = np.asarray(evaluate_points(both, points, exact))
    mode = DerivativeMode.EXACT if exact else DerivativeMode.FD
    generic = ResidualField("eulerian_el", values[:, 0], points, mode)
    metric_form = ResidualField("eulerian_el_metric", values[:, 1], points, mode)
    agreement = residual_norms(values[:, 0] - values[:, 1])[0]
    return ELResidual(generic, metric_form, agreement)


class BalanceResidual(NamedTuple):
    momentum: ResidualField  # covector
    energy: ResidualField    # scalar
    divergence: ResidualField  # div T / mu(g), for comparison


def _balance_residual(model: MatterModel, points, label: str) -> BalanceResidual:
    """c^-2 (eps nabla_u u + u t:nabla u) - div t and div(eps u) - t:nabla u."""
    connection = Connection(model.metric)
    u_field = model.velocity_field()
    eps_field = model.energy_field()
    t_field = model.inner_stress_field()
    T_field = model.stress_field("total")
    light2 = model.light_speed ** 2
    chart = model.chart
    exact = model.exact
    flux = TensorField(lambda x: eps_field(x) * u_field(x), chart, 1, 0, 0, exact, name="eps u")

    def evaluate(x):
        g = model.metric(x)
        u = u_field(x)
        du = covariant_derivative(u_field, connection, x)  # [lam, nu] = nabla_lam u^nu
        t = t_field(x)
        accel = g @ (u @ du)
        t_grad_u = jnp.einsum("nm,nm->", t, du)
        div_t = jnp.trace(covariant_derivative(t_field, connection, x), axis1=0, axis2=1)
        momentum = (eps_field(x) * accel + (g @ u) * t_grad_u) / light2 - div_t
        energy = jnp.trace(covariant_derivative(flux, connection, x)) - t_grad_u
        div_T = divergence(T_field, connection, x) / model.metric.volume_density(x)
        return jnp.concatenate([momentum, jnp.atleast_1d(energy), div_T])

    values = np.asarray(evaluate_points(evaluate, points, exact))
    dim = chart.dimension
    mode = DerivativeMode.EXACT if exact else DerivativeMode.FD
    return BalanceResidual(
        ResidualField(f"{label}_momentum", values[:, :dim], points, mode),
        ResidualField(f"{label}_energy", values[:, dim], points, mode),
        ResidualField(f"{label}_divergence", values[:, dim + 1:], points, mode),
    )


def fluid_equations_residual(model: MatterModel, points) -> BalanceResidual:
    """c^-2 (eps + p) nabla_u u + P grad p and div(eps u) + p div u."""
    return _balance_residual(model, points, "euler")


def elastic_equations_residual(model: MatterModel, points) -> BalanceResidual:
    """Euler-Cauchy momentum and energy residuals with the elastic stress t_el."""
    return _balance_residual(model, points, "euler_cauchy")


def euler_projection_residual(model: MatterModel, balance: BalanceResidual) -> float:
    """max |u . momentum|; the projector kills the flow direction."""
    worst = 0.0
    for x, momentum in zip(balance.momentum.points, balance.momentum.values):
        u = np.asarray(model.velocity_field()(x))
        worst = max(worst, abs(float(u @ momentum)))
    return worst


# ============================================================
# Continuity
# ============================================================

class ContinuityResidual(NamedTuple):
    generalized: ResidualField  # L_w kappa
    proper: ResidualField       # L_u kappa (or L_u (rho mu(g)) for the mass)


def continuity_residual(fields: ContinuumFields, quantity: str, points) -> ContinuityResidual:
    """Advection of rho_bar, s_bar or c along w, and the equivalent u-form."""
    lagrangian = fields.lagrangian
    light = lagrangian.light_speed
    chart = fields.chart
    exact = fields.exact

    def lapse(x):
        w = fields.w(x)
        return jnp.sqrt(-(w @ fields.metric(x) @ w))

    u_field = TensorField(lambda x: light * fields.w(x) / lapse(x), chart, 1, 0, 0, exact, name="u")
    if quantity == "mass":
        kappa = fields.mass
        proper = TensorField(lambda x: fields.mass(x) * lapse(x) / light, chart, 0, 0, 1, exact, name="rho mu")
    elif quantity == "entropy":
        if fields.entropy is None:
            raise ContractViolation(f"{fields.name}: no entropy density to advect")
        kappa = fields.entropy
        proper = TensorField(lambda x: fields.entropy(x) * lapse(x) / light, chart, 0, 0, 1, exact, name="s mu")
    elif quantity == "cauchy":
        if fields.cauchy is None:
            raise ContractViolation(f"{fields.name}: no Cauchy deformation tensor to advect")
        kappa = fields.cauchy
        proper = fields.cauchy
    else:
        raise ContractViolation(f"unknown advected quantity {quantity!r}; use mass, entropy or cauchy")

    generalized = sample_residual(f"continuity_{quantity}", lambda x: lie_derivative(kappa, fields.w, x), points, exact)
    proper_form = sample_residual(f"continuity_{quantity}_u", lambda x: lie_derivative(proper, u_field, x), points, exact)
    return ContinuityResidual(generalized, proper_form)


# ============================================================
# Boundary tractions
# ============================================================

def boundary_traction_residual(model: MatterModel, surface) -> ResidualField:
    """|t_el(., n_flat) - p n_flat|_g at the surface quadrature nodes (|p| for fluids)."""
    from relcont.hypersurface import induced_geometry

    values = []
    for s in np.asarray(surface.rule.points, dtype=float):
        geo = induced_geometry(surface, s)
        x = surface.embedding(jnp.asarray(s))
        stress = model.stress(x)
        g = model.metric(x)
        n_flat = g @ geo.normal
        traction = n_flat @ stress.elastic - stress.pressure * n_flat
        values.append(float(np.sqrt(abs(float(traction @ jnp.linalg.inv(g) @ traction)))))
    mode = DerivativeMode.EXACT if model.exact else DerivativeMode.FD
    return ResidualField("boundary_traction", values, surface.rule.points, mode)


# ============================================================
# Convective picture
# ============================================================

class ConvectiveFields:
    """Reference fields W, R, S, G and Gamma = Phi^* g on the reference block."""

    def __init__(self, lagrangian: ContinuumLagrangian, refs: ReferenceFields, gamma: MetricField):
        self.lagrangian = lagrangian
        self.refs = refs
        self.gamma = gamma

    @classmethod
    def from_tube(cls, lagrangian: ContinuumLagrangian, tube: WorldTube, refs: ReferenceFields,
                  metric: MetricField) -> "ConvectiveFields":
        gamma = MetricField(lambda X: pullback(tube, metric, X), tube.domain_chart, metric.signature,
                            metric.differentiable, name="Gamma")
        return cls(lagrangian, refs, gamma)

    @property
    def exact(self) -> bool:
        parts = [self.gamma, self.refs.velocity, self.refs.mass, self.refs.entropy, self.refs.body_metric]
        return all(f.differentiable for f in parts if f is not None)

    def arguments(self, X):
        W, R, S, G = self.refs.at(X)
        dim = self.gamma.dimension
        return W, R, S, (jnp.zeros((dim, dim)) if G is None else G), self.gamma(X)

    def density(self, W, R, S, G, Gamma):
        reference = None if self.refs.body_metric is None else G
        return self.lagrangian.convective_density(W, R, S, reference, Gamma)


def convective_el_residual(fields: ConvectiveFields, points) -> ResidualField:
    """div(L delta - dL/dGamma : Gamma_hat) - dL/dW . nabla W - dL/dK . nabla K on D."""
    gamma = fields.gamma
    connection = Connection(gamma)
    refs = fields.refs
    chart = gamma.chart
    dim = chart.dimension
    exact = fields.exact
    grads = jax.grad(fields.density, argnums=(0, 1, 2, 3, 4))

    def flux(X):
        args = fields.arguments(X)
        value = fields.density(*args)
        d_gamma = grads(*args)[4]
        return value * jnp.eye(dim) - hat_pairing(d_gamma, hat_components(args[4], 0, 2, 0, dim), 0, 2)

    flux_field = TensorField(flux, chart, 1, 1, 1, exact, name="convective flux")
    G_field = refs.body_metric or TensorField(lambda X: jnp.zeros((dim, dim)) + 0.0 * X[0], chart, 0, 2, name="G")

    def residual(X):
        d_W, d_R, d_S, d_G, _ = grads(*fields.arguments(X))
        transport = (covariant_derivative(refs.velocity, connection, X) @ d_W
                     + covariant_derivative(refs.mass, connection, X) * d_R
                     + covariant_derivative(refs.entropy, connection, X) * d_S
                     + jnp.einsum("lab,ab->l", covariant_derivative(G_field, connection, X), d_G))
        return divergence(flux_field, connection, X) - transport

    return sample_residual("convective_el", residual, points, exact)
