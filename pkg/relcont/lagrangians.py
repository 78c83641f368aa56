"""
Continuum Lagrangians for relcont
=================================

Fluid, elastic and general-continuum Lagrangian densities in material,
convective and Eulerian form, their partial derivatives (closed form and
automatic), and numerical covariance checks.

All densities are handled through their chart components: the Eulerian
density is ell = -(N/c) rho_bar (c^2 + e(rho, eta) + varpi(c, p)) with
N = sqrt(-g(w, w)), rho = N rho_bar / (c sqrt|det g|) and eta = s_bar / rho_bar.

Usage:
    from relcont.lagrangians import ContinuumLagrangian, LinearEnergy, ContinuumState

    lagrangian = ContinuumLagrangian(eos=LinearEnergy(0.2))
    partials = lagrangian.partials(state)
"""

from abc import ABC, abstractmethod
from typing import Callable, Dict, NamedTuple, Optional

import jax
import jax.numpy as jnp
import numpy as np

from relcont.errors import ContractViolation, DomainError, SignatureError
from relcont.geometry import TensorField, hat_components, hat_pairing
from relcont.numerics import concrete, generalized_inverse
from relcont.worldtube import ReferenceFields, WorldTube


# ============================================================
# Equations of state
# ============================================================

class EquationOfState(ABC):
    """Specific internal energy e(rho, eta) with analytic partials."""
    name = "eos"

    @abstractmethod
    def energy(self, rho, eta):
        pass

    @abstractmethod
    def partials(self, rho, eta):
        """(de/drho, de/deta)"""
        pass

    def pressure(self, rho, eta):
        return rho ** 2 * self.partials(rho, eta)[0]


class Dust(EquationOfState):
    name = "dust"

    def energy(self, rho, eta):
        return 0.0 * rho

    def partials(self, rho, eta):
        return 0.0 * rho, 0.0 * rho


class LinearEnergy(EquationOfState):
    """e = K rho, so p = K rho^2."""
    name = "linear"

    def __init__(self, coefficient: float = 0.2):
        self.coefficient = coefficient

    def energy(self, rho, eta):
        return self.coefficient * rho

    def partials(self, rho, eta):
        return self.coefficient + 0.0 * rho, 0.0 * rho


class Polytrope(EquationOfState):
    """e = K rho^(Gamma-1) / (Gamma-1), so p = K rho^Gamma."""
    name = "polytrope"

    def __init__(self, coefficient: float = 1.0, exponent: float = 5.0 / 3.0):
        if exponent <= 1.0:
            raise DomainError(f"polytropic exponent must exceed 1, got {exponent}")
        self.coefficient = coefficient
        self.exponent = exponent

    def energy(self, rho, eta):
        return self.coefficient * rho ** (self.exponent - 1.0) / (self.exponent - 1.0)

    def partials(self, rho, eta):
        return self.coefficient * rho ** (self.exponent - 2.0), 0.0 * rho


class EntropicGas(EquationOfState):
    """e = K exp(eta) rho^(Gamma-1) / (Gamma-1)."""
    name = "entropic_gas"

    def __init__(self, coefficient: float = 1.0, exponent: float = 5.0 / 3.0):
        if exponent <= 1.0:
            raise DomainError(f"adiabatic exponent must exceed 1, got {exponent}")
        self.coefficient = coefficient
        self.exponent = exponent

    def energy(self, rho, eta):
        return self.coefficient * jnp.exp(eta) * rho ** (self.exponent - 1.0) / (self.exponent - 1.0)

    def partials(self, rho, eta):
        e_rho = self.coefficient * jnp.exp(eta) * rho ** (self.exponent - 2.0)
        return e_rho, self.energy(rho, eta)


EOS_FAMILIES: Dict[str, Callable[..., EquationOfState]] = {
    "dust": Dust,
    "linear": LinearEnergy,
    "polytrope": Polytrope,
    "entropic_gas": EntropicGas,
}


# ============================================================
# Stored energies
# ============================================================

class StoredEnergy(ABC):
    """Specific stored energy of a pair (metric-like A, reference B).

    Eulerian use passes (p, c); material use passes (C, G). Both tensors are
    degenerate along the flow, so invariants are taken with a generalized inverse.
    """
    name = "stored"
    isotropic = True

    @abstractmethod
    def energy(self, metric_like, reference):
        pass


def cauchy_invariants(metric_like, reference, count: int):
    """tr((A^+ B)^k) for k = 1..count."""
    m = generalized_inverse(metric_like) @ reference
    invariants = []
    power = m
    for _ in range(count):
        invariants.append(jnp.trace(power))
        power = power @ m
    return invariants


class NullStoredEnergy(StoredEnergy):
    name = "null"

    def energy(self, metric_like, reference):
        return 0.0 * jnp.sum(reference)


class SaintVenantKirchhoff(StoredEnergy):
    """1/4 mu tr((M - P)^2) + lambda/8 (tr(M - P))^2 with M = A^+ B."""
    name = "saint_venant_kirchhoff"

    def __init__(self, shear: float = 1.0, lame: float = 0.0):
        self.shear = shear
        self.lame = lame

    def energy(self, metric_like, reference):
        n = metric_like.shape[0] - 1
        i1, i2 = cauchy_invariants(metric_like, reference, 2)
        return 0.25 * self.shear * (i2 - 2.0 * i1 + n) + 0.125 * self.lame * (i1 - n) ** 2


class FiberStoredEnergy(StoredEnergy):
    """kappa (A(V, V) - B(V, V))^2 for a fixed body direction V; not isotropic."""
    name = "fiber"
    isotropic = False

    def __init__(self, direction=(0.0, 1.0, 0.0, 0.0), stiffness: float = 1.0):
        self.direction = jnp.asarray(direction, dtype=jnp.float64)
        self.stiffness = stiffness

    def energy(self, metric_like, reference):
        v = self.direction
        return self.stiffness * (v @ metric_like @ v - v @ reference @ v) ** 2


STORED_ENERGY_FAMILIES: Dict[str, Callable[..., StoredEnergy]] = {
    "null": NullStoredEnergy,
    "saint_venant_kirchhoff": SaintVenantKirchhoff,
    "fiber": FiberStoredEnergy,
}


def isotropy_residual(stored: StoredEnergy, cauchy, projector_lower):
    """max |d varpi/dc . c + d varpi/dp . p| (mixed components)."""
    d_p, d_c = jax.grad(lambda p, c: stored.energy(p, c), argnums=(0, 1))(projector_lower, cauchy)
    return jnp.max(jnp.abs(d_c @ cauchy + d_p @ projector_lower))


# ============================================================
# Continuum Lagrangian
# ============================================================

class ContinuumState(NamedTuple):
    """Eulerian arguments at one point (chart components)."""
    w: jnp.ndarray
    rho_bar: jnp.ndarray
    s_bar: jnp.ndarray
    cauchy: jnp.ndarray
    metric: jnp.ndarray


class LagrangianPartials(NamedTuple):
    value: jnp.ndarray
    d_w: jnp.ndarray       # (0, 1)
    d_rho: jnp.ndarray     # scalar
    d_s: jnp.ndarray       # scalar
    d_cauchy: jnp.ndarray  # (2, 0)
    d_metric: jnp.ndarray  # (2, 0), entrywise


class Kinematics(NamedTuple):
    lapse: jnp.ndarray    # N = sqrt(-g(w, w))
    volume: jnp.ndarray   # sqrt|det g|
    rho: jnp.ndarray      # proper rest-mass density
    eta: jnp.ndarray      # specific entropy


def _check_timelike(norm2, where: str) -> None:
    value = concrete(norm2)
    if value is not None and not value < 0:
        raise SignatureError(f"{where}: velocity is not timelike (norm {float(value):.3e})")


def _check_density(rho_bar, where: str) -> None:
    value = concrete(rho_bar)
    if value is not None and not value > 0:
        raise DomainError(f"{where}: mass density must be positive, got {float(value):.3e}")


class ContinuumLagrangian:
    """ell = -(N/c) rho_bar (c^2 + e(rho, eta) + varpi(c, p)).

    A fluid has no stored energy, an elastic body has no equation of state,
    a general continuum has both; dust has neither.
    """

    def __init__(self, eos: Optional[EquationOfState] = None, stored: Optional[StoredEnergy] = None,
                 light_speed: float = 1.0, name: Optional[str] = None):
        self.eos = eos
        self.stored = stored
        self.light_speed = light_speed
        parts = [p.name for p in (eos, stored) if p is not None]
        self.name = name or ("+".join(parts) if parts else "dust")

    # ------------------------------------------------------------
    # Building blocks
    # ------------------------------------------------------------

    def kinematics(self, w, rho_bar, s_bar, g) -> Kinematics:
        norm2 = w @ g @ w
        lapse = jnp.sqrt(-norm2)
        volume = jnp.sqrt(jnp.abs(jnp.linalg.det(g)))
        rho = lapse * rho_bar / (self.light_speed * volume)
        return Kinematics(lapse, volume, rho, s_bar / rho_bar)

    def internal_energy(self, rho, eta):
        if self.eos is None:
            return 0.0 * rho
        return self.eos.energy(rho, eta)

    def energy_partials(self, rho, eta):
        if self.eos is None:
            return 0.0 * rho, 0.0 * rho
        return self.eos.partials(rho, eta)

    def stored_energy(self, metric_like, reference):
        if self.stored is None or reference is None:
            return 0.0
        return self.stored.energy(metric_like, reference)

    # ------------------------------------------------------------
    # Eulerian density
    # ------------------------------------------------------------

    def density_from(self, w, rho_bar, s_bar, cauchy, g):
        if self.stored is not None and not self.stored.isotropic:
            raise ContractViolation(f"{self.stored.name}: anisotropic stored energies have no Eulerian form here")
        norm2 = w @ g @ w
        _check_timelike(norm2, self.name)
        _check_density(rho_bar, self.name)
        kin = self.kinematics(w, rho_bar, s_bar, g)
        w_flat = g @ w
        projector = g - jnp.outer(w_flat, w_flat) / norm2
        total = (self.light_speed ** 2 + self.internal_energy(kin.rho, kin.eta)
                 + self.stored_energy(projector, cauchy))
        return -(kin.lapse / self.light_speed) * rho_bar * total

    def density(self, state: ContinuumState):
        return self.density_from(*state)

    def partials(self, state: ContinuumState) -> LagrangianPartials:
        """Value and all partials by forward/reverse automatic differentiation."""
        value = self.density(state)
        grads = jax.grad(self.density_from, argnums=(0, 1, 2, 3, 4))(*state)
        return LagrangianPartials(value, *grads)

    def closed_form_partials(self, state: ContinuumState) -> LagrangianPartials:
        """Partials from the explicit formulas (stored-energy gradients still by AD)."""
        w, rho_bar, s_bar, cauchy, g = state
        c2 = self.light_speed ** 2
        kin = self.kinematics(w, rho_bar, s_bar, g)
        lapse, volume, rho, eta = kin
        g_inv = jnp.linalg.inv(g)
        w_flat = g @ w
        gww = w @ w_flat
        projector = g - jnp.outer(w_flat, w_flat) / gww

        e = self.internal_energy(rho, eta)
        e_rho, e_eta = self.energy_partials(rho, eta)
        if self.stored is not None:
            varpi = self.stored.energy(projector, cauchy)
            d_varpi_p, d_varpi_c = jax.grad(lambda p, c: self.stored.energy(p, c), argnums=(0, 1))(projector, cauchy)
        else:
            varpi = 0.0
            d_varpi_p = jnp.zeros_like(g)
            d_varpi_c = jnp.zeros_like(g)
        total = c2 + e + varpi
        rest = rho * volume  # = N rho_bar / c

        value = -(lapse / self.light_speed) * rho_bar * total

        # d p_{mn} / d w^l
        dp_dw = (-(jnp.einsum("ml,n->mnl", g, w_flat) + jnp.einsum("m,nl->mnl", w_flat, g)) / gww
                 + 2.0 * jnp.einsum("m,n,l->mnl", w_flat, w_flat, w_flat) / gww ** 2)
        d_w = (rho_bar / (self.light_speed * lapse)) * w_flat * (total + rho * e_rho) \
            - rest * jnp.einsum("mn,mnl->l", d_varpi_p, dp_dw)

        d_rho = -(lapse / self.light_speed) * (total + rho * e_rho - eta * e_eta)
        d_s = -(lapse / self.light_speed) * e_eta
        d_cauchy = -rest * d_varpi_c

        pi_w = d_varpi_p @ w_flat
        pi_dp_dg = (d_varpi_p
                    - (jnp.outer(pi_w, w) + jnp.outer(d_varpi_p.T @ w_flat, w)) / gww
                    + (w_flat @ d_varpi_p @ w_flat) * jnp.outer(w, w) / gww ** 2)
        d_metric = ((rho_bar / (2.0 * self.light_speed * lapse)) * (total + rho * e_rho) * jnp.outer(w, w)
                    + 0.5 * rest * rho * e_rho * g_inv
                    - rest * pi_dp_dg)
        return LagrangianPartials(value, d_w, d_rho, d_s, d_cauchy, d_metric)

    # ------------------------------------------------------------
    # Convective and material densities
    # ------------------------------------------------------------

    def convective_density(self, W, R, S, G, Gamma):
        """L = -(N/c) R (c^2 + e + W_stored(C, G)), N = sqrt(-Gamma(W, W))."""
        norm2 = W @ Gamma @ W
        _check_timelike(norm2, f"{self.name} (convective)")
        lapse = jnp.sqrt(-norm2)
        volume = jnp.sqrt(jnp.abs(jnp.linalg.det(Gamma)))
        rho = lapse * R / (self.light_speed * volume)
        W_flat = Gamma @ W
        right_cauchy_green = Gamma - jnp.outer(W_flat, W_flat) / norm2
        total = (self.light_speed ** 2 + self.internal_energy(rho, S / R)
                 + self.stored_energy(right_cauchy_green, G))
        return -(lapse / self.light_speed) * R * total

    def material_density_from(self, jacobian, g_value, W, R, S, G):
        return self.convective_density(W, R, S, G, jacobian.T @ g_value @ jacobian)


# ============================================================
# Operations
# ============================================================

def fluid_lagrangian(eos: EquationOfState, state: ContinuumState, light_speed: float = 1.0) -> LagrangianPartials:
    return ContinuumLagrangian(eos=eos, light_speed=light_speed).partials(state)


def elastic_lagrangian(stored: StoredEnergy, state: ContinuumState, light_speed: float = 1.0) -> LagrangianPartials:
    return ContinuumLagrangian(stored=stored, light_speed=light_speed).partials(state)


def general_continuum_lagrangian(eos: EquationOfState, stored: StoredEnergy, state: ContinuumState,
                                 light_speed: float = 1.0) -> LagrangianPartials:
    return ContinuumLagrangian(eos=eos, stored=stored, light_speed=light_speed).partials(state)


def material_lagrangian(lagrangian: ContinuumLagrangian, tube: WorldTube, refs: ReferenceFields, metric, X):
    W, R, S, G = refs.at(X)
    return lagrangian.material_density_from(tube.jacobian(X), metric(tube(X)), W, R, S, G)


def convective_lagrangian(lagrangian: ContinuumLagrangian, W, R, S, Gamma, G=None):
    return lagrangian.convective_density(W, R, S, G, Gamma)


def eulerian_state(tube: WorldTube, refs: ReferenceFields, metric, X) -> ContinuumState:
    """Push the reference fields forward to Phi(X) without inverting the tube."""
    jac = tube.jacobian(X)
    jac_inv = jnp.linalg.inv(jac)
    det = jnp.abs(jnp.linalg.det(jac))
    W, R, S, G = refs.at(X)
    dim = jac.shape[0]
    cauchy = jnp.zeros((dim, dim)) if G is None else jac_inv.T @ G @ jac_inv
    return ContinuumState(jac @ W, R / det, S / det, cauchy, metric(tube(X)))


def particle_lagrangian(g_value, velocity, mass: float, light_speed: float = 1.0):
    """-c sqrt(-g(x', x')) m, the point-particle Lagrangian."""
    return -light_speed * jnp.sqrt(-(velocity @ g_value @ velocity)) * mass


def covariance_check(lagrangian: ContinuumLagrangian, kind: str, diffeo: Callable, tube: WorldTube,
                     refs: ReferenceFields, metric, points) -> float:
    """Max |L(transformed arguments) - transformed L| over ``points`` (points in D).

    ``kind="spacetime"``: diffeo psi of M, compare L(j(psi o Phi), W, K, psi_* g o psi o Phi) with L(j Phi, ...).
    ``kind="material"``: diffeo phi of D, compare L(j(Phi o phi), phi^* W, phi^* K, g o Phi o phi) with phi^*[L].
    """
    if kind not in ("spacetime", "material"):
        raise ContractViolation(f"covariance kind must be 'spacetime' or 'material', got {kind!r}")
    diffeo_jacobian = jax.jacfwd(lambda y: diffeo(jnp.asarray(y, dtype=jnp.float64)))

    def residual(X):
        X = jnp.asarray(X, dtype=jnp.float64)
        if kind == "spacetime":
            x = tube(X)
            jac = tube.jacobian(X)
            g_value = metric(x)
            d_psi = diffeo_jacobian(x)
            d_psi_inv = jnp.linalg.inv(d_psi)
            pushed_g = d_psi_inv.T @ g_value @ d_psi_inv
            W, R, S, G = refs.at(X)
            lhs = lagrangian.material_density_from(d_psi @ jac, pushed_g, W, R, S, G)
            rhs = lagrangian.material_density_from(jac, g_value, W, R, S, G)
        else:
            Y = diffeo(X)
            d_phi = diffeo_jacobian(X)
            d_phi_inv = jnp.linalg.inv(d_phi)
            det = jnp.abs(jnp.linalg.det(d_phi))
            W, R, S, G = refs.at(Y)
            pulled_G = None if G is None else d_phi.T @ G @ d_phi
            jac = tube.jacobian(Y) @ d_phi
            g_value = metric(tube(Y))
            lhs = lagrangian.material_density_from(jac, g_value, d_phi_inv @ W, R * det, S * det, pulled_G)
            rhs = lagrangian.material_density_from(tube.jacobian(Y), g_value, W, R, S, G) * det
        return jnp.abs(lhs - rhs)

    values = jax.vmap(residual)(jnp.asarray(points, dtype=jnp.float64))
    return float(jnp.max(values))


class CovarianceIdentity(NamedTuple):
    residual: jnp.ndarray            # max |sum of hat pairings - ell delta|
    metric_hat_residual: jnp.ndarray  # max |dl/dg : g_hat - 2 g . dl/dg|
    stress_from_metric: jnp.ndarray   # dl/dg : g_hat, (1, 1) [nu, mu]
    stress_generic: jnp.ndarray       # ell delta + w (x) dl/dw - dl/dkappa : kappa_hat


def spacetime_covariance_identity(lagrangian: ContinuumLagrangian, state: ContinuumState) -> CovarianceIdentity:
    """-w (x) dl/dw + dl/dkappa : kappa_hat + dl/dg : g_hat = ell delta."""
    w, rho_bar, s_bar, cauchy, g = state
    dim = g.shape[0]
    parts = lagrangian.partials(state)
    delta = jnp.eye(dim)

    velocity_term = hat_pairing(parts.d_w, hat_components(w, 1, 0, 0, dim), 1, 0)
    mass_term = parts.d_rho * rho_bar * delta
    entropy_term = parts.d_s * s_bar * delta
    cauchy_term = hat_pairing(parts.d_cauchy, hat_components(cauchy, 0, 2, 0, dim), 0, 2)
    metric_term = hat_pairing(parts.d_metric, hat_components(g, 0, 2, 0, dim), 0, 2)

    matter = velocity_term + mass_term + entropy_term + cauchy_term
    residual = jnp.max(jnp.abs(matter + metric_term - parts.value * delta))

    sym = 0.5 * (parts.d_metric + parts.d_metric.T)
    metric_hat_residual = jnp.max(jnp.abs(metric_term - 2.0 * sym @ g))
    generic = parts.value * delta - matter
    return CovarianceIdentity(residual, metric_hat_residual, metric_term, generic)
