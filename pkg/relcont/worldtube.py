"""
World-tube Embeddings for relcont
=================================

Embeddings Phi of a reference block D = [a, b] x B into spacetime, push-forward
and pull-back of tensor fields, generalized and world velocities, the projector
onto the rest space, and the relativistic deformation tensors.

Usage:
    from relcont.worldtube import boost_tube, velocities

    tube = boost_tube(domain_chart, spacetime_chart, velocity=0.6)
    w, u = velocities(tube, metric, x)
"""

import math
import threading
from typing import Callable, Dict, NamedTuple, Optional

import jax
import jax.numpy as jnp
import numpy as np

from relcont.config import get_settings
from relcont.errors import (
    ContractViolation,
    DegenerateDeformationError,
    DomainError,
    InconsistentStateError,
    InversionError,
    SignatureError,
    SingularMetricError,
)
from relcont.geometry import Chart, MetricField, TensorField, lie_derivative, transform_components
from relcont.log import log
from relcont.numerics import concrete, random_trig_series, trig_values


# ============================================================
# World-tube
# ============================================================

class WorldTube:
    """Smooth embedding Phi: D -> M with Jacobian J[mu, a] = d Phi^mu / d X^a."""

    def __init__(self, map_fn: Callable, domain_chart: Chart, target_chart: Chart, name: str = "tube",
                 inverse_fn: Optional[Callable] = None):
        if domain_chart.dimension != target_chart.dimension:
            raise ContractViolation(
                f"{name}: domain has dimension {domain_chart.dimension}, target {target_chart.dimension}"
            )
        self.map = lambda X: map_fn(jnp.asarray(X, dtype=jnp.float64))
        # closed-form inverse; push-forwards through it stay differentiable
        self.inverse_map = None if inverse_fn is None else (lambda x: inverse_fn(jnp.asarray(x, dtype=jnp.float64)))
        self.domain_chart = domain_chart
        self.target_chart = target_chart
        self.name = name
        self._jacobian = jax.jacfwd(self.map)
        self._map_jit = jax.jit(self.map)
        self._jac_jit = jax.jit(self._jacobian)
        self._cache: Dict[tuple, np.ndarray] = {}
        self._lock = threading.Lock()
        self._seeds: Optional[tuple] = None

    @property
    def dimension(self) -> int:
        return self.domain_chart.dimension

    def __call__(self, X):
        return self.map(X)

    def jacobian(self, X):
        return self._jacobian(jnp.asarray(X, dtype=jnp.float64))

    def velocity(self, X, W=None):
        """Generalized velocity J.W at X (W = d/d lambda by default)."""
        jac = self.jacobian(X)
        if W is None:
            return jac[:, 0]
        return jac @ W

    def check(self, metric: MetricField, points) -> None:
        """Invertible Jacobian and timelike d/d lambda at every point."""
        for X in np.asarray(points, dtype=float):
            jac = np.asarray(self.jacobian(X))
            if abs(np.linalg.det(jac)) < 1e-10:
                raise SingularMetricError(f"{self.name}: Jacobian singular at {X.tolist()}")
            v = jac[:, 0]
            g = np.asarray(metric(np.asarray(self.map(X))))
            if not v @ g @ v < 0:
                raise SignatureError(f"{self.name}: d/d lambda is not timelike at {X.tolist()}")

    # ------------------------------------------------------------
    # Inversion
    # ------------------------------------------------------------

    def _seed(self, x: np.ndarray) -> np.ndarray:
        with self._lock:
            if self._seeds is None:
                per_axis = [np.linspace(lo, hi, 5) for lo, hi in self.domain_chart.bounds]
                mesh = np.meshgrid(*per_axis, indexing="ij")
                grid = np.stack([m.ravel() for m in mesh], axis=-1)
                images = np.asarray(jax.vmap(self.map)(jnp.asarray(grid)))
                self._seeds = (grid, images)
            grid, images = self._seeds
        return grid[np.argmin(np.sum((images - x) ** 2, axis=1))].copy()

    def inverse(self, point) -> np.ndarray:
        """Damped Newton preimage of ``point``; cached per query point."""
        x = np.asarray(point, dtype=float)
        key = tuple(np.round(x, 12))
        cached = self._cache.get(key)
        if cached is not None:
            return cached

        X = self._seed(x)
        residual = x - np.asarray(self._map_jit(X))
        norm = float(np.linalg.norm(residual))
        tol = 1e-12 * max(1.0, float(np.linalg.norm(x)))
        for _ in range(get_settings().newton_iterations):
            if norm < tol:
                break
            step = np.linalg.solve(np.asarray(self._jac_jit(X)), residual)
            damping = 1.0
            while True:
                trial = X + damping * step
                trial_residual = x - np.asarray(self._map_jit(trial))
                trial_norm = float(np.linalg.norm(trial_residual))
                if trial_norm < norm or damping < 1e-3:
                    break
                damping *= 0.5
            X, residual, norm = trial, trial_residual, trial_norm

        if norm >= 1e-9:
            raise InversionError(f"{self.name}: Newton did not converge at {x.tolist()} (residual {norm:.3e})")
        slack = 1e-9 * self.domain_chart.scale
        if not all(lo - slack <= v <= hi + slack for v, (lo, hi) in zip(X, self.domain_chart.bounds)):
            raise InversionError(f"{self.name}: {x.tolist()} is not in the image (preimage {X.tolist()})")

        with self._lock:
            self._cache[key] = X
        return X


# ============================================================
# Push-forward and pull-back
# ============================================================

def pullback(tube: WorldTube, gamma: TensorField, X):
    """Components of Phi^* gamma at X: upper slots via inv(J), lower slots via J."""
    p, q = gamma.rank
    jac = tube.jacobian(X)
    out = transform_components(gamma(tube(X)), p, q, jnp.linalg.inv(jac), jac)
    if gamma.weight:
        out = out * jnp.abs(jnp.linalg.det(jac))
    return out


def pullback_field(tube: WorldTube, gamma: TensorField, name: Optional[str] = None) -> TensorField:
    return TensorField(lambda X: pullback(tube, gamma, X), tube.domain_chart, gamma.contravariant_rank,
                       gamma.covariant_rank, gamma.weight, gamma.differentiable,
                       name=name or f"pullback {gamma.name}")


def pushforward(tube: WorldTube, K: TensorField, point):
    """Components of Phi_* K at x = Phi(X); densities pick up 1/|det J|.

    Uses the tube's closed-form inverse when it has one (jax, differentiable),
    otherwise Newton inversion (numpy).
    """
    p, q = K.rank
    if tube.inverse_map is not None:
        X = tube.inverse_map(point)
        jac = tube.jacobian(X)
        out = transform_components(K(X), p, q, jac, jnp.linalg.inv(jac))
        if K.weight:
            out = out / jnp.abs(jnp.linalg.det(jac))
        return out
    X = tube.inverse(point)
    jac = np.asarray(tube.jacobian(X))
    out = np.asarray(transform_components(jnp.asarray(K(X)), p, q, jac, np.linalg.inv(jac)))
    if K.weight:
        out = out / abs(np.linalg.det(jac))
    return out


def pushforward_field(tube: WorldTube, K: TensorField, name: Optional[str] = None) -> TensorField:
    """Phi_* K on the target chart; black-box unless the tube inverts in closed form."""
    exact = K.differentiable and tube.inverse_map is not None
    return TensorField(lambda x: pushforward(tube, K, x), tube.target_chart, K.contravariant_rank,
                       K.covariant_rank, K.weight, differentiable=exact, name=name or f"push {K.name}")


# ============================================================
# Velocities and projectors
# ============================================================

class Velocities(NamedTuple):
    w: np.ndarray
    u: np.ndarray


class Projection(NamedTuple):
    lower: jnp.ndarray   # p_{mu nu}
    mixed: jnp.ndarray   # P^mu_nu


def world_velocity(w, g, light_speed: float = 1.0):
    norm2 = w @ g @ w
    value = concrete(norm2)
    if value is not None and not value < 0:
        raise SignatureError(f"generalized velocity {np.asarray(w).tolist()} is not timelike (g(w,w) = {float(value):.3e})")
    return light_speed * w / jnp.sqrt(-norm2)


def velocities(tube: WorldTube, metric: MetricField, point, light_speed: float = 1.0, W=None) -> Velocities:
    """w = Phi_* W and u = c w / sqrt(-g(w, w)) at a spacetime point."""
    X = tube.inverse(point)
    w = tube.velocity(X, W)
    u = world_velocity(w, metric(point), light_speed)
    return Velocities(np.asarray(w), np.asarray(u))


def projection(metric: MetricField, u, point, light_speed: float = 1.0) -> Projection:
    g = metric(point)
    norm = concrete(u @ g @ u)
    if norm is not None and abs(float(norm) + light_speed ** 2) > 1e-8 * light_speed ** 2:
        raise ContractViolation(f"u is not normalized at {np.asarray(point).tolist()}: g(u,u) = {float(norm):.12g}")
    return projection_from_velocity(g, u, light_speed)


def projection_from_velocity(g, u, light_speed: float = 1.0) -> Projection:
    u_flat = g @ u
    lower = g + jnp.outer(u_flat, u_flat) / light_speed ** 2
    mixed = jnp.eye(g.shape[0]) + jnp.outer(u, u_flat) / light_speed ** 2
    return Projection(lower, mixed)


def projection_from_generalized(g, w):
    """p = g - w_flat w_flat / g(w, w); independent of the normalization of w."""
    w_flat = g @ w
    return g - jnp.outer(w_flat, w_flat) / (w @ w_flat)


# ============================================================
# Deformation tensors
# ============================================================

class Deformation(NamedTuple):
    right_cauchy_green: jnp.ndarray  # C_ab on D (geometric route Phi^* p)
    cauchy: jnp.ndarray              # c_{mu nu} at Phi(X) (geometric route Phi_* G)
    right_cauchy_green_coordinate: jnp.ndarray  # C_AB = g(F_A, F_B) on the body block
    cauchy_coordinate: jnp.ndarray   # c = invF^T G invF


def deformation_at(tube: WorldTube, metric: MetricField, body_metric: TensorField, X,
                   light_speed: float = 1.0, check: bool = True) -> Deformation:
    """C = Phi^* p on D and c = Phi_* G at Phi(X), both routes."""
    jac = tube.jacobian(X)
    jac_inv = jnp.linalg.inv(jac)
    g = metric(tube(X))
    w = jac[:, 0]
    u = world_velocity(w, g, light_speed)
    proj = projection_from_velocity(g, u, light_speed)
    G = body_metric(X)

    C = jac.T @ proj.lower @ jac
    c = jac_inv.T @ G @ jac_inv

    F = proj.mixed @ jac[:, 1:]
    C_coordinate = F.T @ g @ F
    inv_F = jac_inv[1:, :] @ proj.mixed
    c_coordinate = inv_F.T @ G[1:, 1:] @ inv_F

    if check:
        body = concrete(C[1:, 1:])
        if body is not None and np.min(np.linalg.eigvalsh(0.5 * (body + body.T))) <= 0:
            raise DegenerateDeformationError(f"{tube.name}: C is not positive definite at {np.asarray(X).tolist()}")
    return Deformation(C, c, C_coordinate, c_coordinate)


def deformation_tensors(tube: WorldTube, metric: MetricField, body_metric: TensorField,
                        light_speed: float = 1.0):
    """(C on D, c on M) as fields; c is a black-box field through the tube inverse."""
    C = TensorField(lambda X: deformation_at(tube, metric, body_metric, X, light_speed).right_cauchy_green,
                    tube.domain_chart, 0, 2, 0, metric.differentiable and body_metric.differentiable,
                    name="C")

    def cauchy(x):
        X = tube.inverse(x)
        return np.asarray(deformation_at(tube, metric, body_metric, X, light_speed).cauchy)

    c = TensorField(cauchy, tube.target_chart, 0, 2, 0, differentiable=False, name="c")
    return C, c


# ============================================================
# Reference fields
# ============================================================

class ReferenceFields:
    """W, R, S and (for elastic bodies) G on the reference block."""

    def __init__(self, chart: Chart, mass: TensorField, entropy: Optional[TensorField] = None,
                 body_metric: Optional[TensorField] = None, velocity: Optional[TensorField] = None):
        dim = chart.dimension
        e0 = jnp.zeros(dim).at[0].set(1.0)
        self.chart = chart
        self.velocity = velocity or TensorField(lambda X: e0 + 0.0 * X[0], chart, 1, 0, name="W")
        self.mass = mass
        self.entropy = entropy or TensorField(lambda X: 0.0 * X[0], chart, 0, 0, 1, name="S")
        self.body_metric = body_metric

    def at(self, X):
        """(W, R, S, G) components at X; G is None for fluids."""
        G = None if self.body_metric is None else self.body_metric(X)
        return self.velocity(X), self.mass(X), self.entropy(X), G

    def advection_residuals(self, points) -> Dict[str, float]:
        """max |L_W R|, |L_W S|, |L_W G| and |i_W G| over ``points``."""
        out = {"mass": 0.0, "entropy": 0.0}
        if self.body_metric is not None:
            out.update(body_metric=0.0, degeneracy=0.0)
        for X in np.asarray(points, dtype=float):
            out["mass"] = max(out["mass"], float(np.max(np.abs(lie_derivative(self.mass, self.velocity, X)))))
            out["entropy"] = max(out["entropy"], float(np.max(np.abs(lie_derivative(self.entropy, self.velocity, X)))))
            if self.body_metric is not None:
                lie_G = lie_derivative(self.body_metric, self.velocity, X)
                out["body_metric"] = max(out["body_metric"], float(np.max(np.abs(lie_G))))
                out["degeneracy"] = max(out["degeneracy"],
                                        float(np.max(np.abs(self.velocity(X) @ self.body_metric(X)))))
        return out

    def validate(self, points, tolerance: float = 1e-8) -> None:
        for name, value in self.advection_residuals(points).items():
            if value > tolerance:
                raise InconsistentStateError(f"reference {name} residual {value:.3e} exceeds {tolerance:g}")


def uniform_reference(chart: Chart, mass_density: float = 1.0, entropy_density: float = 0.0,
                      body_metric=None) -> ReferenceFields:
    """Constant R, S and (optionally) G = pi^* G0 with constant G0."""
    dim = chart.dimension
    mass = TensorField(lambda X: mass_density + 0.0 * X[0], chart, 0, 0, 1, name="R")
    entropy = TensorField(lambda X: entropy_density + 0.0 * X[0], chart, 0, 0, 1, name="S")
    G = None
    if body_metric is not None:
        G0 = jnp.asarray(body_metric, dtype=jnp.float64)
        padded = jnp.zeros((dim, dim)).at[1:, 1:].set(G0)
        G = TensorField(lambda X: padded + 0.0 * X[0], chart, 0, 2, name="G")
    return ReferenceFields(chart, mass, entropy, G)


# ============================================================
# Tube families
# ============================================================

def static_tube(domain: Chart, target: Chart, rate: float = 1.0) -> WorldTube:
    return WorldTube(lambda X: X.at[0].multiply(rate), domain, target, name=f"static({rate:g})",
                     inverse_fn=lambda x: x.at[0].divide(rate))


def boost_tube(domain: Chart, target: Chart, velocity: float = 0.6) -> WorldTube:
    """(gamma lambda, X1 + v gamma lambda, X2, X3): dust moving with 3-velocity v along x."""
    if not 0.0 <= abs(velocity) < 1.0:
        raise DomainError(f"boost velocity must satisfy |v| < 1, got {velocity}")
    lorentz = 1.0 / math.sqrt(1.0 - velocity ** 2)

    def boost(X):
        return X.at[0].set(lorentz * X[0]).at[1].set(X[1] + velocity * lorentz * X[0])

    def unboost(x):
        return x.at[0].set(x[0] / lorentz).at[1].set(x[1] - velocity * x[0])

    return WorldTube(boost, domain, target, name=f"boost({velocity:g})", inverse_fn=unboost)


def stretch_tube(domain: Chart, target: Chart, stretch: float = 1.1) -> WorldTube:
    return WorldTube(lambda X: X.at[1:].multiply(stretch), domain, target, name=f"stretch({stretch:g})",
                     inverse_fn=lambda x: x.at[1:].divide(stretch))


def shear_tube(domain: Chart, target: Chart, shear: float = 0.2) -> WorldTube:
    return WorldTube(lambda X: X.at[1].add(shear * X[2]), domain, target, name=f"shear({shear:g})",
                     inverse_fn=lambda x: x.at[1].add(-shear * x[2]))


def comoving_tube(domain: Chart, target: Chart) -> WorldTube:
    """Identity map: comoving FRW coordinates, or static Schwarzschild coordinates."""
    return WorldTube(lambda X: X + 0.0, domain, target, name="comoving", inverse_fn=lambda x: x + 0.0)


def random_tube(domain: Chart, target: Chart, seed: int = 0, amplitude: float = 0.05) -> WorldTube:
    """Identity plus a seeded trigonometric perturbation."""
    rng = np.random.default_rng(seed)
    series = random_trig_series(rng, domain.dimension, domain.dimension)
    return WorldTube(lambda X: X + amplitude * trig_values(series, X), domain, target,
                     name=f"random({seed})")


TUBE_FAMILIES: Dict[str, Callable[..., WorldTube]] = {
    "static": static_tube,
    "boost": boost_tube,
    "stretch": stretch_tube,
    "shear": shear_tube,
    "frw_comoving": comoving_tube,
    "schwarzschild_static": comoving_tube,
    "random": random_tube,
}


def make_tube(family: str, domain: Chart, target: Chart, **params) -> WorldTube:
    try:
        factory = TUBE_FAMILIES[family]
    except KeyError:
        raise ContractViolation(f"unknown tube family {family!r}; known: {sorted(TUBE_FAMILIES)}") from None
    tube = factory(domain, target, **params)
    log("Tube", f"built {tube.name} on {domain.name}")
    return tube
