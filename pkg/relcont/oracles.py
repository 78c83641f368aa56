"""
Oracles for relcont
===================

Seeded random smooth fields, metrics and diffeomorphisms, the Richardson
finite-difference variation oracle, and both sides of the moving-domain
variation formula.

Usage:
    from relcont.oracles import random_tensor_field, fd_variation_oracle

    kappa = random_tensor_field(chart, 1, 1, seed=3)
    slope = fd_variation_oracle(lambda eps: (1.0 + eps) ** 3, step=1e-4)
"""

import math
from typing import Callable, NamedTuple, Sequence, Tuple

import jax
import jax.numpy as jnp
import numpy as np

from relcont.errors import ContractViolation
from relcont.geometry import Chart, MetricField, TensorField
from relcont.models import Signature
from relcont.numerics import (
    boundary_faces,
    gauss_legendre,
    random_trig_series,
    richardson_central,
    trig_values,
)


# ============================================================
# Random fields
# ============================================================

def random_tensor_field(chart: Chart, contravariant_rank: int = 0, covariant_rank: int = 0, seed: int = 0,
                        weight: int = 0, amplitude: float = 1.0, waves: int = 3, name: str = "random") -> TensorField:
    """Trigonometric series with seeded coefficients in every component."""
    dim = chart.dimension
    shape = (dim,) * (contravariant_rank + covariant_rank)
    series = random_trig_series(np.random.default_rng(seed), max(1, math.prod(shape)), dim, waves)

    def components(x):
        return amplitude * trig_values(series, x).reshape(shape)

    return TensorField(components, chart, contravariant_rank, covariant_rank, weight, name=f"{name}({seed})")


def random_vector_field(chart: Chart, seed: int = 0, amplitude: float = 1.0) -> TensorField:
    return random_tensor_field(chart, 1, 0, seed=seed, amplitude=amplitude, name="zeta")


def random_symmetric_field(chart: Chart, seed: int = 0, amplitude: float = 1.0, weight: int = 0,
                           contravariant: bool = False) -> TensorField:
    base = random_tensor_field(chart, 0, 2, seed=seed, amplitude=amplitude)
    p, q = (2, 0) if contravariant else (0, 2)
    return TensorField(lambda x: 0.5 * (base(x) + base(x).T), chart, p, q, weight, name=f"sym({seed})")


def random_metric(chart: Chart, seed: int = 0, amplitude: float = 0.02,
                  signature: Signature = Signature.LORENTZIAN) -> MetricField:
    """Constant background (Minkowski or Euclidean) plus a small symmetric trigonometric bump."""
    dim = chart.dimension
    background = jnp.eye(dim)
    if Signature(signature) == Signature.LORENTZIAN:
        background = background.at[0, 0].set(-1.0)
    bump = random_symmetric_field(chart, seed, amplitude)
    return MetricField(lambda x: background + bump(x), chart, signature, name=f"random_metric({seed})")


def random_diffeo(dim: int, seed: int = 0, amplitude: float = 0.05) -> Callable:
    """x + amplitude * trig(x); a diffeomorphism for small amplitudes."""
    series = random_trig_series(np.random.default_rng(seed), dim, dim)
    return lambda x: x + amplitude * trig_values(series, x)


def body_twist(rate: float = 0.3) -> Callable:
    """Rotate the (X1, X2) body plane by the angle rate * X3."""
    def twist(X):
        angle = rate * X[3]
        c, s = jnp.cos(angle), jnp.sin(angle)
        return X.at[1].set(c * X[1] - s * X[2]).at[2].set(s * X[1] + c * X[2])
    return twist


def body_stretch(factor: float = 1.5, axis: int = 1) -> Callable:
    """Scale the body coordinate X^axis by ``factor``."""
    if axis < 1 or factor <= 0:
        raise ContractViolation(f"body stretch needs a body axis >= 1 and a positive factor, got {axis}, {factor}")
    return lambda X: X.at[axis].multiply(factor)


def random_spacetime(dim: int, seed: int = 0, amplitude: float = 0.05) -> Callable:
    return random_diffeo(dim, seed=seed, amplitude=amplitude)


DIFFEO_FAMILIES = {
    "body_twist": lambda dim, **params: body_twist(**params),
    "body_stretch": lambda dim, **params: body_stretch(**params),
    "random_spacetime": random_spacetime,
}


# ============================================================
# Variation oracles
# ============================================================

def fd_variation_oracle(functional: Callable[[float], float], step: float = 1e-4) -> float:
    """d/d eps at 0 of ``functional`` by central differences with Richardson refinement."""
    if step <= 0:
        raise ContractViolation(f"variation step must be positive, got {step}")
    return richardson_central(functional, step)


class MovingDomainSides(NamedTuple):
    lhs: float  # d/d eps of the integral over Phi_eps(D)
    bulk: float  # integral of the density variation over Phi(D)
    flux: float  # boundary integral of i_V ell, V = dPhi o Phi^-1
    rhs: float


def moving_domain_integral(density: Callable, embedding: Callable, bounds: Sequence[Tuple[float, float]],
                           eps: float, nodes: int) -> float:
    """Integral of density(eps, .) over embedding(eps, D), evaluated on the fixed block D."""
    rule = gauss_legendre(bounds, nodes)

    def integrand(X):
        x = embedding(eps, X)
        jac = jax.jacfwd(lambda Y: embedding(eps, Y))(X)
        return density(eps, x) * jnp.abs(jnp.linalg.det(jac))

    return rule.integrate(jax.vmap(integrand)(jnp.asarray(rule.points)))


def moving_domain_sides(density: Callable, embedding: Callable, bounds: Sequence[Tuple[float, float]],
                        nodes: int = 8, step: float = 1e-3) -> MovingDomainSides:
    """Both sides of d/d eps int_{Phi_eps(D)} ell_eps = int delta ell + int_boundary i_V ell.

    ``density(eps, x)`` is a scalar density on spacetime, ``embedding(eps, X)``
    a family of embeddings of D. The left side re-meshes through the displaced
    embedding; the right side pulls the boundary term back to the faces of D.
    """
    bounds = [tuple(map(float, b)) for b in bounds]
    lhs = fd_variation_oracle(lambda eps: moving_domain_integral(density, embedding, bounds, eps, nodes), step)

    base = lambda X: embedding(0.0, X)

    def density_variation(x):
        return jax.jvp(lambda e: density(e, x), (0.0,), (1.0,))[1]

    def bulk_integrand(X):
        jac = jax.jacfwd(base)(X)
        return density_variation(base(X)) * jnp.abs(jnp.linalg.det(jac))

    rule = gauss_legendre(bounds, nodes)
    bulk = rule.integrate(jax.vmap(bulk_integrand)(jnp.asarray(rule.points)))

    def flux_integrand(X, axis):
        jac = jax.jacfwd(base)(X)
        displacement = jax.jvp(lambda e: embedding(e, X), (0.0,), (1.0,))[1]
        body_displacement = jnp.linalg.solve(jac, displacement)
        pulled = density(0.0, base(X)) * jnp.abs(jnp.linalg.det(jac))
        return pulled * body_displacement[axis]

    flux = 0.0
    for face in boundary_faces(bounds, nodes):
        values = jax.vmap(lambda X: flux_integrand(X, face.axis))(jnp.asarray(face.rule.points))
        flux += face.side * face.rule.integrate(values)
    return MovingDomainSides(float(lhs), float(bulk), float(flux), float(bulk + flux))
