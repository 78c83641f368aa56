"""
Numerical plumbing for relcont
==============================

Derivatives (forward-mode or finite differences), Richardson extrapolation,
Gauss-Legendre rules, sample grids and a few polynomial tensor helpers.

Derivative arrays always carry the derivative index FIRST: for a field with
component shape S evaluated on a chart of dimension n, ``derivative`` returns an
array of shape (n, *S).

Usage:
    from relcont.numerics import derivative, gauss_legendre

    d = derivative(lambda x: jnp.sin(x[0]) * x[1], jnp.array([0.7, 2.0]))
    rule = gauss_legendre([(0.0, 1.0), (0.0, 2.0)], 8)
    integral = rule.integrate(values)
"""

import itertools
import math
from functools import lru_cache, reduce
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import jax
import jax.numpy as jnp
import numpy as np
from numpy.polynomial.legendre import leggauss

Bounds = Sequence[Tuple[float, float]]

_TRACER_ERRORS = (
    TypeError,
    jax.errors.ConcretizationTypeError,
    jax.errors.TracerArrayConversionError,
)


# ============================================================
# Concrete values
# ============================================================

def concrete(value) -> Optional[np.ndarray]:
    """Return ``value`` as a numpy array, or None while it is being traced."""
    try:
        return np.asarray(value, dtype=float)
    except _TRACER_ERRORS:
        return None


def residual_norms(values) -> Tuple[float, float]:
    """Max-abs and root-mean-square of a residual array (NaN counts as infinite)."""
    arr = np.abs(np.asarray(values, dtype=float)).ravel()
    if arr.size == 0:
        return 0.0, 0.0
    if not np.all(np.isfinite(arr)):
        return math.inf, math.inf
    return float(arr.max()), float(np.sqrt(np.mean(arr ** 2)))


# ============================================================
# Derivatives
# ============================================================

def forward_derivative(fn: Callable, point) -> jnp.ndarray:
    """Exact first derivative with the derivative index first."""
    point = jnp.asarray(point, dtype=jnp.float64)
    return jnp.moveaxis(jax.jacfwd(fn)(point), -1, 0)


def fd_derivative(fn: Callable, point, step: float) -> np.ndarray:
    """Fourth-order central differences, derivative index first."""
    point = np.asarray(point, dtype=float)
    slices = []
    for axis in range(point.size):
        offset = np.zeros_like(point)
        offset[axis] = step

        def f(k: int) -> np.ndarray:
            return np.asarray(fn(point + k * offset), dtype=float)

        slices.append((-f(2) + 8.0 * f(1) - 8.0 * f(-1) + f(-2)) / (12.0 * step))
    return np.stack(slices)


def derivative(fn: Callable, point, exact: bool = True, step: float = 1e-4):
    if exact:
        return forward_derivative(fn, point)
    return fd_derivative(fn, point, step)


def central_difference(functional: Callable[[float], float], step: float) -> float:
    return (float(functional(step)) - float(functional(-step))) / (2.0 * step)


def richardson_central(functional: Callable[[float], float], step: float) -> float:
    """Central difference at ``step`` and ``step/2`` combined to fourth order."""
    coarse = central_difference(functional, step)
    fine = central_difference(functional, 0.5 * step)
    return (4.0 * fine - coarse) / 3.0


# ============================================================
# Quadrature
# ============================================================

class QuadratureRule(NamedTuple):
    points: np.ndarray   # (N, dim)
    weights: np.ndarray  # (N,)

    def integrate(self, values) -> float:
        values = np.asarray(values, dtype=float)
        return float(np.tensordot(self.weights, values, axes=(0, 0)))


class FaceRule(NamedTuple):
    axis: int
    side: int            # +1 upper face, -1 lower face (outward orientation)
    rule: QuadratureRule  # full-dimensional points with the face coordinate pinned


def gauss_legendre(bounds: Bounds, nodes: Union[int, Sequence[int]]) -> QuadratureRule:
    """Tensor-product Gauss-Legendre rule on a coordinate box."""
    bounds = [tuple(map(float, b)) for b in bounds]
    if not bounds:
        return QuadratureRule(np.zeros((1, 0)), np.ones(1))
    counts = [nodes] * len(bounds) if isinstance(nodes, int) else list(nodes)

    axes, axis_weights = [], []
    for (lo, hi), count in zip(bounds, counts):
        x, w = leggauss(count)
        half = 0.5 * (hi - lo)
        axes.append(lo + half * (x + 1.0))
        axis_weights.append(half * w)

    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = reduce(np.multiply.outer, axis_weights).ravel()
    return QuadratureRule(points, weights)


def boundary_faces(bounds: Bounds, nodes: Union[int, Sequence[int]]) -> List[FaceRule]:
    """Gauss-Legendre rules on the 2*dim faces of a coordinate box."""
    bounds = [tuple(map(float, b)) for b in bounds]
    counts = [nodes] * len(bounds) if isinstance(nodes, int) else list(nodes)
    faces = []
    for axis, (lo, hi) in enumerate(bounds):
        others = bounds[:axis] + bounds[axis + 1:]
        sub = gauss_legendre(others, counts[:axis] + counts[axis + 1:])
        for side, value in ((-1, lo), (1, hi)):
            pinned = np.insert(sub.points, axis, value, axis=1)
            faces.append(FaceRule(axis, side, QuadratureRule(pinned, sub.weights)))
    return faces


def sample_grid(bounds: Bounds, per_axis: int, margin: float = 0.05) -> np.ndarray:
    """Uniform interior grid, each axis shrunk by ``margin`` of its length."""
    axes = []
    for lo, hi in bounds:
        pad = margin * (hi - lo)
        if per_axis == 1:
            axes.append(np.array([0.5 * (lo + hi)]))
        else:
            axes.append(np.linspace(lo + pad, hi - pad, per_axis))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def evaluate_points(fn: Callable, points, exact: bool = True):
    """Evaluate ``fn`` at each row of ``points`` (batched when exact)."""
    if exact:
        return jax.vmap(fn)(jnp.asarray(points, dtype=jnp.float64))
    return np.stack([np.asarray(fn(np.asarray(p, dtype=float)), dtype=float) for p in points])


# ============================================================
# Polynomial tensor helpers
# ============================================================

@lru_cache(maxsize=None)
def levi_civita(dim: int) -> np.ndarray:
    """Permutation symbol with epsilon[0, 1, ..., dim-1] = +1."""
    eps = np.zeros((dim,) * dim)
    for perm in itertools.permutations(range(dim)):
        inversions = sum(1 for i in range(dim) for j in range(i + 1, dim) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


_LETTERS = "abcdefghklmnopqrstuvwxyz"


def adjugate(matrix) -> jnp.ndarray:
    """Adjugate as a polynomial in the entries (smooth through singular matrices)."""
    n = matrix.shape[-1]
    if n == 1:
        return jnp.ones_like(matrix)
    eps = jnp.asarray(levi_civita(n))
    rows = _LETTERS[: n - 1]
    cols = _LETTERS[n - 1: 2 * (n - 1)]
    spec = f"i{rows},j{cols}," + ",".join(f"{r}{c}" for r, c in zip(rows, cols)) + "->ji"
    return jnp.einsum(spec, eps, eps, *([matrix] * (n - 1))) / math.factorial(n - 1)


def generalized_inverse(matrix) -> jnp.ndarray:
    """Smooth generalized inverse of a symmetric matrix with a one-dimensional kernel.

    K = adj(A) / tr adj(A) is the kernel projector, so inv(A + K) - K inverts A on
    its range and annihilates the kernel.
    """
    adj = adjugate(matrix)
    kernel = adj / jnp.trace(adj)
    return jnp.linalg.inv(matrix + kernel) - kernel


# ============================================================
# Trigonometric series (seeded smooth fields)
# ============================================================

class TrigSeries(NamedTuple):
    """f_I(x) = a_I + sum_j (b_Ij cos(k_j.x) + c_Ij sin(k_j.x))"""
    offset: np.ndarray        # (components,)
    cos_coeffs: np.ndarray    # (components, waves)
    sin_coeffs: np.ndarray    # (components, waves)
    wavevectors: np.ndarray   # (waves, dim)


def random_trig_series(rng: np.random.Generator, components: int, dim: int, waves: int = 3) -> TrigSeries:
    """Coefficients and wavevectors drawn uniformly from [-1, 1]."""
    return TrigSeries(
        offset=rng.uniform(-1.0, 1.0, size=components),
        cos_coeffs=rng.uniform(-1.0, 1.0, size=(components, waves)),
        sin_coeffs=rng.uniform(-1.0, 1.0, size=(components, waves)),
        wavevectors=rng.uniform(-1.0, 1.0, size=(waves, dim)),
    )


def trig_values(series: TrigSeries, x):
    phases = series.wavevectors @ x
    return series.offset + series.cos_coeffs @ jnp.cos(phases) + series.sin_coeffs @ jnp.sin(phases)


def stack_series(series: Sequence[TrigSeries]) -> TrigSeries:
    """Stack equally shaped series along a new leading axis (for vmap)."""
    return TrigSeries(*(np.stack(parts) for parts in zip(*series)))
