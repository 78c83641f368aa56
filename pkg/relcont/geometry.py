"""
Geometry Core for relcont
=========================

Charts, tensor fields and metrics, Levi-Civita connections, curvature, Lie
derivatives, hat tensors and divergences of tensor densities.

Component conventions:
- a rank-(p, q) field stores contravariant indices first, then covariant ones;
- derivative arrays carry the derivative index first;
- Riemann is stored as R[l, a, m, b] = R^l_{a m b} with
  R^l_{amb} = d_m Gamma^l_{ab} - d_b Gamma^l_{am} + Gamma^l_{sm} Gamma^s_{ab} - Gamma^l_{sb} Gamma^s_{am},
  Ric_{ab} = R^l_{alb}.

Usage:
    from relcont.geometry import Chart, MetricField, christoffel, curvature

    chart = Chart(name="sphere", bounds=((0.1, 3.0), (0.0, 6.2)))
    metric = MetricField(lambda x: jnp.diag(jnp.array([1.0, jnp.sin(x[0]) ** 2])), chart,
                         signature=Signature.RIEMANNIAN)
    gamma = christoffel(metric, jnp.array([1.0, 0.5]))
"""

from typing import Callable, NamedTuple, Optional, Tuple

import jax
import jax.numpy as jnp
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from relcont.config import get_settings
from relcont.errors import BoundaryEvaluationError, ContractViolation, SignatureError, SingularMetricError
from relcont.models import Signature
from relcont.numerics import concrete, derivative, richardson_central, sample_grid


# ============================================================
# Charts
# ============================================================

class Chart(BaseModel):
    """Coordinate box carrying local coordinates"""
    model_config = ConfigDict(frozen=True)

    name: str = Field(default="chart", description="Label used in error messages")
    bounds: Tuple[Tuple[float, float], ...] = Field(description="Closed interval per axis")

    @field_validator("bounds")
    @classmethod
    def _check_bounds(cls, value):
        if len(value) < 1:
            raise ValueError("a chart needs at least one axis")
        for axis, (lo, hi) in enumerate(value):
            if not hi > lo:
                raise ValueError(f"axis {axis} interval [{lo}, {hi}] has non-positive length")
        return value

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    @property
    def scale(self) -> float:
        return max(hi - lo for lo, hi in self.bounds)

    @property
    def step(self) -> float:
        """Finite-difference step for fields on this chart."""
        return get_settings().fd_step_fraction * self.scale

    def contains(self, point, margin: float = 0.0) -> bool:
        point = np.asarray(point, dtype=float)
        return all(lo + margin < x < hi - margin for x, (lo, hi) in zip(point, self.bounds))

    def sample_grid(self, per_axis: int, margin: float = 0.05) -> np.ndarray:
        return sample_grid(self.bounds, per_axis, margin)


# ============================================================
# Tensor fields
# ============================================================

class TensorField:
    """Rank-(p, q) field of weight 0 or 1 over a chart.

    ``components`` maps a coordinate point to a dense array of shape dim^(p+q).
    Differentiable fields are built from jax expressions and get exact
    forward-mode derivatives; black-box fields fall back to finite differences.
    """

    def __init__(
        self,
        components: Callable,
        chart: Chart,
        contravariant_rank: int = 0,
        covariant_rank: int = 0,
        weight: int = 0,
        differentiable: bool = True,
        name: str = "field",
    ):
        if contravariant_rank < 0 or covariant_rank < 0:
            raise ContractViolation(f"{name}: ranks must be non-negative, got ({contravariant_rank}, {covariant_rank})")
        if weight not in (0, 1):
            raise ContractViolation(f"{name}: weight must be 0 or 1, got {weight}")
        self.components = components
        self.chart = chart
        self.contravariant_rank = contravariant_rank
        self.covariant_rank = covariant_rank
        self.weight = weight
        self.differentiable = differentiable
        self.name = name

    @property
    def rank(self) -> Tuple[int, int]:
        return self.contravariant_rank, self.covariant_rank

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.dimension,) * (self.contravariant_rank + self.covariant_rank)

    @property
    def step(self) -> float:
        return self.chart.step

    def __call__(self, point):
        return self.components(point)

    def evaluate(self, point):
        """Evaluate and check the component shape."""
        value = self.components(point)
        if tuple(jnp.shape(value)) != self.shape:
            raise ContractViolation(f"{self.name}: components have shape {jnp.shape(value)}, expected {self.shape}")
        return value

    def gradient(self, point):
        """All first partial derivatives, derivative index first."""
        _require_interior(self, point)
        return derivative(self.components, point, exact=self.differentiable, step=self.step)

    def black_box(self, name: Optional[str] = None) -> "TensorField":
        """Same field seen through numpy only (finite-difference derivatives)."""
        fn = self.components
        return TensorField(
            lambda x: np.asarray(fn(jnp.asarray(x, dtype=jnp.float64)), dtype=float),
            self.chart, self.contravariant_rank, self.covariant_rank, self.weight,
            differentiable=False, name=name or self.name,
        )

    def __repr__(self) -> str:
        return (f"TensorField({self.name!r}, rank={self.rank}, weight={self.weight}, "
                f"chart={self.chart.name!r}, differentiable={self.differentiable})")


def _require_interior(field: TensorField, point) -> None:
    value = concrete(point)
    if value is None:
        return
    margin = 0.0 if field.differentiable else 2.0 * field.step
    if not field.chart.contains(value, margin):
        raise BoundaryEvaluationError(
            f"{field.name}: point {value.tolist()} is not inside chart {field.chart.name!r} "
            f"by the stencil margin {margin:g}"
        )


def constant_field(value, chart: Chart, contravariant_rank: int = 0, covariant_rank: int = 0,
                   weight: int = 0, name: str = "constant") -> TensorField:
    value = jnp.asarray(value, dtype=jnp.float64)
    return TensorField(lambda x: value + 0.0 * x[0], chart, contravariant_rank, covariant_rank, weight, name=name)


def tensor_product(a: TensorField, b: TensorField, name: Optional[str] = None) -> TensorField:
    """A (x) B with all contravariant slots moved in front."""
    pa, qa = a.rank
    pb, qb = b.rank
    if a.weight + b.weight > 1:
        raise ContractViolation("product of two densities has weight 2")
    perm = (list(range(pa)) + list(range(pa + qa, pa + qa + pb))
            + list(range(pa, pa + qa)) + list(range(pa + qa + pb, pa + qa + pb + qb)))

    def components(x):
        return jnp.transpose(jnp.tensordot(a(x), b(x), axes=0), perm)

    return TensorField(components, a.chart, pa + pb, qa + qb, a.weight + b.weight,
                       differentiable=a.differentiable and b.differentiable,
                       name=name or f"{a.name}*{b.name}")


def trace_field(field: TensorField, upper: int = 0, lower: int = 0) -> TensorField:
    """Contract contravariant slot ``upper`` with covariant slot ``lower``."""
    p, q = field.rank
    if p < 1 or q < 1:
        raise ContractViolation(f"{field.name}: contraction needs a (p>=1, q>=1) field, got {field.rank}")
    return TensorField(lambda x: jnp.trace(field(x), axis1=upper, axis2=p + lower), field.chart,
                       p - 1, q - 1, field.weight, field.differentiable, name=f"tr {field.name}")


# ============================================================
# Metrics and connections
# ============================================================

class MetricField(TensorField):
    """Symmetric nondegenerate (0, 2) field with a declared signature."""

    def __init__(self, components: Callable, chart: Chart, signature: Signature = Signature.LORENTZIAN,
                 differentiable: bool = True, name: str = "metric"):
        super().__init__(components, chart, 0, 2, 0, differentiable, name)
        self.signature = Signature(signature)

    def inverse(self, point):
        g = self(point)
        det = concrete(jnp.linalg.det(g))
        if det is not None and abs(float(det)) < 1e-14:
            raise SingularMetricError(f"{self.name}: metric is singular at {np.asarray(point).tolist()}")
        return jnp.linalg.inv(g)

    def volume_density(self, point):
        """sqrt|det g|, the component of the metric volume form."""
        return jnp.sqrt(jnp.abs(jnp.linalg.det(self(point))))

    def black_box(self, name: Optional[str] = None) -> "MetricField":
        fn = self.components
        return MetricField(lambda x: np.asarray(fn(jnp.asarray(x, dtype=jnp.float64)), dtype=float),
                           self.chart, self.signature, differentiable=False, name=name or self.name)

    def validate(self, points) -> float:
        """Check symmetry, invertibility and signature at ``points``; return max asymmetry."""
        worst = 0.0
        for point in np.asarray(points, dtype=float):
            g = np.asarray(self(point), dtype=float)
            asym = float(np.max(np.abs(g - g.T)))
            worst = max(worst, asym)
            if asym > 1e-12:
                raise SingularMetricError(f"{self.name}: not symmetric at {point.tolist()} ({asym:.2e})")
            eig = np.linalg.eigvalsh(0.5 * (g + g.T))
            if np.min(np.abs(eig)) < 1e-14:
                raise SingularMetricError(f"{self.name}: singular at {point.tolist()}")
            negatives = int(np.sum(eig < 0))
            expected = 1 if self.signature == Signature.LORENTZIAN else 0
            if negatives != expected:
                raise SignatureError(
                    f"{self.name}: {negatives} negative eigenvalues at {point.tolist()}, "
                    f"expected {expected} for a {self.signature.value} metric"
                )
        return worst


def christoffel_symbols(g_inv, dg):
    """Gamma^l_{mn} from the inverse metric and dg[a, b, c] = d_a g_bc."""
    lowered = (jnp.einsum("msn->smn", dg) + jnp.einsum("nsm->smn", dg) - dg)
    return 0.5 * jnp.einsum("ls,smn->lmn", g_inv, lowered)


def christoffel(metric: MetricField, point):
    return christoffel_symbols(metric.inverse(point), metric.gradient(point))


class Connection:
    """Levi-Civita connection of a metric."""

    def __init__(self, metric: MetricField):
        self.source_metric = metric

    @property
    def differentiable(self) -> bool:
        return self.source_metric.differentiable

    def christoffel(self, point):
        return christoffel(self.source_metric, point)

    def compatibility_residual(self, point):
        """max |Gamma^l_{mn} - Gamma^l_{nm}| and max |nabla g| at a point."""
        gamma = self.christoffel(point)
        torsion = jnp.max(jnp.abs(gamma - jnp.swapaxes(gamma, 1, 2)))
        nabla_g = jnp.max(jnp.abs(covariant_derivative(self.source_metric, self, point)))
        return torsion, nabla_g


# ============================================================
# Curvature
# ============================================================

class Curvature(NamedTuple):
    riemann: jnp.ndarray  # R^l_{amb}
    ricci: jnp.ndarray    # Ric_{ab}
    scalar: jnp.ndarray   # R
    einstein: jnp.ndarray  # G^{ab}


def riemann_from(gamma, dgamma):
    """Riemann tensor from Gamma[l, a, b] and dgamma[m, l, a, b] = d_m Gamma^l_{ab}."""
    return (jnp.einsum("mlab->lamb", dgamma) - jnp.einsum("blam->lamb", dgamma)
            + jnp.einsum("lsm,sab->lamb", gamma, gamma) - jnp.einsum("lsb,sam->lamb", gamma, gamma))


def curvature(metric: MetricField, point) -> Curvature:
    _require_interior(metric, point)
    g_inv = metric.inverse(point)
    gamma = christoffel(metric, point)
    dgamma = derivative(lambda y: christoffel(metric, y), point,
                        exact=metric.differentiable, step=metric.step)
    riemann = riemann_from(gamma, dgamma)
    ricci = jnp.einsum("lalb->ab", riemann)
    scalar = jnp.einsum("ab,ab->", g_inv, ricci)
    einstein = jnp.einsum("ac,bd,cd->ab", g_inv, g_inv, ricci) - 0.5 * scalar * g_inv
    return Curvature(riemann, ricci, scalar, einstein)


def einstein_density(metric: MetricField) -> TensorField:
    """G^{ab} mu(g) as a (2, 0) tensor density."""
    return TensorField(lambda x: curvature(metric, x).einstein * metric.volume_density(x),
                       metric.chart, 2, 0, 1, metric.differentiable, name=f"G[{metric.name}]")


def bianchi_residual(metric: MetricField, point):
    """div of the Einstein density with the Levi-Civita connection (identically zero)."""
    return divergence(einstein_density(metric), Connection(metric), point)


# ============================================================
# Derivative operators
# ============================================================

def partial_derivative(field: TensorField, point, axis: int):
    if not 0 <= axis < field.dimension:
        raise ContractViolation(f"{field.name}: axis {axis} outside 0..{field.dimension - 1}")
    return field.gradient(point)[axis]


def covariant_derivative(field: TensorField, connection: Optional[Connection], point):
    """nabla_g of the field, derivative index first; plain partials when no connection."""
    d = field.gradient(point)
    if connection is None:
        return d
    p, q = field.rank
    comps = field(point)
    gamma = connection.christoffel(point)
    out = d
    for slot in range(p):
        term = jnp.tensordot(gamma, comps, axes=([2], [slot]))
        out = out + jnp.moveaxis(term, [0, 1], [1 + slot, 0])
    for slot in range(p, p + q):
        term = jnp.tensordot(gamma, comps, axes=([0], [slot]))
        out = out - jnp.moveaxis(term, [0, 1], [0, 1 + slot])
    if field.weight:
        trace = jnp.einsum("lgl->g", gamma)
        out = out - field.weight * jnp.multiply.outer(trace, comps)
    return out


_SLOT_LETTERS = "abcdefghijklmnopqrstuvwx"


def hat_components(comps, p: int, q: int, weight: int, dim: int):
    """(p+1, q+1) hat tensor, layout [alpha_1..alpha_p, nu, beta_1..beta_q, mu]."""
    if p + q > len(_SLOT_LETTERS):
        raise ContractViolation(f"rank ({p}, {q}) too large for hat tensor")
    up = _SLOT_LETTERS[:p]
    low = _SLOT_LETTERS[p:p + q]
    nu, mu = "y", "z"
    out_spec = up + nu + low + mu
    delta = jnp.eye(dim)
    total = jnp.zeros((dim,) * (p + q + 2))
    for r in range(q):
        src = up + low[:r] + mu + low[r + 1:]
        total = total + jnp.einsum(f"{src},{nu}{low[r]}->{out_spec}", comps, delta)
    for r in range(p):
        src = up[:r] + nu + up[r + 1:] + low
        total = total - jnp.einsum(f"{src},{up[r]}{mu}->{out_spec}", comps, delta)
    if weight:
        total = total + weight * jnp.einsum(f"{up + low},{nu}{mu}->{out_spec}", comps, delta)
    return total


def hat_tensor(field: TensorField, point):
    p, q = field.rank
    return hat_components(field(point), p, q, field.weight, field.dimension)


def contract_hat(hat, dzeta, p: int):
    """hat : d zeta, with dzeta[nu, mu] = d_nu zeta^mu."""
    last = hat.ndim - 1
    return jnp.tensordot(hat, dzeta, axes=([p, last], [0, 1]))


def hat_pairing(pi, hat, p: int, q: int):
    """(pi : hat)^nu_mu for pi a (q, p) array and hat a (p+1, q+1) array."""
    pi_t = _dual_layout(pi, p, q)
    hat_axes = list(range(p)) + list(range(p + 1, p + 1 + q))
    return jnp.tensordot(pi_t, hat, axes=(list(range(p + q)), hat_axes))


def _dual_layout(pi, p: int, q: int):
    """Reorder a (q, p) array [B, A] to [A, B] so it pairs slot-by-slot with a (p, q) array."""
    perm = list(range(q, q + p)) + list(range(q))
    return jnp.transpose(pi, perm)


def full_contraction(kappa, pi, p: int, q: int):
    return jnp.tensordot(kappa, _dual_layout(pi, p, q), axes=p + q)


def _require_vector(vector: TensorField) -> None:
    if vector.rank != (1, 0) or vector.weight != 0:
        raise ContractViolation(f"{vector.name}: expected a rank (1, 0) vector field, got {vector.rank} weight {vector.weight}")


def lie_derivative(field: TensorField, vector: TensorField, point, connection: Optional[Connection] = None):
    """Coordinate (or covariant) formula zeta.d kappa + hat(kappa) : d zeta."""
    _require_vector(vector)
    p, q = field.rank
    d_kappa = covariant_derivative(field, connection, point)
    d_zeta = covariant_derivative(vector, connection, point)
    transport = jnp.tensordot(vector(point), d_kappa, axes=(0, 0))
    return transport + contract_hat(hat_tensor(field, point), d_zeta, p)


def divergence(field: TensorField, connection: Optional[Connection], point):
    """Contract the derivative index with the last contravariant slot of a density."""
    p, _ = field.rank
    if field.weight != 1:
        raise ContractViolation(f"{field.name}: divergence is defined for weight-1 densities, got weight {field.weight}")
    if p < 1:
        raise ContractViolation(f"{field.name}: divergence needs a contravariant slot, got rank {field.rank}")
    return jnp.trace(covariant_derivative(field, connection, point), axis1=0, axis2=p)


# ============================================================
# Contraction identity
# ============================================================

def _require_dual(kappa: TensorField, pi: TensorField) -> None:
    p, q = kappa.rank
    if pi.rank != (q, p) or kappa.weight != 0 or pi.weight != 1:
        raise ContractViolation(
            f"contraction identity needs kappa (p,q) weight 0 and pi (q,p) weight 1; "
            f"got {kappa.rank}/{kappa.weight} and {pi.rank}/{pi.weight}"
        )


def hat_flux(kappa: TensorField, pi: TensorField) -> TensorField:
    """A^nu_mu = (pi : hat kappa)^nu_mu as a (1, 1) density."""
    p, q = kappa.rank
    return TensorField(lambda x: hat_pairing(pi(x), hat_tensor(kappa, x), p, q), kappa.chart, 1, 1, 1,
                       kappa.differentiable and pi.differentiable, name=f"A[{kappa.name}]")


def contraction_identity_sides(kappa: TensorField, pi: TensorField, zeta: TensorField, point,
                               connection: Optional[Connection] = None):
    """Both sides of (L_zeta kappa).pi = zeta^mu(D_mu kappa.pi - D_nu A^nu_mu) + d_nu(A^nu_mu zeta^mu)."""
    _require_dual(kappa, pi)
    _require_vector(zeta)
    p, q = kappa.rank
    exact = kappa.differentiable and pi.differentiable and zeta.differentiable
    flux = hat_flux(kappa, pi)
    pi_here = pi(point)

    lhs = full_contraction(lie_derivative(kappa, zeta, point, connection), pi_here, p, q)

    d_kappa = covariant_derivative(kappa, connection, point)
    transport = jnp.tensordot(d_kappa, _dual_layout(pi_here, p, q),
                              axes=(list(range(1, p + q + 1)), list(range(p + q))))
    div_flux = divergence(flux, connection, point)
    total = TensorField(lambda x: flux(x) @ zeta(x), kappa.chart, 1, 0, 1, exact, name="A.zeta")
    rhs = jnp.dot(zeta(point), transport - div_flux) + divergence(total, None, point)
    return lhs, rhs


def contraction_identity_residual(kappa: TensorField, pi: TensorField, zeta: TensorField, point,
                                  connection: Optional[Connection] = None):
    """|LHS - RHS| with partial derivatives, and also with nabla when a connection is given."""
    lhs, rhs = contraction_identity_sides(kappa, pi, zeta, point, None)
    residual = jnp.abs(lhs - rhs)
    if connection is not None:
        lhs_c, rhs_c = contraction_identity_sides(kappa, pi, zeta, point, connection)
        residual = jnp.maximum(residual, jnp.abs(lhs_c - rhs_c))
    return residual


def symmetric_contraction_rhs(c: TensorField, pi: TensorField, zeta: TensorField, point):
    """zeta^g(d_g c_{mn} pi^{mn} - 2 d_m(c_{gn} pi^{mn})) + 2 d_g(c_{mn} pi^{gn} zeta^m) for symmetric c."""
    if c.rank != (0, 2) or pi.rank != (2, 0):
        raise ContractViolation("symmetric special case needs a (0, 2) field and a (2, 0) density")
    exact = c.differentiable and pi.differentiable and zeta.differentiable
    chart = c.chart
    step = chart.step
    cp = TensorField(lambda x: jnp.einsum("gn,mn->mg", c(x), pi(x)), chart, 1, 1, 1, exact)
    flux = TensorField(lambda x: jnp.einsum("mn,gn,m->g", c(x), pi(x), zeta(x)), chart, 1, 0, 1, exact)
    dc = c.gradient(point)
    transport = jnp.einsum("gmn,mn->g", dc, pi(point))
    div_cp = jnp.trace(derivative(cp, point, exact, step), axis1=0, axis2=1)
    return jnp.dot(zeta(point), transport - 2.0 * div_cp) + 2.0 * divergence(flux, None, point)


# ============================================================
# Frame changes and flows
# ============================================================

def transform_components(comps, p: int, q: int, contravariant_map, covariant_map):
    """Apply ``contravariant_map`` to every upper slot and ``covariant_map`` to every lower slot.

    Pullback by a map with Jacobian J uses (inv(J), J); pushforward uses (J, inv(J)).
    """
    out = comps
    for slot in range(p):
        out = jnp.moveaxis(jnp.tensordot(contravariant_map, out, axes=([1], [slot])), 0, slot)
    for slot in range(p, p + q):
        out = jnp.moveaxis(jnp.tensordot(covariant_map, out, axes=([0], [slot])), 0, slot)
    return out


def flow(vector: TensorField, point, time: float, steps: int = 8):
    """RK4 integral curve of ``vector`` from ``point`` for ``time``."""
    h = time / steps
    x = jnp.asarray(point, dtype=jnp.float64)
    for _ in range(steps):
        k1 = vector(x)
        k2 = vector(x + 0.5 * h * k1)
        k3 = vector(x + 0.5 * h * k2)
        k4 = vector(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def flow_pullback(field: TensorField, vector: TensorField, point, time: float, steps: int = 8):
    p, q = field.rank
    point = jnp.asarray(point, dtype=jnp.float64)
    y = flow(vector, point, time, steps)
    jac = jax.jacfwd(lambda z: flow(vector, z, time, steps))(point)
    out = transform_components(field(y), p, q, jnp.linalg.inv(jac), jac)
    if field.weight:
        out = out * jnp.abs(jnp.linalg.det(jac))
    return out


def lie_flow_oracle(field: TensorField, vector: TensorField, point, time_step: float = 1e-2, steps: int = 8):
    """d/dt|0 of the flow pullback, by Richardson-refined central differences."""
    _require_vector(vector)
    base = np.asarray(field(point), dtype=float)
    flat = base.size

    values = np.empty(flat)
    cache = {}

    def pulled(t: float) -> np.ndarray:
        if t not in cache:
            cache[t] = np.asarray(flow_pullback(field, vector, point, t, steps), dtype=float).ravel()
        return cache[t]

    for index in range(flat):
        values[index] = richardson_central(lambda t, i=index: pulled(t)[i], time_step)
    return values.reshape(base.shape)


def sample_points(chart: Chart, per_axis: Optional[int] = None, margin: float = 0.05) -> np.ndarray:
    return chart.sample_grid(per_axis or get_settings().grid, margin)
