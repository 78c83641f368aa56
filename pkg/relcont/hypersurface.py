"""
Hypersurfaces for relcont
=========================

Oriented nondegenerate hypersurfaces sigma: S -> M given by a parameter box S.
Induced metric h, unit normal n with eps = g(n, n), extrinsic curvature
K(u, v) = g(u, nabla_v n) = -g(nabla_u v, n), the GHY integral, its first
variations with respect to the metric and to the hypersurface (analytic
formulas plus perturb-and-recompute oracles), Gauss-Codazzi residuals and
junction jumps between two metrics.

Boundary integrals over dS use the coordinate form of the divergence theorem:
int_S div(V) mu(h) = sum over faces of side * int sqrt|h| V^i, which is the
flux sigma h(V, nu) mu(gamma) through the boundary.

Usage:
    from relcont.hypersurface import sphere, ghy_integral

    surface = sphere(euclidean_metric, radius=2.0, nodes=32)
    value = ghy_integral(surface, Constants(G=1 / (8 * math.pi)))
"""

import math
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import jax
import jax.numpy as jnp
import numpy as np

from relcont.config import get_settings
from relcont.errors import ContractViolation, NondegeneracyError
from relcont.geometry import (
    Chart,
    Connection,
    MetricField,
    TensorField,
    christoffel,
    christoffel_symbols,
    covariant_derivative,
    curvature,
)
from relcont.models import Constants, Signature, SurfaceKind
from relcont.numerics import (
    FaceRule,
    QuadratureRule,
    boundary_faces,
    concrete,
    derivative,
    gauss_legendre,
    levi_civita,
    random_trig_series,
    richardson_central,
    sample_grid,
    trig_values,
)

_DEGENERACY = 1e-10

Nodes = Union[int, Sequence[int]]


# ============================================================
# Hypersurface
# ============================================================

class Hypersurface:
    """sigma: parameter box -> M with a chosen normal side.

    ``normal_side`` multiplies the raw normal g^-1(eps_{mu a..} T^a ..);
    ``closed`` marks surfaces whose parameter box edges are seams or poles
    (no boundary terms).
    """

    def __init__(self, embedding: Callable, chart: Chart, ambient: MetricField, normal_side: int = 1,
                 nodes: Optional[Nodes] = None, closed: bool = False, name: str = "surface"):
        if chart.dimension != ambient.dimension - 1:
            raise ContractViolation(
                f"{name}: parameter chart has dimension {chart.dimension}, ambient {ambient.dimension}"
            )
        if normal_side not in (1, -1):
            raise ContractViolation(f"{name}: normal_side must be +1 or -1, got {normal_side}")
        self.embedding = lambda s: embedding(jnp.asarray(s, dtype=jnp.float64))
        self.chart = chart
        self.ambient = ambient
        self.normal_side = normal_side
        self.nodes = nodes or get_settings().quadrature_nodes
        self.closed = closed
        self.name = name

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    @property
    def exact(self) -> bool:
        return self.ambient.differentiable

    @property
    def rule(self) -> QuadratureRule:
        return gauss_legendre(self.chart.bounds, self.nodes)

    @property
    def faces(self) -> List[FaceRule]:
        return [] if self.closed else boundary_faces(self.chart.bounds, self.nodes)

    def sample_points(self, per_axis: int = 3) -> np.ndarray:
        return sample_grid(self.chart.bounds, per_axis, margin=0.1)

    def with_metric(self, metric: MetricField, name: Optional[str] = None) -> "Hypersurface":
        return Hypersurface(self.embedding, self.chart, metric, self.normal_side, self.nodes, self.closed,
                            name=name or self.name)

    def with_nodes(self, nodes: Nodes) -> "Hypersurface":
        return Hypersurface(self.embedding, self.chart, self.ambient, self.normal_side, nodes, self.closed,
                            name=self.name)

    def displaced(self, variation: "SurfaceVariation", eps: float) -> "Hypersurface":
        """sigma_eps = sigma + eps (f n + T X)."""
        def moved(s):
            frame = surface_frame(self, s)
            return frame.point + eps * (variation.normal(s) * frame.normal + frame.tangents @ variation.tangential(s))
        return Hypersurface(moved, self.chart, self.ambient, self.normal_side, self.nodes, self.closed,
                            name=f"{self.name}+{eps:g}")

    def kind(self, s) -> SurfaceKind:
        eps = float(surface_frame(self, s).epsilon)
        return SurfaceKind.TIMELIKE if eps > 0 and self.ambient.signature == Signature.LORENTZIAN \
            else SurfaceKind.SPACELIKE

    def validate(self) -> None:
        """Nondegenerate h and unit normal at every quadrature node."""
        frames = over_nodes(lambda s: surface_frame(self, s), self.rule.points, self.exact)
        det_h = np.abs(np.linalg.det(np.asarray(frames.h)))
        if not np.all(det_h > _DEGENERACY):
            worst = int(np.argmin(det_h))
            raise NondegeneracyError(
                f"{self.name}: induced metric degenerate at parameter {self.rule.points[worst].tolist()} "
                f"(|det h| = {det_h[worst]:.3e}); null hypersurfaces are not supported"
            )

    def __repr__(self) -> str:
        return f"Hypersurface({self.name!r}, dim={self.dimension}, side={self.normal_side}, nodes={self.nodes})"


def over_nodes(fn: Callable, points, exact: bool):
    """Evaluate a pytree-valued ``fn`` at each parameter point (vmapped when exact)."""
    points = np.asarray(points, dtype=float)
    if exact:
        return jax.vmap(fn)(jnp.asarray(points))
    rows = [fn(jnp.asarray(p)) for p in points]
    return jax.tree_util.tree_map(lambda *xs: np.stack([np.asarray(x, dtype=float) for x in xs]), *rows)


# ============================================================
# Induced geometry
# ============================================================

class SurfaceFrame(NamedTuple):
    point: jnp.ndarray     # sigma(s)
    tangents: jnp.ndarray  # T[mu, a]
    normal: jnp.ndarray    # n^mu
    epsilon: jnp.ndarray   # g(n, n)
    h: jnp.ndarray


class InducedGeometry(NamedTuple):
    point: jnp.ndarray
    tangents: jnp.ndarray
    normal: jnp.ndarray
    epsilon: jnp.ndarray
    h: jnp.ndarray
    h_inv: jnp.ndarray
    K: jnp.ndarray         # -g(d_a d_b sigma + Gamma(T_a, T_b), n)
    K_alt: jnp.ndarray     # g(T_a, nabla_{T_b} n)
    k: jnp.ndarray
    trace_K2: jnp.ndarray
    volume: jnp.ndarray    # sqrt|det h|


def normal_covector(tangents):
    """nu_mu = eps_{mu a_1 .. a_n} T_1^a_1 .. T_n^a_n."""
    dim, count = tangents.shape
    out = jnp.asarray(levi_civita(dim))
    for j in range(count):
        out = jnp.tensordot(out, tangents[:, j], axes=([1], [0]))
    return out


def surface_frame(surface: Hypersurface, s) -> SurfaceFrame:
    x = surface.embedding(s)
    T = jax.jacfwd(surface.embedding)(jnp.asarray(s, dtype=jnp.float64))
    g = surface.ambient(x)
    nu = surface.normal_side * normal_covector(T)
    raw = jnp.linalg.solve(g, nu)
    norm2 = nu @ raw
    n = raw / jnp.sqrt(jnp.abs(norm2))
    return SurfaceFrame(x, T, n, jnp.sign(norm2), T.T @ g @ T)


def induced_geometry(surface: Hypersurface, s) -> InducedGeometry:
    s = jnp.asarray(s, dtype=jnp.float64)
    frame = surface_frame(surface, s)
    x, T, n, eps, h = frame
    det_h = concrete(jnp.linalg.det(h))
    if det_h is not None and abs(float(det_h)) < _DEGENERACY:
        raise NondegeneracyError(f"{surface.name}: |det h| = {abs(float(det_h)):.3e} at parameter {np.asarray(s).tolist()}")
    g = surface.ambient(x)
    gamma = christoffel(surface.ambient, x)
    hessian = jax.jacfwd(jax.jacfwd(surface.embedding))(s)  # [mu, a, b]
    n_flat = g @ n

    acceleration = hessian + jnp.einsum("mab,aA,bB->mAB", gamma, T, T)
    K = -jnp.einsum("m,mab->ab", n_flat, acceleration)

    dn = derivative(lambda y: surface_frame(surface, y).normal, s, exact=surface.exact, step=surface.chart.step)
    nabla_n = dn + jnp.einsum("mab,aB,b->Bm", gamma, T, n)  # [b, mu]
    K_alt = jnp.einsum("ma,mn,bn->ab", T, g, nabla_n)

    h_inv = jnp.linalg.inv(h)
    k = jnp.einsum("ab,ab->", h_inv, K)
    trace_K2 = jnp.einsum("ab,bc,cd,da->", h_inv, K, h_inv, K)
    return InducedGeometry(x, T, n, eps, h, h_inv, K, K_alt, k, trace_K2, jnp.sqrt(jnp.abs(jnp.linalg.det(h))))


def geometry_at_nodes(surface: Hypersurface, points=None) -> InducedGeometry:
    points = surface.rule.points if points is None else points
    return over_nodes(lambda s: induced_geometry(surface, s), points, surface.exact)


def extrinsic_agreement(surface: Hypersurface, points=None) -> Tuple[float, float]:
    """(max |K - K_alt|, max |K - K^T|) over ``points``."""
    geo = geometry_at_nodes(surface, points)
    K = np.asarray(geo.K)
    return (float(np.max(np.abs(K - np.asarray(geo.K_alt)))),
            float(np.max(np.abs(K - np.swapaxes(K, -1, -2)))))


# ============================================================
# GHY integral
# ============================================================

def mean_curvature_integral(surface: Hypersurface) -> float:
    """int_S k mu(h)."""
    geo = geometry_at_nodes(surface)
    return surface.rule.integrate(np.asarray(geo.k) * np.asarray(geo.volume))


def ghy_integral(surface: Hypersurface, constants: Constants) -> float:
    """(1/chi) int_S eps k mu(h)."""
    geo = geometry_at_nodes(surface)
    values = np.asarray(geo.epsilon) * np.asarray(geo.k) * np.asarray(geo.volume)
    return surface.rule.integrate(values) / constants.chi


def _face_flux(surface: Hypersurface, flux: Callable) -> float:
    """sum over faces of side * int sqrt|h| V^axis for a parameter vector field V(s)."""
    total = 0.0
    for face in surface.faces:
        def integrand(s, axis=face.axis):
            return flux(s)[axis]
        values = over_nodes(integrand, face.rule.points, surface.exact)
        total += face.side * face.rule.integrate(values)
    return total


# ============================================================
# Metric variation
# ============================================================

def _metric_variation_terms(surface: Hypersurface, delta_g: TensorField, s):
    geo = induced_geometry(surface, s)
    x, T, n = geo.point, geo.tangents, geo.normal
    g_inv = surface.ambient.inverse(x)
    gamma = delta_g(x)
    D = covariant_derivative(delta_g, Connection(surface.ambient), x)  # [l, a, b] = nabla_l gamma_ab

    lowered = jnp.einsum("alb->lab", D) + jnp.einsum("bla->lab", D) - D
    d_christoffel = 0.5 * jnp.einsum("ml,lab->mab", g_inv, lowered)
    dV = jnp.einsum("ab,mab->m", g_inv, d_christoffel) - jnp.einsum("am,bab->m", g_inv, d_christoffel)

    gamma_surface = T.T @ gamma @ T
    delta_h_inv = -geo.h_inv @ gamma_surface @ geo.h_inv
    bulk = (jnp.einsum("ab,ab->", geo.K - geo.k * geo.h, delta_h_inv)
            - dV @ surface.ambient(x) @ n) * geo.volume
    W = n @ gamma @ T  # (i_Sigma^* i_n delta_g)_b
    flux = geo.volume * (geo.h_inv @ W)
    return bulk, flux


def ghy_metric_variation(surface: Hypersurface, delta_g: TensorField) -> float:
    """d/d eps int k(g + eps dg) mu(h_eps) at fixed embedding.

    1/2 [int ((K - k h) : delta(h^-1) - g(dV, n)) mu(h) - int_dS sigma h(dW, nu) mu(gamma)]
    with dV^m = g^ab dGamma^m_ab - g^am dGamma^b_ab and dW = (i^* i_n delta_g)^sharp.
    """
    if delta_g.rank != (0, 2):
        raise ContractViolation(f"{delta_g.name}: metric variation must be a (0, 2) field, got {delta_g.rank}")
    bulk_values = over_nodes(lambda s: _metric_variation_terms(surface, delta_g, s)[0],
                             surface.rule.points, surface.exact)
    bulk = surface.rule.integrate(bulk_values)
    boundary = _face_flux(surface, lambda s: _metric_variation_terms(surface, delta_g, s)[1])
    return 0.5 * (bulk - boundary)


def perturbed_metric(metric: MetricField, delta_g: TensorField, eps: float) -> MetricField:
    return MetricField(lambda x: metric(x) + eps * delta_g(x), metric.chart, metric.signature,
                       metric.differentiable and delta_g.differentiable, name=f"{metric.name}+{eps:g}dg")


def ghy_metric_variation_fd(surface: Hypersurface, delta_g: TensorField, step: float = 1e-4) -> float:
    return richardson_central(
        lambda eps: mean_curvature_integral(surface.with_metric(perturbed_metric(surface.ambient, delta_g, eps))),
        step,
    )


# ============================================================
# Hypersurface variation
# ============================================================

class SurfaceVariation:
    """Displacement f n + T X with f a parameter function and X a parameter vector field."""

    def __init__(self, normal: Callable, tangential: Optional[Callable] = None, dimension: Optional[int] = None,
                 name: str = "variation"):
        if tangential is None:
            if dimension is None:
                raise ContractViolation(f"{name}: a zero tangential part needs the surface dimension")
            zero = jnp.zeros(dimension)
            tangential = lambda s: zero + 0.0 * s[0]
        self.normal = normal
        self.tangential = tangential
        self.name = name


def constant_normal_variation(value: float, dimension: int) -> SurfaceVariation:
    return SurfaceVariation(lambda s: value + 0.0 * s[0], dimension=dimension, name=f"f={value:g}")


def random_surface_variation(chart: Chart, seed: int = 0, amplitude: float = 0.3,
                             tangential: bool = True) -> SurfaceVariation:
    rng = np.random.default_rng(seed)
    dim = chart.dimension
    f_series = random_trig_series(rng, 1, dim)
    X_series = random_trig_series(rng, dim, dim)
    normal = lambda s: amplitude * trig_values(f_series, s)[0]
    if not tangential:
        return SurfaceVariation(normal, dimension=dim, name=f"random({seed})")
    return SurfaceVariation(normal, lambda s: amplitude * trig_values(X_series, s), name=f"random({seed})")


def _normal_ricci(surface: Hypersurface, geo: InducedGeometry):
    ricci = curvature(surface.ambient, geo.point).ricci
    return geo.normal @ ricci @ geo.normal


def ghy_surface_variation(surface: Hypersurface, variation: SurfaceVariation) -> float:
    """int f (k^2 - Tr K^2 - Ric(n, n)) mu(h) + int_dS sigma h(k X - eps grad f, nu) mu(gamma)."""
    def bulk(s):
        geo = induced_geometry(surface, s)
        return variation.normal(s) * (geo.k ** 2 - geo.trace_K2 - _normal_ricci(surface, geo)) * geo.volume

    def flux(s):
        geo = induced_geometry(surface, s)
        grad_f = jax.grad(variation.normal)(s)
        return geo.volume * (geo.k * variation.tangential(s) - geo.epsilon * geo.h_inv @ grad_f)

    value = surface.rule.integrate(over_nodes(bulk, surface.rule.points, surface.exact))
    return value + _face_flux(surface, flux)


def ghy_surface_variation_fd(surface: Hypersurface, variation: SurfaceVariation, step: float = 1e-4) -> float:
    """d/d eps of int k mu(h) over the displaced surface."""
    return richardson_central(lambda eps: mean_curvature_integral(surface.displaced(variation, eps)), step)


# ============================================================
# Supporting variations
# ============================================================

class VariationSet(NamedTuple):
    tangent: jnp.ndarray  # [a, mu] covariant eps-derivative of T_a
    normal: jnp.ndarray   # [mu]
    h: jnp.ndarray
    volume: jnp.ndarray
    K: jnp.ndarray
    k: jnp.ndarray


class SupportingVariations(NamedTuple):
    analytic: VariationSet  # stacked over sample points
    oracle: VariationSet
    errors: dict            # name -> max |analytic - oracle| / (1 + max |oracle|)
    assembled: float        # int (dk mu + k dmu) over the quadrature rule


def _parameter_christoffel(surface: Hypersurface, s):
    h_fn = lambda y: surface_frame(surface, y).h
    dh = derivative(h_fn, s, exact=surface.exact, step=surface.chart.step)
    return christoffel_symbols(jnp.linalg.inv(h_fn(s)), dh)


def analytic_variations(surface: Hypersurface, variation: SurfaceVariation, s) -> VariationSet:
    """The closed formulas for delta T, delta n, delta h, delta mu(h), delta K and delta k."""
    s = jnp.asarray(s, dtype=jnp.float64)
    exact = surface.exact
    step = surface.chart.step
    geo = induced_geometry(surface, s)
    x, T, n, eps = geo.point, geo.tangents, geo.normal, geo.epsilon
    g = surface.ambient(x)
    gamma = christoffel(surface.ambient, x)
    curv = curvature(surface.ambient, x)

    f = variation.normal(s)
    df = jax.grad(variation.normal)(s)
    hess_f = jax.hessian(variation.normal)(s)
    X = variation.tangential(s)
    dX = jax.jacfwd(variation.tangential)(s)  # [c, a] = d_a X^c
    dX = dX.T                                   # [a, c]
    h_gamma = _parameter_christoffel(surface, s)

    nabla_X = dX + jnp.einsum("cad,d->ac", h_gamma, X)  # [a, c] = D_a X^c
    dn = derivative(lambda y: surface_frame(surface, y).normal, s, exact=exact, step=step)
    nabla_n = dn + jnp.einsum("mab,aB,b->Bm", gamma, T, n)

    tangent = (jnp.outer(df, n) + f * nabla_n + nabla_X @ T.T
               - eps * jnp.outer(geo.K @ X, n))
    normal = T @ (geo.h_inv @ (-eps * df + geo.K @ X))

    h = geo.h
    dh = derivative(lambda y: surface_frame(surface, y).h, s, exact=exact, step=step)
    lie_h = jnp.einsum("c,cab->ab", X, dh) + dX @ h + (dX @ h).T
    delta_h = 2.0 * f * geo.K + lie_h

    div_X = jnp.trace(nabla_X)
    delta_volume = (f * geo.k + div_X) * geo.volume

    K_fn = lambda y: induced_geometry(surface, y).K
    dK = derivative(K_fn, s, exact=exact, step=step)
    lie_K = jnp.einsum("c,cab->ab", X, dK) + dX @ geo.K + (dX @ geo.K).T
    riemann_lowered = jnp.einsum("ml,lanb->manb", g, curv.riemann)
    normal_riemann = jnp.einsum("m,aA,n,bB,manb->AB", n, T, n, T, riemann_lowered)
    hess_Sigma = hess_f - jnp.einsum("cab,c->ab", h_gamma, df)
    K2 = geo.K @ geo.h_inv @ geo.K
    delta_K = f * K2 - f * normal_riemann - eps * hess_Sigma + lie_K

    dk = derivative(lambda y: induced_geometry(surface, y).k, s, exact=exact, step=step)
    laplacian = jnp.einsum("ab,ab->", geo.h_inv, hess_Sigma)
    delta_k = (-f * geo.trace_K2 - f * (n @ curv.ricci @ n) - eps * laplacian + dk @ X)
    return VariationSet(tangent, normal, delta_h, delta_volume, delta_K, delta_k)


def _displaced_values(surface: Hypersurface, variation: SurfaceVariation, s, eps: float) -> VariationSet:
    moved = surface.displaced(variation, eps)
    geo = induced_geometry(moved, s)
    return VariationSet(geo.tangents.T, geo.normal, geo.h, geo.volume, geo.K, geo.k)


def fd_variations(surface: Hypersurface, variation: SurfaceVariation, s, step: float = 1e-4) -> VariationSet:
    """Perturb-and-recompute oracle; vectors get the covariant correction Gamma(delta sigma, .)."""
    s = jnp.asarray(s, dtype=jnp.float64)
    cache = {}

    def values(eps: float) -> VariationSet:
        if eps not in cache:
            cache[eps] = jax.tree_util.tree_map(lambda a: np.asarray(a, dtype=float),
                                                _displaced_values(surface, variation, s, eps))
        return cache[eps]

    def slope(index: int) -> np.ndarray:
        coarse = (values(step)[index] - values(-step)[index]) / (2.0 * step)
        fine = (values(0.5 * step)[index] - values(-0.5 * step)[index]) / step
        return (4.0 * fine - coarse) / 3.0

    raw = VariationSet(*(slope(i) for i in range(len(VariationSet._fields))))
    frame = surface_frame(surface, s)
    displacement = variation.normal(s) * frame.normal + frame.tangents @ variation.tangential(s)
    gamma = np.asarray(christoffel(surface.ambient, frame.point))
    tangent = raw.tangent + np.einsum("mab,a,Bb->Bm", gamma, np.asarray(displacement), np.asarray(frame.tangents).T)
    normal = raw.normal + np.einsum("mab,a,b->m", gamma, np.asarray(displacement), np.asarray(frame.normal))
    return raw._replace(tangent=tangent, normal=normal)


def supporting_variations(surface: Hypersurface, variation: SurfaceVariation, points=None,
                          step: float = 1e-4) -> SupportingVariations:
    points = surface.sample_points() if points is None else np.asarray(points, dtype=float)
    analytic_rows, oracle_rows = [], []
    for s in points:
        analytic_rows.append(jax.tree_util.tree_map(lambda a: np.asarray(a, dtype=float),
                                                    analytic_variations(surface, variation, s)))
        oracle_rows.append(fd_variations(surface, variation, s, step))
    stack = lambda rows: VariationSet(*(np.stack(parts) for parts in zip(*rows)))
    analytic = stack(analytic_rows)
    oracle = stack(oracle_rows)
    errors = {}
    for name, a, o in zip(VariationSet._fields, analytic, oracle):
        errors[name] = float(np.max(np.abs(a - o)) / (1.0 + np.max(np.abs(o))))

    def density_variation(s):
        v = analytic_variations(surface, variation, s)
        geo = induced_geometry(surface, s)
        return v.k * geo.volume + geo.k * v.volume

    assembled = surface.rule.integrate(over_nodes(density_variation, surface.rule.points, surface.exact))
    return SupportingVariations(analytic, oracle, errors, assembled)


# ============================================================
# Gauss-Codazzi
# ============================================================

class GaussCodazzi(NamedTuple):
    scalar: jnp.ndarray   # G(n, n) + 1/2 (eps R^S + Tr K^2 - k^2)
    codazzi: jnp.ndarray  # G(T_c, n) - (h^ab D_a K_cb - d_c k)


def _lowered_einstein(metric: MetricField, x):
    g = metric(x)
    return g @ curvature(metric, x).einstein @ g


def induced_metric_field(surface: Hypersurface) -> MetricField:
    signature = surface.ambient.signature
    if signature == Signature.LORENTZIAN:
        centre = np.array([0.5 * (lo + hi) for lo, hi in surface.chart.bounds])
        eps = float(surface_frame(surface, centre).epsilon)
        signature = Signature.RIEMANNIAN if eps < 0 else Signature.LORENTZIAN
    return MetricField(lambda s: surface_frame(surface, s).h, surface.chart, signature,
                       surface.exact, name=f"h[{surface.name}]")


def gauss_codazzi_residual(surface: Hypersurface, s) -> GaussCodazzi:
    s = jnp.asarray(s, dtype=jnp.float64)
    geo = induced_geometry(surface, s)
    G = _lowered_einstein(surface.ambient, geo.point)
    h_metric = induced_metric_field(surface)
    intrinsic_scalar = curvature(h_metric, s).scalar
    scalar = geo.normal @ G @ geo.normal + 0.5 * (geo.epsilon * intrinsic_scalar + geo.trace_K2 - geo.k ** 2)

    K_field = TensorField(lambda y: induced_geometry(surface, y).K, surface.chart, 0, 2, 0, surface.exact, name="K")
    DK = covariant_derivative(K_field, Connection(h_metric), s)  # [a, c, b] = D_a K_cb
    dk = derivative(lambda y: induced_geometry(surface, y).k, s, exact=surface.exact, step=surface.chart.step)
    codazzi_rhs = jnp.einsum("ab,acb->c", geo.h_inv, DK) - dk
    codazzi = geo.tangents.T @ G @ geo.normal - codazzi_rhs
    return GaussCodazzi(scalar, codazzi)


# ============================================================
# Junctions
# ============================================================

class JunctionJumps(NamedTuple):
    h: float
    K: float
    einstein_normal: float      # [G(n, n)]
    einstein_tangential: float  # [G(T, n)]


def junction_check(surface: Hypersurface, interior: MetricField, exterior: MetricField) -> JunctionJumps:
    """Component jumps at the quadrature nodes with one normal side for both metrics."""
    inside = surface.with_metric(interior, name=f"{surface.name}-")
    outside = surface.with_metric(exterior, name=f"{surface.name}+")

    def sides(s):
        out = []
        for side in (inside, outside):
            geo = induced_geometry(side, s)
            G = _lowered_einstein(side.ambient, geo.point)
            out.append((geo.h, geo.K, geo.normal @ G @ geo.normal, geo.tangents.T @ G @ geo.normal))
        return out

    exact = interior.differentiable and exterior.differentiable
    minus, plus = over_nodes(sides, surface.rule.points, exact)
    jump = lambda i: float(np.max(np.abs(np.asarray(plus[i]) - np.asarray(minus[i]))))
    return JunctionJumps(jump(0), jump(1), jump(2), jump(3))


# ============================================================
# Surface families
# ============================================================

def coordinate_surface(ambient: MetricField, axis: int, value: float, bounds: Sequence[Tuple[float, float]],
                       orientation: int = 1, nodes: Optional[Nodes] = None, closed: bool = False,
                       name: Optional[str] = None) -> Hypersurface:
    """x^axis = value, parametrised by the remaining coordinates in order.

    ``orientation=+1`` points n towards increasing x^axis (future for t-slices,
    outward for r = R tubes).
    """
    dim = ambient.dimension
    if not 0 <= axis < dim:
        raise ContractViolation(f"axis {axis} outside 0..{dim - 1}")
    chart = Chart(name=name or f"x{axis}={value:g}", bounds=tuple(tuple(map(float, b)) for b in bounds))

    def embedding(s):
        return jnp.insert(s, axis, value)

    centre = np.insert(np.array([0.5 * (lo + hi) for lo, hi in chart.bounds]), axis, value)
    g_inv_axis = float(np.linalg.inv(np.asarray(ambient(jnp.asarray(centre)), dtype=float))[axis, axis])
    side = orientation * (-1) ** axis * (1 if g_inv_axis > 0 else -1)
    return Hypersurface(embedding, chart, ambient, side, nodes, closed, name=chart.name)


def hyperplane(ambient: MetricField, axis: int = 1, value: float = 0.5, nodes: Optional[Nodes] = None) -> Hypersurface:
    bounds = [b for i, b in enumerate(ambient.chart.bounds) if i != axis]
    return coordinate_surface(ambient, axis, value, bounds, 1, nodes, name=f"hyperplane x{axis}={value:g}")


def time_slice(ambient: MetricField, time: float, bounds=None, future: bool = True,
               nodes: Optional[Nodes] = None) -> Hypersurface:
    bounds = bounds or ambient.chart.bounds[1:]
    return coordinate_surface(ambient, 0, time, bounds, 1 if future else -1, nodes, name=f"t={time:g}")


def radial_tube(ambient: MetricField, radius: float, time_range, theta_range=(0.0, math.pi),
                phi_range=(0.0, 2.0 * math.pi), nodes: Optional[Nodes] = None) -> Hypersurface:
    """r = R in (t, r, theta, phi) coordinates, outward normal."""
    return coordinate_surface(ambient, 1, radius, [time_range, theta_range, phi_range], 1, nodes,
                              name=f"r={radius:g}")


def sphere(ambient: MetricField, radius: float = 1.0, centre=(0.0, 0.0, 0.0), nodes: Optional[Nodes] = None) -> Hypersurface:
    """Round sphere (theta, phi) -> centre + r (sin cos, sin sin, cos) with outward normal."""
    if ambient.dimension != 3:
        raise ContractViolation(f"sphere needs a 3-dimensional ambient chart, got {ambient.dimension}")
    centre = jnp.asarray(centre, dtype=jnp.float64)
    chart = Chart(name=f"sphere({radius:g})", bounds=((0.0, math.pi), (0.0, 2.0 * math.pi)))

    def embedding(s):
        theta, phi = s[0], s[1]
        return centre + radius * jnp.array([jnp.sin(theta) * jnp.cos(phi), jnp.sin(theta) * jnp.sin(phi),
                                            jnp.cos(theta)])

    return Hypersurface(embedding, chart, ambient, 1, nodes, closed=True, name=chart.name)


def random_graph_surface(ambient: MetricField, seed: int = 0, axis: int = 1, amplitude: float = 0.05,
                         nodes: Optional[Nodes] = None) -> Hypersurface:
    """x^axis = centre + amplitude * trig(s) over the middle of the chart."""
    dim = ambient.dimension
    rng = np.random.default_rng(seed)
    series = random_trig_series(rng, 1, dim - 1)
    lo, hi = ambient.chart.bounds[axis]
    level = 0.5 * (lo + hi)
    others = [b for i, b in enumerate(ambient.chart.bounds) if i != axis]
    bounds = tuple((a + 0.2 * (b - a), b - 0.2 * (b - a)) for a, b in others)
    chart = Chart(name=f"graph({seed})", bounds=bounds)

    def embedding(s):
        return jnp.insert(s, axis, level + amplitude * trig_values(series, s)[0])

    centre = np.array([0.5 * (a + b) for a, b in bounds])
    g_inv_axis = float(np.linalg.inv(np.asarray(ambient(jnp.insert(jnp.asarray(centre), axis, level))))[axis, axis])
    side = (-1) ** axis * (1 if g_inv_axis > 0 else -1)
    return Hypersurface(embedding, chart, ambient, side, nodes, name=chart.name)
