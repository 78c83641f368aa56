"""
Check Registry for relcont
==========================

Every verified identity, theorem or closed-form solution is a named check:
a function of the scene returning residual values, the anchor it verifies
and its default tolerances per derivative mode.

A check returns a ``ResidualField``, an array of residual values, a single
residual or a ``(max, l2)`` pair; the harness turns that into a ``CheckRecord``.

Usage:
    from relcont.checks import CHECKS, get_check

    check = get_check("junction_metric")
    print(check.anchor, check.exact_tolerance)
"""

import math
from typing import Any, Callable, Dict, NamedTuple, Optional

import jax
import jax.numpy as jnp
import numpy as np

from relcont.dynamics import (
    ConvectiveFields,
    ResidualField,
    continuity_residual,
    convective_el_residual,
    elastic_equations_residual,
    eulerian_el_residual,
    euler_projection_residual,
    fluid_equations_residual,
    sample_residual,
    stress_energy,
)
from relcont.errors import ContractViolation, UnknownCheckError
from relcont.geometry import (
    Chart,
    Connection,
    bianchi_residual,
    contraction_identity_residual,
    curvature,
    lie_derivative,
    lie_flow_oracle,
)
from relcont.gravity import MatchedSpacetime, matched_results, total_action, vacuum_residual
from relcont.hypersurface import (
    Hypersurface,
    extrinsic_agreement,
    gauss_codazzi_residual,
    ghy_metric_variation,
    ghy_metric_variation_fd,
    ghy_surface_variation,
    ghy_surface_variation_fd,
    induced_geometry,
    induced_metric_field,
    mean_curvature_integral,
    over_nodes,
    supporting_variations,
    surface_frame,
)
from relcont.lagrangians import (
    covariance_check,
    eulerian_state,
    isotropy_residual,
    material_lagrangian,
    particle_lagrangian,
    spacetime_covariance_identity,
)
from relcont.numerics import gauss_legendre, random_trig_series, trig_values
from relcont.oracles import (
    DIFFEO_FAMILIES,
    moving_domain_sides,
    random_symmetric_field,
    random_tensor_field,
    random_vector_field,
)
from relcont.scenes import Scene
from relcont.worldtube import deformation_at, projection_from_generalized

CheckFn = Callable[[Scene], Any]


class Check(NamedTuple):
    name: str
    anchor: str
    run: CheckFn
    exact_tolerance: float
    fd_tolerance: float
    exact_only: bool = False    # needs automatic differentiation; dropped in fd mode
    always_exact: bool = False  # pointwise algebra on the differentiable fields in every mode

    def tolerance(self, exact: bool) -> float:
        return self.exact_tolerance if exact else self.fd_tolerance


def _require(value, what: str, scene: Scene):
    if value is None:
        raise ContractViolation(f"scene {scene.name!r} has no {what}")
    return value


def _spread(points: np.ndarray, count: int = 3) -> np.ndarray:
    return points[np.linspace(0, len(points) - 1, count).astype(int)]


def _field_points(scene: Scene, exact: bool) -> np.ndarray:
    """Full grid when the evaluation is vectorised, the coarse grid otherwise."""
    return scene.points() if exact else scene.coarse_points()


def _state_values(scene: Scene, fn: Callable) -> np.ndarray:
    """Evaluate ``fn(state)`` on Eulerian states pushed from body points (no tube inversion)."""
    tube = _require(scene.tube, "world-tube", scene)
    lagrangian_metric = scene.state_metric

    def at(X):
        return fn(eulerian_state(tube, scene.refs, lagrangian_metric, X))

    return np.asarray(jax.vmap(at)(jnp.asarray(scene.body_points())))


# ============================================================
# Geometry core
# ============================================================

def _bianchi(scene: Scene):
    metric = scene.state_metric
    return sample_residual("bianchi", lambda x: bianchi_residual(metric, x), scene.coarse_points(), True)


def _connection_compatibility(scene: Scene):
    connection = Connection(scene.metric)
    return sample_residual("compatibility", lambda x: jnp.stack(connection.compatibility_residual(x)),
                           scene.coarse_points(), scene.metric.differentiable)


def _random_fields(scene: Scene):
    chart = scene.state_metric.chart
    kappa = random_tensor_field(chart, 1, 1, seed=scene.seed, name="kappa")
    pi = random_tensor_field(chart, 1, 1, seed=scene.seed + 1, weight=1, name="pi")
    zeta = random_vector_field(chart, seed=scene.seed + 2, amplitude=0.5)
    return kappa, pi, zeta


def _lie_contraction(scene: Scene):
    kappa, pi, zeta = _random_fields(scene)
    connection = Connection(scene.state_metric)
    return sample_residual("lie_contraction",
                           lambda x: contraction_identity_residual(kappa, pi, zeta, x, connection),
                           scene.coarse_points(), True)


def _lie_flow(scene: Scene):
    chart = scene.state_metric.chart
    field = random_tensor_field(chart, 0, 2, seed=scene.seed + 3, name="sigma")
    zeta = random_vector_field(chart, seed=scene.seed + 4, amplitude=0.3)
    values = []
    for x in _spread(scene.coarse_points()):
        coordinate = np.asarray(lie_derivative(field, zeta, jnp.asarray(x)))
        values.append(np.max(np.abs(coordinate - lie_flow_oracle(field, zeta, x))))
    return np.asarray(values)


# ============================================================
# World-tube
# ============================================================

def _reference_advection(scene: Scene):
    refs = _require(scene.refs, "reference fields", scene)
    return max(refs.advection_residuals(scene.body_points()).values())


def _lateral_tangency(scene: Scene):
    """g(w, n) on the images of the lateral faces X^i = const of the reference block."""
    tube = _require(scene.tube, "world-tube", scene)
    metric = scene.state_metric
    bounds = tube.domain_chart.bounds
    worst = []
    for axis in range(1, tube.dimension):
        others = bounds[:axis] + bounds[axis + 1:]
        for value in bounds[axis]:
            chart = Chart(name=f"lateral X{axis}={value:g}", bounds=others)
            surface = Hypersurface(lambda s, a=axis, v=value: tube.map(jnp.insert(s, a, v)), chart, metric,
                                   nodes=3, name=chart.name)

            def tangency(s, a=axis, v=value, surface=surface):
                frame = surface_frame(surface, s)
                w = tube.velocity(jnp.insert(s, a, v))
                return w @ metric(frame.point) @ frame.normal

            worst.append(np.max(np.abs(np.asarray(jax.vmap(tangency)(jnp.asarray(surface.rule.points))))))
    return np.asarray(worst)


def _deformation_routes(scene: Scene):
    tube = _require(scene.tube, "world-tube", scene)
    refs = scene.refs
    body_metric = _require(refs.body_metric, "body metric", scene)
    metric = scene.state_metric
    light = scene.constants.c

    def gap(X):
        d = deformation_at(tube, metric, body_metric, X, light, check=False)
        return jnp.maximum(jnp.max(jnp.abs(d.right_cauchy_green[1:, 1:] - d.right_cauchy_green_coordinate)),
                           jnp.max(jnp.abs(d.cauchy - d.cauchy_coordinate)))

    return np.asarray(jax.vmap(gap)(jnp.asarray(scene.body_points())))


# ============================================================
# Lagrangians
# ============================================================

def _spacetime_covariance(scene: Scene):
    diffeo = DIFFEO_FAMILIES["random_spacetime"](scene.tube.dimension, seed=scene.seed, amplitude=0.05)
    return covariance_check(scene.lagrangian, "spacetime", diffeo, scene.tube, scene.refs, scene.state_metric,
                            scene.body_points())


def _material_covariance(scene: Scene):
    if scene.refs.body_metric is not None:
        diffeo = DIFFEO_FAMILIES["body_stretch"](scene.tube.dimension, factor=1.5)
    else:
        diffeo = DIFFEO_FAMILIES["body_twist"](scene.tube.dimension, rate=0.3)
    return covariance_check(scene.lagrangian, "material", diffeo, scene.tube, scene.refs, scene.state_metric,
                            scene.body_points())


def _covariance_identity(scene: Scene):
    lagrangian = _require(scene.lagrangian, "Lagrangian", scene)

    def residual(state):
        identity = spacetime_covariance_identity(lagrangian, state)
        return jnp.maximum(identity.residual, identity.metric_hat_residual)

    return _state_values(scene, residual)


def _stress_energy_agreement(scene: Scene):
    lagrangian = _require(scene.lagrangian, "Lagrangian", scene)

    def residual(state):
        se = stress_energy(lagrangian, state)
        return jnp.maximum(jnp.max(jnp.abs(se.total - se.metric_route)), jnp.max(jnp.abs(se.total - se.split)))

    return _state_values(scene, residual)


def _closed_form_partials(scene: Scene):
    lagrangian = _require(scene.lagrangian, "Lagrangian", scene)
    sym = lambda a: 0.5 * (a + a.T)

    def residual(state):
        auto = lagrangian.partials(state)
        closed = lagrangian.closed_form_partials(state)
        gaps = [jnp.abs(auto.value - closed.value), jnp.max(jnp.abs(auto.d_w - closed.d_w)),
                jnp.abs(auto.d_rho - closed.d_rho), jnp.abs(auto.d_s - closed.d_s),
                jnp.max(jnp.abs(sym(auto.d_cauchy) - sym(closed.d_cauchy))),
                jnp.max(jnp.abs(sym(auto.d_metric) - sym(closed.d_metric)))]
        return jnp.max(jnp.stack(gaps))

    return _state_values(scene, residual)


def _isotropy(scene: Scene):
    stored = _require(scene.lagrangian.stored, "stored energy", scene)

    def residual(state):
        return isotropy_residual(stored, state.cauchy, projection_from_generalized(state.metric, state.w))

    return _state_values(scene, residual)


def _particle_limit(scene: Scene):
    """Integral of the material density over a small body cell against -c sqrt(-g(x', x')) m."""
    tube, refs, metric = scene.tube, scene.refs, scene.state_metric
    domain = tube.domain_chart
    centre = np.array([0.5 * (lo + hi) for lo, hi in domain.bounds])
    half = 1e-3 * domain.scale
    rule = gauss_legendre([(c - half, c + half) for c in centre[1:]], 3)
    lift = lambda Xb: jnp.concatenate([jnp.asarray(centre[:1]), Xb])

    densities = jax.vmap(lambda Xb: material_lagrangian(scene.lagrangian, tube, refs, metric, lift(Xb)))(
        jnp.asarray(rule.points))
    masses = jax.vmap(lambda Xb: refs.mass(lift(Xb)))(jnp.asarray(rule.points))
    cell = rule.integrate(densities)
    mass = rule.integrate(masses)
    particle = float(particle_lagrangian(metric(tube(centre)), tube.velocity(centre), mass, scene.constants.c))
    return abs(cell - particle) / abs(particle)


# ============================================================
# Dynamics
# ============================================================

def _el(scene: Scene):
    model = _require(scene.model, "matter model", scene)
    return scene.memo("eulerian_el", lambda: eulerian_el_residual(model, _field_points(scene, model.exact)))


def _balance(scene: Scene):
    model = _require(scene.model, "matter model", scene)
    stored = getattr(model, "lagrangian", None) is not None and model.lagrangian.stored is not None
    equations = elastic_equations_residual if stored else fluid_equations_residual
    return scene.memo("balance", lambda: equations(model, scene.coarse_points()))


def _euler(scene: Scene):
    balance = _balance(scene)
    return max(balance.momentum.max_residual, balance.energy.max_residual)


def _euler_split(scene: Scene):
    """Split residuals and div T vanish together: neither exceeds ten times the other."""
    balance = _balance(scene)
    split = max(balance.momentum.max_residual, balance.energy.max_residual)
    divergence = balance.divergence.max_residual
    return max(0.0, split - 10.0 * divergence, divergence - 10.0 * split)


def _euler_projection(scene: Scene):
    return euler_projection_residual(scene.model, _balance(scene))


def _continuity(quantity: str) -> CheckFn:
    def run(scene: Scene):
        fields = _require(scene.fields, "continuum fields", scene)
        result = continuity_residual(fields, quantity, _field_points(scene, fields.exact))
        return max(result.generalized, result.proper, key=lambda r: r.max_residual)
    return run


def _convective_el(scene: Scene):
    fields = ConvectiveFields.from_tube(scene.lagrangian, scene.tube, scene.refs, scene.metric)
    per_axis = min(5, scene.grid) if fields.exact else scene.fd_grid
    return convective_el_residual(fields, scene.body_points(per_axis))


def _el_representation_agreement(scene: Scene):
    """| |Phi^* div T| - |convective residual| | at body points; div T is a weight-1 covector density."""
    tube = _require(scene.tube, "world-tube", scene)
    model = _require(scene.model, "matter model", scene)
    body = scene.body_points(2)
    images = np.asarray(jax.vmap(tube.map)(jnp.asarray(body)))
    eulerian = eulerian_el_residual(model, images).generic
    convective = convective_el_residual(
        ConvectiveFields.from_tube(scene.lagrangian, tube, scene.refs, scene.state_metric), body)
    values = []
    for X, e, E in zip(body, eulerian.values, convective.values):
        jac = np.asarray(tube.jacobian(X))
        pulled = jac.T @ e * abs(np.linalg.det(jac))
        values.append(abs(np.linalg.norm(pulled) - np.linalg.norm(E)))
    return ResidualField("el_representation_agreement", values, body, eulerian.mode)


def _moving_domain(scene: Scene):
    """Both sides of the moving-domain formula for a metric-perturbed Lagrangian on a displaced tube."""
    tube = _require(scene.tube, "world-tube", scene)
    metric = scene.state_metric
    chart = metric.chart
    delta = random_symmetric_field(chart, seed=scene.seed + 5, amplitude=0.05)
    push = random_vector_field(chart, seed=scene.seed + 6, amplitude=0.1)
    fields = scene.fields

    if fields is not None and fields.exact and scene.lagrangian is not None:
        lagrangian = scene.lagrangian

        def density(eps, x):
            state = fields.state(x)
            return lagrangian.density(state._replace(metric=state.metric + eps * delta(x)))
    else:
        series = random_trig_series(np.random.default_rng(scene.seed + 7), 1, chart.dimension)

        def density(eps, x):
            weight = 1.0 + 0.3 * trig_values(series, x)[0]
            return weight * jnp.sqrt(jnp.abs(jnp.linalg.det(metric(x) + eps * delta(x))))

    embedding = lambda eps, X: tube.map(X) + eps * push(tube.map(X))
    sides = moving_domain_sides(density, embedding, tube.domain_chart.bounds, nodes=6)
    return abs(sides.lhs - sides.rhs) / max(1.0, abs(sides.lhs))


# ============================================================
# Hypersurfaces
# ============================================================

def _surface(scene: Scene) -> Hypersurface:
    return _require(scene.surface, "hypersurface", scene)


def _surface_points(surface: Hypersurface) -> np.ndarray:
    return surface.sample_points(2 if surface.dimension > 2 else 3)


def _extrinsic(scene: Scene):
    surface = _surface(scene)
    return max(extrinsic_agreement(surface, surface.sample_points()))


def _gauss_codazzi(scene: Scene):
    surface = _surface(scene)
    result = over_nodes(lambda s: gauss_codazzi_residual(surface, s), _surface_points(surface), surface.exact)
    return np.concatenate([np.abs(np.asarray(result.scalar)).ravel(), np.abs(np.asarray(result.codazzi)).ravel()])


def _supporting(scene: Scene):
    surface = _surface(scene)
    result = supporting_variations(surface, scene.local_variation, points=_surface_points(surface))
    return max(result.errors.values())


def _ghy_metric(scene: Scene):
    surface = _surface(scene)
    delta = random_symmetric_field(surface.ambient.chart, seed=scene.seed + 1, amplitude=0.05)
    analytic = ghy_metric_variation(surface, delta)
    oracle = ghy_metric_variation_fd(surface, delta)
    return abs(analytic - oracle) / max(1.0, abs(oracle))


def _ghy_surface(scene: Scene):
    surface = _surface(scene)
    analytic = ghy_surface_variation(surface, scene.variation)
    oracle = ghy_surface_variation_fd(surface, scene.variation)
    residual = abs(analytic - oracle) / max(1.0, abs(oracle))
    if scene.expected_ghy_rate is not None:
        residual = max(residual, abs(analytic - scene.expected_ghy_rate) / abs(scene.expected_ghy_rate))
    return residual


def _sphere_error(surface: Hypersurface, radius: float) -> float:
    return abs(mean_curvature_integral(surface) - 8.0 * math.pi * radius) / (8.0 * math.pi * radius)


def _ghy_sphere(scene: Scene):
    return _sphere_error(_surface(scene), float(scene.parameters["radius"]))


def _induced_scalar(scene: Scene):
    surface = _surface(scene)
    radius = float(scene.parameters["radius"])
    h = induced_metric_field(surface)
    return sample_residual("induced_scalar", lambda s: curvature(h, s).scalar - 2.0 / radius ** 2,
                           surface.sample_points(), h.differentiable)


def _quadrature_convergence(scene: Scene):
    """Error ratio of the sphere integral between 8 and 4 nodes per axis."""
    surface = _surface(scene)
    radius = float(scene.parameters["radius"])
    coarse = _sphere_error(surface.with_nodes(4), radius)
    fine = _sphere_error(surface.with_nodes(8), radius)
    return fine / max(coarse, np.finfo(float).tiny)


def _frw_slice(scene: Scene):
    frw = _require(scene.frw, "FRW solution", scene)
    surface = _surface(scene)
    expected = frw.slice_curvature(frw.time_mid)
    return sample_residual("frw_slice", lambda s: induced_geometry(surface, s).k - expected,
                           surface.sample_points(), surface.exact)


def _friedmann(scene: Scene):
    frw = _require(scene.frw, "FRW solution", scene)
    t0, t1 = frw.chart.bounds[0]
    values = [max(abs(r) for r in frw.friedmann_residuals(t)) for t in np.linspace(t0, t1, 5)]
    return np.asarray(values)


# ============================================================
# Gravity coupling
# ============================================================

def _matched(scene: Scene) -> MatchedSpacetime:
    return _require(scene.matched, "matched spacetime", scene)


def _matched_result(name: str) -> CheckFn:
    def run(scene: Scene):
        matched = _matched(scene)
        results = scene.memo("matched", lambda: {r.name: r for r in matched_results(matched, scene.tolerances)})
        if name not in results:
            raise ContractViolation(f"scene {scene.name!r} does not produce {name} (no junction surface)")
        return results[name]
    return run


def _einstein_exterior(scene: Scene):
    if scene.matched is not None:
        return _matched_result("einstein_exterior_residual")(scene)
    return vacuum_residual(scene.metric, scene.points(), name="einstein_exterior")


def _doubled(nodes):
    return 2 * nodes if isinstance(nodes, int) else tuple(2 * n for n in nodes)


def _action_stability(scene: Scene):
    matched = _matched(scene)
    coarse = total_action(matched, matched.nodes).total
    fine = total_action(matched, _doubled(matched.nodes)).total
    return abs(fine - coarse) / max(1.0, abs(fine))


def _tov(scene: Scene):
    star = _require(scene.star, "star", scene)
    result = star.tov_check()
    return max(result.balance, result.integration)


# ============================================================
# Registry
# ============================================================

CHECKS: Dict[str, Check] = {check.name: check for check in (
    Check("bianchi_identity", "contracted Bianchi identity: the Einstein density is divergence free",
          _bianchi, 1e-6, 1e-6, always_exact=True),
    Check("connection_compatibility", "Levi-Civita connection is torsion free and metric compatible",
          _connection_compatibility, 1e-8, 1e-5),
    Check("lie_contraction_identity",
          "(L_zeta kappa).pi = zeta(D kappa.pi - D.A) + d(A zeta) for a (p,q) field and a (q,p) density",
          _lie_contraction, 1e-8, 1e-8, always_exact=True),
    Check("lie_flow_oracle", "coordinate Lie derivative equals d/dt of the flow pullback",
          _lie_flow, 1e-5, 1e-5, always_exact=True),
    Check("reference_advection", "W, R, S and G are Lie-dragged by W and G is degenerate along W",
          _reference_advection, 1e-8, 1e-8, always_exact=True),
    Check("lateral_velocity_tangency", "generalized velocity is tangent to the lateral world-tube boundary",
          _lateral_tangency, 1e-8, 1e-8, always_exact=True),
    Check("deformation_routes", "C = Phi^* p and c = Phi_* G match their coordinate forms",
          _deformation_routes, 1e-8, 1e-8, always_exact=True),
    Check("spacetime_covariance", "material Lagrangian is invariant under spacetime diffeomorphisms",
          _spacetime_covariance, 1e-6, 1e-6, always_exact=True),
    Check("material_covariance", "material Lagrangian is equivariant under body diffeomorphisms",
          _material_covariance, 1e-6, 1e-6, always_exact=True),
    Check("covariance_identity", "-w (x) dl/dw + dl/dkappa : kappa_hat + dl/dg : g_hat = ell delta",
          _covariance_identity, 1e-8, 1e-8, always_exact=True),
    Check("stress_energy_agreement", "T from the generic assembly, from 2 g.dl/dg and from the eps/p/t_el split",
          _stress_energy_agreement, 1e-8, 1e-8, always_exact=True),
    Check("closed_form_partials", "closed-form Lagrangian partials match automatic differentiation",
          _closed_form_partials, 1e-8, 1e-8, always_exact=True),
    Check("isotropy_identity", "isotropic stored energy: d varpi/dc . c + d varpi/dp . p = 0",
          _isotropy, 1e-8, 1e-8, always_exact=True),
    Check("particle_limit", "a small body cell reproduces the relativistic particle Lagrangian",
          _particle_limit, 1e-5, 1e-5, always_exact=True),
    Check("eulerian_el_residual", "reduced Euler-Lagrange equations on spacetime: div T = 0",
          lambda scene: _el(scene).generic, 1e-8, 1e-4),
    Check("el_metric_route_agreement", "div of the generic and of the metric-route stress-energy agree",
          lambda scene: _el(scene).agreement, 1e-8, 1e-4),
    Check("euler_equations", "relativistic Euler and energy equations", _euler, 1e-8, 1e-4),
    Check("euler_cauchy_equations", "relativistic Euler-Cauchy and energy equations", _euler, 1e-8, 1e-4),
    Check("euler_split", "split balance laws and div T vanish together", _euler_split, 1e-8, 1e-4),
    Check("euler_projection", "the momentum balance is orthogonal to u", _euler_projection, 1e-8, 1e-4),
    Check("continuity_mass", "L_w rho_bar = 0, equivalently L_u (rho mu) = 0",
          _continuity("mass"), 1e-8, 1e-5),
    Check("continuity_entropy", "L_w s_bar = 0, equivalently L_u (s mu) = 0",
          _continuity("entropy"), 1e-8, 1e-5),
    Check("continuity_cauchy", "L_w c = 0 for the Cauchy deformation tensor",
          _continuity("cauchy"), 1e-8, 1e-5),
    Check("convective_el_residual", "convective Euler-Lagrange equations on the reference block",
          _convective_el, 1e-8, 1e-4),
    Check("el_representation_agreement", "pulled-back Eulerian and convective Euler-Lagrange residuals agree in norm",
          _el_representation_agreement, 1e-7, 1e-3),
    Check("moving_domain_formula", "d/d eps int over Phi_eps(D) = int delta ell + boundary flux of i_V ell",
          _moving_domain, 1e-4, 1e-4, exact_only=True),
    Check("extrinsic_curvature_agreement", "K(u, v) = g(u, nabla_v n) = -g(nabla_u v, n) and K is symmetric",
          _extrinsic, 1e-8, 1e-5),
    Check("gauss_codazzi", "Gauss and Codazzi equations for G(n, n) and G(T, n)", _gauss_codazzi, 1e-5, 1e-3),
    Check("supporting_variations", "variations of T, n, h, mu(h), K and k under a hypersurface displacement",
          _supporting, 1e-4, 1e-4, exact_only=True),
    Check("ghy_metric_variation", "first variation of the GHY term with respect to the metric",
          _ghy_metric, 1e-4, 1e-4, exact_only=True),
    Check("ghy_surface_variation", "first variation of the GHY term with respect to the hypersurface",
          _ghy_surface, 1e-6, 1e-6, exact_only=True),
    Check("ghy_sphere_integral", "int k mu(h) = 8 pi r on a round sphere", _ghy_sphere, 1e-6, 1e-6),
    Check("induced_scalar_curvature", "intrinsic scalar curvature of a round sphere is 2 / r^2",
          _induced_scalar, 1e-7, 1e-4),
    Check("quadrature_convergence", "doubling the nodes reduces the sphere integral error at least tenfold",
          _quadrature_convergence, 0.1, 0.1),
    Check("frw_slice_curvature", "k = 3 a' / (a c) on FRW time slices", _frw_slice, 1e-8, 1e-5),
    Check("friedmann_equations", "closed-form FRW scale factor solves both Friedmann equations",
          _friedmann, 1e-8, 1e-8, always_exact=True),
    Check("tov_balance", "closed-form star pressure satisfies the TOV equation", _tov, 1e-6, 1e-6,
          always_exact=True),
    Check("einstein_interior_residual", "G(g-) mu(g-) = 2 chi dl/dg- on the matter region",
          _matched_result("einstein_interior_residual"), 1e-4, 1e-4),
    Check("einstein_exterior_residual", "G(g+) = 0 on the vacuum region", _einstein_exterior, 1e-6, 1e-5),
    Check("junction_metric", "[h] = 0: both metrics induce the same metric on the interface",
          _matched_result("junction_metric"), 1e-5, 1e-5),
    Check("junction_curvature", "[K] = 0 across the interface with a common orientation",
          _matched_result("junction_curvature"), 1e-5, 1e-5),
    Check("obrien_synge", "[G(n, n)] = [G(T, n)] = 0 across the interface",
          _matched_result("obrien_synge"), 1e-5, 1e-4),
    Check("boundary_traction", "vacuum boundary condition t_el(., n) = p n on the interface",
          _matched_result("boundary_traction"), 1e-6, 1e-5),
    Check("junction_implies_traction", "[h] = [K] = 0 forces p = 0 on the interface",
          _matched_result("junction_implies_traction"), 1e-6, 1e-5),
    Check("action_node_stability", "total action converges under quadrature refinement",
          _action_stability, 1e-5, 1e-5),
)}


def get_check(name: str) -> Check:
    check = CHECKS.get(name)
    if check is None:
        raise UnknownCheckError(f"unknown check {name!r}; known checks: {', '.join(sorted(CHECKS))}")
    return check


def check_tolerance(check: Check, exact: bool, overrides: Optional[Dict[str, float]] = None) -> float:
    if overrides and check.name in overrides:
        return overrides[check.name]
    return check.tolerance(exact)
