"""
Scene Registry for relcont
==========================

Named verification scenes: a spacetime metric, optionally a world-tube with
reference fields and a continuum Lagrangian, a hypersurface with a variation,
and the closed-form solution the checks compare against. Scene parameters
(including the negative controls) are overridable from scene files and
``--set key=value``.

Every scene accepts ``derivative_mode=fd``, which rebuilds the metric and the
matter fields as numpy black boxes so all derivatives go through finite
differences.

Usage:
    from relcont.models import SceneConfig
    from relcont.scenes import build_scene, list_scenes

    scene = build_scene(SceneConfig(name="constant_density_star", parameters={"exterior_mass_scale": 1.1}))
    print(scene.checks)
"""

import math
import threading
from typing import Any, Callable, Dict, List, NamedTuple, Optional

import jax
import jax.numpy as jnp
import numpy as np

from relcont.config import get_settings
from relcont.dynamics import ContinuumFields, ContinuumModel, MatterModel
from relcont.errors import ConfigError, UnknownSceneError
from relcont.geometry import Chart, MetricField, TensorField
from relcont.gravity import MatchedSpacetime, star_spacetime
from relcont.hypersurface import (
    Hypersurface,
    SurfaceVariation,
    constant_normal_variation,
    hyperplane,
    radial_tube,
    random_graph_surface,
    random_surface_variation,
    sphere,
    time_slice,
)
from relcont.lagrangians import EOS_FAMILIES, STORED_ENERGY_FAMILIES, ContinuumLagrangian
from relcont.log import log
from relcont.models import Constants, DerivativeMode, SceneConfig, ScalarValue
from relcont.numerics import sample_grid
from relcont.oracles import random_metric
from relcont.solutions import ConstantDensityStar, FRWSolution, euclidean, minkowski, schwarzschild
from relcont.worldtube import ReferenceFields, WorldTube, make_tube, uniform_reference


# ============================================================
# Check groups
# ============================================================

GEOMETRY_CHECKS = ["bianchi_identity", "connection_compatibility", "lie_contraction_identity", "lie_flow_oracle"]

CONTINUUM_CHECKS = [
    "reference_advection", "lateral_velocity_tangency", "spacetime_covariance", "material_covariance",
    "covariance_identity", "stress_energy_agreement", "closed_form_partials", "eulerian_el_residual",
    "el_metric_route_agreement", "continuity_mass", "continuity_entropy", "convective_el_residual",
    "moving_domain_formula",
]

FLUID_CHECKS = ["euler_equations", "euler_split", "euler_projection"]

ELASTIC_CHECKS = ["deformation_routes", "isotropy_identity", "continuity_cauchy", "euler_cauchy_equations",
                  "euler_split", "euler_projection"]

SURFACE_CHECKS = ["extrinsic_curvature_agreement", "gauss_codazzi", "supporting_variations",
                  "ghy_metric_variation", "ghy_surface_variation"]

MATCHED_CHECKS = ["einstein_interior_residual", "einstein_exterior_residual", "junction_metric",
                  "junction_curvature", "obrien_synge", "boundary_traction", "junction_implies_traction",
                  "action_node_stability"]


# ============================================================
# Scene
# ============================================================

class Scene:
    """Everything a check needs, built once per run and shared read-only between checks."""

    def __init__(self, config: SceneConfig, description: str, parameters: Dict[str, ScalarValue],
                 checks: List[str], nodes: int):
        settings = get_settings()
        self.config = config
        self.name = config.name
        self.description = description
        self.parameters = parameters
        self.constants: Constants = config.constants
        self.seed = config.seed
        self.grid = config.grid or settings.grid
        self.fd_grid = config.fd_grid or settings.fd_grid
        self.nodes = config.nodes or nodes
        self.checks = list(config.checks) if config.checks is not None else list(checks)
        self.tolerances = dict(config.tolerances)

        # filled in by the builders
        self.state_metric: Optional[MetricField] = None  # differentiable, for pointwise algebra
        self.metric: Optional[MetricField] = None        # black box in fd mode
        self.region = None
        self.lagrangian: Optional[ContinuumLagrangian] = None
        self.tube: Optional[WorldTube] = None
        self.refs: Optional[ReferenceFields] = None
        self.fields: Optional[ContinuumFields] = None
        self.model: Optional[MatterModel] = None
        self.matched: Optional[MatchedSpacetime] = None
        self.surface: Optional[Hypersurface] = None
        self.variation: Optional[SurfaceVariation] = None        # integrated (GHY) variations
        self.local_variation: Optional[SurfaceVariation] = None  # pointwise supporting variations
        self.frw: Optional[FRWSolution] = None
        self.star: Optional[ConstantDensityStar] = None
        self.expected_ghy_rate: Optional[float] = None  # d/d eps int k mu(h) known in closed form

        self._memo: Dict[str, Any] = {}
        self._locks: Dict[str, threading.Lock] = {}
        self._lock = threading.Lock()

    @property
    def exact(self) -> bool:
        return self.parameters.get("derivative_mode", "exact") == "exact"

    @property
    def mode(self) -> DerivativeMode:
        return DerivativeMode.EXACT if self.exact else DerivativeMode.FD

    def seen(self, field):
        """The field as the checks see it: unchanged in exact mode, a numpy black box in fd mode."""
        if field is None or self.exact:
            return field
        return field.black_box()

    def memo(self, key: str, build: Callable[[], Any]) -> Any:
        """Compute ``build()`` once per scene, even when checks ask for it concurrently."""
        with self._lock:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            if key not in self._memo:
                self._memo[key] = build()
            return self._memo[key]

    # ------------------------------------------------------------
    # Sample points
    # ------------------------------------------------------------

    def points(self, per_axis: Optional[int] = None) -> np.ndarray:
        """Spacetime sample points: images of a body grid, or a grid over the scene region."""
        per_axis = per_axis or (self.grid if self.exact else self.fd_grid)
        if self.tube is not None:
            body = sample_grid(self.tube.domain_chart.bounds, per_axis)
            return np.asarray(jax.vmap(self.tube.map)(jnp.asarray(body)))
        return sample_grid(self.region, per_axis)

    def coarse_points(self) -> np.ndarray:
        """Small sample set for checks that loop in Python."""
        return self.points(min(3, self.grid if self.exact else self.fd_grid))

    def body_points(self, per_axis: int = 3) -> np.ndarray:
        return sample_grid(self.tube.domain_chart.bounds, per_axis)

    def __repr__(self) -> str:
        return f"Scene({self.name!r}, mode={self.mode.value}, checks={len(self.checks)})"


# ============================================================
# Shared pieces
# ============================================================

BODY = Chart(name="body", bounds=((0.0, 1.0),) * 4)
FLAT = Chart(name="minkowski", bounds=((-1.0, 3.0),) * 4)


def _continuum(scene: Scene, lagrangian: ContinuumLagrangian, tube: WorldTube, refs: ReferenceFields,
               metric: MetricField) -> None:
    scene.lagrangian = lagrangian
    scene.tube = tube
    scene.refs = refs
    scene.state_metric = metric
    scene.metric = scene.seen(metric)
    fields = ContinuumFields.from_tube(lagrangian, tube, refs, metric, name=scene.name)
    scene.fields = fields if scene.exact else fields.black_box()
    scene.model = ContinuumModel(scene.fields)


def _surface(scene: Scene, surface: Hypersurface, variation: Optional[SurfaceVariation] = None) -> None:
    scene.surface = surface.with_metric(scene.metric) if not scene.exact else surface
    local = random_surface_variation(surface.chart, seed=scene.seed, amplitude=0.3)
    scene.variation = variation or local
    scene.local_variation = local


def _dust_refs(scene: Scene) -> ReferenceFields:
    """Uniform dust, or R = rho (1 + drift X^0) for the continuity negative control."""
    rho = float(scene.parameters["rho"])
    drift = float(scene.parameters.get("rho_drift", 0.0))
    mass = TensorField(lambda X: rho * (1.0 + drift * X[0]), BODY, 0, 0, 1, name="R")
    return ReferenceFields(BODY, mass)


# ============================================================
# Builders
# ============================================================

def _build_minkowski_dust(scene: Scene) -> None:
    metric = minkowski(FLAT, scene.constants.c)
    tube = make_tube("static", BODY, FLAT, rate=1.0)
    _continuum(scene, ContinuumLagrangian(light_speed=scene.constants.c), tube, _dust_refs(scene), metric)
    _surface(scene, hyperplane(metric, axis=1, value=1.0, nodes=scene.nodes))


def _build_boosted_dust(scene: Scene) -> None:
    metric = minkowski(FLAT, scene.constants.c)
    tube = make_tube("boost", BODY, FLAT, velocity=float(scene.parameters["velocity"]))
    _continuum(scene, ContinuumLagrangian(light_speed=scene.constants.c), tube, _dust_refs(scene), metric)
    _surface(scene, hyperplane(metric, axis=1, value=1.0, nodes=scene.nodes))


def _build_frw(scene: Scene, coefficient: float) -> None:
    p = scene.parameters
    frw = FRWSolution(scene.constants, rest_density=float(p["rho"]), coefficient=coefficient,
                      density_drift=float(p["density_drift"]))
    scene.frw = frw
    chart = frw.chart
    tube = make_tube("frw_comoving", chart, chart)
    mass = TensorField(frw.coordinate_density, chart, 0, 0, 1, name="R")
    refs = ReferenceFields(chart, mass)
    eos = EOS_FAMILIES["linear"](coefficient=coefficient) if coefficient else None
    _continuum(scene, ContinuumLagrangian(eos=eos, light_speed=scene.constants.c), tube, refs, frw.metric)
    _surface(scene, time_slice(frw.metric, frw.time_mid, nodes=scene.nodes))
    scene.region = chart.bounds
    scene.matched = MatchedSpacetime(scene.model.metric, chart.bounds, scene.constants, model=scene.model,
                                     nodes=scene.nodes, per_axis=scene.grid if scene.exact else scene.fd_grid,
                                     name=scene.name)


def _build_frw_dust(scene: Scene) -> None:
    _build_frw(scene, 0.0)


def _build_frw_perfect_fluid(scene: Scene) -> None:
    _build_frw(scene, float(scene.parameters["coefficient"]))


def _build_schwarzschild_exterior(scene: Scene) -> None:
    p = scene.parameters
    chart = Chart(name="schwarzschild", bounds=((0.0, 1.0), (3.0, 8.0), (0.2 * math.pi, 0.8 * math.pi),
                                                (0.0, 2.0 * math.pi)))
    metric = schwarzschild(chart, scene.constants, float(p["mass"]), float(p["mass_gradient"]))
    scene.state_metric = metric
    scene.metric = scene.seen(metric)
    scene.region = chart.bounds
    surface = radial_tube(metric, float(p["radius"]), (0.2, 0.8), (0.3 * math.pi, 0.7 * math.pi),
                          (0.0, math.pi), nodes=scene.nodes)
    _surface(scene, surface)


def _build_constant_density_star(scene: Scene) -> None:
    p = scene.parameters
    star = ConstantDensityStar(scene.constants, mass=float(p["mass"]), radius=float(p["radius"]),
                               exterior_mass_scale=float(p["exterior_mass_scale"]),
                               boundary_radius_fraction=float(p["boundary_radius_fraction"]))
    scene.star = star
    matched = star_spacetime(star, nodes=scene.nodes, black_box=not scene.exact,
                             per_axis=scene.grid if scene.exact else scene.fd_grid)
    scene.matched = matched
    scene.state_metric = star.interior_metric
    scene.metric = matched.interior
    scene.model = matched.model
    scene.region = star.interior_region
    scene.surface = matched.interface
    scene.local_variation = scene.variation = random_surface_variation(matched.interface.chart, seed=scene.seed)


def _build_elastic_block(scene: Scene, stretch: float) -> None:
    p = scene.parameters
    family = str(p["stored_energy"])
    if family not in STORED_ENERGY_FAMILIES:
        raise ConfigError(f"stored_energy must be one of {sorted(STORED_ENERGY_FAMILIES)}, got {family!r}")
    if family == "saint_venant_kirchhoff":
        stored = STORED_ENERGY_FAMILIES[family](shear=float(p["shear"]), lame=float(p["lame"]))
    elif family == "fiber":
        stored = STORED_ENERGY_FAMILIES[family](stiffness=float(p["shear"]))
    else:
        stored = STORED_ENERGY_FAMILIES[family]()
    metric = minkowski(FLAT, scene.constants.c)
    if stretch == 1.0:
        tube = make_tube("static", BODY, FLAT, rate=1.0)
    else:
        tube = make_tube("stretch", BODY, FLAT, stretch=stretch)
    refs = uniform_reference(BODY, float(p["rho"]), 0.0, body_metric=np.eye(3))
    _continuum(scene, ContinuumLagrangian(stored=stored, light_speed=scene.constants.c), tube, refs, metric)
    _surface(scene, hyperplane(metric, axis=1, value=0.5, nodes=scene.nodes))


def _build_elastic_block_static(scene: Scene) -> None:
    _build_elastic_block(scene, 1.0)


def _build_elastic_block_stretched(scene: Scene) -> None:
    _build_elastic_block(scene, float(scene.parameters["stretch"]))


def _build_euclidean_sphere(scene: Scene) -> None:
    chart = Chart(name="euclidean", bounds=((-3.0, 3.0),) * 3)
    metric = euclidean(chart)
    scene.state_metric = metric
    scene.metric = scene.seen(metric)
    scene.region = chart.bounds
    surface = sphere(metric, radius=float(scene.parameters["radius"]), nodes=scene.nodes)
    _surface(scene, surface, variation=constant_normal_variation(1.0, 2))
    scene.expected_ghy_rate = 8.0 * math.pi


def _build_random_smooth(scene: Scene) -> None:
    p = scene.parameters
    chart = Chart(name="random", bounds=((-0.5, 1.5),) * 4)
    metric = random_metric(chart, seed=scene.seed, amplitude=float(p["metric_amplitude"]))
    tube = make_tube("random", BODY, chart, seed=scene.seed, amplitude=float(p["tube_amplitude"]))
    family = str(p["eos"])
    if family not in EOS_FAMILIES:
        raise ConfigError(f"eos must be one of {sorted(EOS_FAMILIES)}, got {family!r}")
    eos = EOS_FAMILIES[family]() if family == "dust" else EOS_FAMILIES[family](coefficient=float(p["coefficient"]))
    refs = uniform_reference(BODY, float(p["rho"]), float(p["entropy"]))
    _continuum(scene, ContinuumLagrangian(eos=eos, light_speed=scene.constants.c), tube, refs, metric)
    _surface(scene, random_graph_surface(metric, seed=scene.seed, axis=1, nodes=scene.nodes))


# ============================================================
# Registry
# ============================================================

class SceneSpec(NamedTuple):
    name: str
    description: str
    defaults: Dict[str, ScalarValue]
    checks: List[str]
    build: Callable[[Scene], None]
    nodes: int = 6


_DUST = {"rho": 1.0, "rho_drift": 0.0}
_ELASTIC = {"rho": 1.0, "stored_energy": "saint_venant_kirchhoff", "shear": 1.0, "lame": 0.5}

SCENES: Dict[str, SceneSpec] = {spec.name: spec for spec in (
    SceneSpec("minkowski_dust", "Dust at rest in Minkowski space (e = 0)", dict(_DUST),
              GEOMETRY_CHECKS + CONTINUUM_CHECKS + FLUID_CHECKS + SURFACE_CHECKS + ["particle_limit"],
              _build_minkowski_dust),
    SceneSpec("boosted_dust", "Dust moving with uniform 3-velocity v along x", dict(_DUST, velocity=0.6),
              GEOMETRY_CHECKS + CONTINUUM_CHECKS + FLUID_CHECKS + SURFACE_CHECKS + ["particle_limit"],
              _build_boosted_dust),
    SceneSpec("frw_dust", "Flat FRW universe filled with dust, comoving coordinates",
              {"rho": 1.0, "density_drift": 0.0},
              GEOMETRY_CHECKS + CONTINUUM_CHECKS + FLUID_CHECKS + SURFACE_CHECKS
              + ["frw_slice_curvature", "friedmann_equations", "einstein_interior_residual", "action_node_stability"],
              _build_frw_dust),
    SceneSpec("frw_perfect_fluid", "Flat FRW universe with e = K rho (p = K rho^2)",
              {"rho": 1.0, "coefficient": 0.1, "density_drift": 0.0},
              GEOMETRY_CHECKS + CONTINUUM_CHECKS + FLUID_CHECKS + SURFACE_CHECKS
              + ["frw_slice_curvature", "friedmann_equations", "einstein_interior_residual", "action_node_stability"],
              _build_frw_perfect_fluid),
    SceneSpec("schwarzschild_exterior", "Static Schwarzschild exterior with a timelike r = const tube",
              {"mass": 0.5, "mass_gradient": 0.0, "radius": 4.0},
              GEOMETRY_CHECKS + SURFACE_CHECKS + ["einstein_exterior_residual"],
              _build_schwarzschild_exterior),
    SceneSpec("constant_density_star", "Constant-density star matched to Schwarzschild at r = R",
              {"mass": 0.2, "radius": 1.0, "exterior_mass_scale": 1.0, "boundary_radius_fraction": 1.0},
              GEOMETRY_CHECKS + ["eulerian_el_residual"] + FLUID_CHECKS
              + ["extrinsic_curvature_agreement", "gauss_codazzi", "tov_balance"] + MATCHED_CHECKS,
              _build_constant_density_star, nodes=8),
    SceneSpec("elastic_block_static", "Unstrained Saint-Venant-Kirchhoff block at rest", dict(_ELASTIC),
              GEOMETRY_CHECKS + CONTINUUM_CHECKS + ELASTIC_CHECKS + ["extrinsic_curvature_agreement"],
              _build_elastic_block_static),
    SceneSpec("elastic_block_stretched", "Homogeneously stretched Saint-Venant-Kirchhoff block",
              dict(_ELASTIC, stretch=1.1),
              GEOMETRY_CHECKS + CONTINUUM_CHECKS + ELASTIC_CHECKS + ["extrinsic_curvature_agreement"],
              _build_elastic_block_stretched),
    SceneSpec("euclidean_sphere", "Round sphere in Euclidean R^3 (Riemannian GHY tests)", {"radius": 1.0},
              GEOMETRY_CHECKS + SURFACE_CHECKS
              + ["ghy_sphere_integral", "induced_scalar_curvature", "quadrature_convergence"],
              _build_euclidean_sphere, nodes=32),
    SceneSpec("random_smooth", "Seeded random metric, world-tube and entropic gas",
              {"metric_amplitude": 0.02, "tube_amplitude": 0.05, "eos": "entropic_gas", "coefficient": 0.1,
               "rho": 1.0, "entropy": 0.5},
              GEOMETRY_CHECKS + ["reference_advection", "lateral_velocity_tangency", "spacetime_covariance",
                                 "material_covariance", "covariance_identity", "stress_energy_agreement",
                                 "closed_form_partials", "continuity_mass", "continuity_entropy",
                                 "el_representation_agreement", "moving_domain_formula"] + SURFACE_CHECKS,
              _build_random_smooth),
)}

_DERIVATIVE_MODES = tuple(mode.value for mode in DerivativeMode)


def list_scenes() -> List[SceneSpec]:
    return [SCENES[name] for name in sorted(SCENES)]


def get_scene_spec(name: str) -> SceneSpec:
    spec = SCENES.get(name)
    if spec is None:
        raise UnknownSceneError(f"unknown scene {name!r}; known scenes: {', '.join(sorted(SCENES))}")
    return spec


def _coerce(key: str, value: ScalarValue, default: ScalarValue) -> ScalarValue:
    """Convert an override to the type of the scene default."""
    try:
        if isinstance(default, bool):
            if isinstance(value, str):
                lowered = value.strip().lower()
                if lowered not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                    raise ValueError(value)
                return lowered in ("1", "true", "yes", "on")
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if isinstance(default, float):
            number = float(value)
            if not math.isfinite(number):
                raise ValueError(value)
            return number
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} expects a {type(default).__name__}, got {value!r}") from None


def resolve_parameters(spec: SceneSpec, overrides: Dict[str, ScalarValue]) -> Dict[str, ScalarValue]:
    """Scene defaults, then ``derivative_mode``, then overrides (unknown keys rejected)."""
    parameters: Dict[str, ScalarValue] = dict(spec.defaults)
    parameters["derivative_mode"] = DerivativeMode.EXACT.value
    for key, value in overrides.items():
        if key not in parameters:
            raise ConfigError(f"scene {spec.name!r} has no parameter {key!r}; known: {', '.join(sorted(parameters))}")
        parameters[key] = _coerce(key, value, parameters[key])
    if parameters["derivative_mode"] not in _DERIVATIVE_MODES:
        raise ConfigError(f"derivative_mode must be one of {_DERIVATIVE_MODES}, got {parameters['derivative_mode']!r}")
    return parameters


def build_scene(config: SceneConfig) -> Scene:
    """Look up the registered scene (``config.base`` or ``config.name``) and build it."""
    spec = get_scene_spec(config.base or config.name)
    parameters = resolve_parameters(spec, config.parameters)
    scene = Scene(config, spec.description, parameters, spec.checks, spec.nodes)
    spec.build(scene)
    log("Scene", f"built {scene.name} ({scene.mode.value}, {len(scene.checks)} checks)")
    return scene
