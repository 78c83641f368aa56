"""
Gravity Coupling for relcont
============================

A matter region N- with metric g- glued along its boundary to a vacuum
region N+ with metric g+. Provides the interior Einstein residual
G(g-) mu(g-) - 2 chi dl/dg-, the exterior Einstein tensor, the total action
(matter + two Einstein-Hilbert terms + two GHY terms) and a bundled report.

Usage:
    from relcont.gravity import MatchedSpacetime, matched_report

    matched = star_spacetime(star)
    report = matched_report(matched)
"""

from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from relcont.config import get_settings
from relcont.dynamics import (
    MatterModel,
    PerfectFluidModel,
    ResidualField,
    boundary_traction_residual,
    eulerian_el_residual,
    sample_residual,
)
from relcont.errors import ContractViolation
from relcont.geometry import MetricField, curvature
from relcont.hypersurface import Hypersurface, Nodes, coordinate_surface, ghy_integral, junction_check
from relcont.log import log
from relcont.models import CheckRecord, Constants, DerivativeMode, Environment, Report
from relcont.numerics import evaluate_points, gauss_legendre, sample_grid
from relcont.solutions import ConstantDensityStar

Bounds = Sequence[Tuple[float, float]]


# ============================================================
# Matched spacetime
# ============================================================

class BoundaryPiece(NamedTuple):
    """One smooth piece of dN-: the surface (outward from N-) and the metric on the other side."""
    surface: Hypersurface
    across: MetricField
    interface: bool  # True where N+ is the vacuum region (the junction surface)


class MatchedSpacetime:
    """Interior matter region glued to an exterior vacuum region."""

    def __init__(self, interior: MetricField, interior_region: Bounds, constants: Constants,
                 model: Optional[MatterModel] = None, exterior: Optional[MetricField] = None,
                 exterior_region: Optional[Bounds] = None, boundary: Sequence[BoundaryPiece] = (),
                 nodes: Optional[Nodes] = None, per_axis: Optional[int] = None, name: str = "matched"):
        if model is not None and model.metric is not interior:
            raise ContractViolation(f"{name}: the matter model lives on {model.metric.name!r}, not {interior.name!r}")
        if (exterior is None) != (exterior_region is None):
            raise ContractViolation(f"{name}: exterior metric and exterior region go together")
        self.interior = interior
        self.interior_region = [tuple(map(float, b)) for b in interior_region]
        self.constants = constants
        self.model = model
        self.exterior = exterior
        self.exterior_region = None if exterior_region is None else [tuple(map(float, b)) for b in exterior_region]
        self.boundary = list(boundary)
        self.nodes = nodes or get_settings().quadrature_nodes
        self.per_axis = per_axis
        self.name = name

    @property
    def interface(self) -> Optional[Hypersurface]:
        for piece in self.boundary:
            if piece.interface:
                return piece.surface
        return None

    def interior_points(self, per_axis: Optional[int] = None, margin: float = 0.05) -> np.ndarray:
        return sample_grid(self.interior_region, per_axis or self._per_axis(self.interior), margin)

    def exterior_points(self, per_axis: Optional[int] = None, margin: float = 0.05) -> np.ndarray:
        if self.exterior_region is None:
            raise ContractViolation(f"{self.name}: no exterior region")
        return sample_grid(self.exterior_region, per_axis or self._per_axis(self.exterior), margin)

    def _per_axis(self, metric: MetricField) -> int:
        if self.per_axis is not None:
            return self.per_axis
        settings = get_settings()
        return settings.grid if metric.differentiable else settings.fd_grid


def star_spacetime(star: ConstantDensityStar, nodes: int = 8, black_box: bool = False,
                   per_axis: Optional[int] = None) -> MatchedSpacetime:
    """Constant-density star matched to Schwarzschild at r = R' (R' = R unless truncated)."""
    interior = star.interior_metric.black_box() if black_box else star.interior_metric
    exterior = star.exterior_metric.black_box() if black_box else star.exterior_metric
    model = PerfectFluidModel(interior, star.velocity, star.energy, star.pressure,
                              star.constants.c, name="star_fluid")
    t0, t1 = star.time_range
    angles = star.interior_region[2:]
    surface_nodes = (2, nodes, nodes)
    lateral = coordinate_surface(interior, 1, star.surface_radius, [(t0, t1)] + list(angles), orientation=1,
                                 nodes=surface_nodes, name="star_surface")
    caps = [
        coordinate_surface(interior, 0, t, [(0.0, star.surface_radius)] + list(angles), orientation=side,
                           nodes=(nodes, nodes, 2), name=f"cap t={t:g}")
        for t, side in ((t0, -1), (t1, 1))
    ]
    # before and after the tube the star continues, so the caps see the interior metric on both sides
    boundary = [BoundaryPiece(lateral, exterior, True)] + [BoundaryPiece(cap, interior, False) for cap in caps]
    return MatchedSpacetime(interior, star.interior_region, star.constants, model, exterior,
                            star.exterior_region, boundary, nodes=(2, nodes, nodes, 2), per_axis=per_axis,
                            name="constant_density_star")


# ============================================================
# Einstein residuals
# ============================================================

def einstein_interior_residual(matched: MatchedSpacetime, points=None) -> ResidualField:
    """G(g-)^{ab} mu(g-) - 2 chi dl/dg-_{ab} (contravariant density components)."""
    metric = matched.interior
    model = matched.model
    chi = matched.constants.chi
    points = matched.interior_points() if points is None else points
    exact = metric.differentiable and (model is None or model.exact)

    def residual(x):
        einstein = curvature(metric, x).einstein * metric.volume_density(x)
        if model is None:
            return einstein
        return einstein - 2.0 * chi * model.metric_derivative(x)

    return sample_residual("einstein_interior", residual, points, exact)


def vacuum_residual(metric: MetricField, points, name: str = "einstein_vacuum") -> ResidualField:
    """Einstein tensor G^{ab} of a metric that should solve the vacuum equations."""
    return sample_residual(name, lambda x: curvature(metric, x).einstein, points, metric.differentiable)


def einstein_exterior_residual(matched: MatchedSpacetime, points=None) -> ResidualField:
    if matched.exterior is None:
        raise ContractViolation(f"{matched.name}: no exterior metric")
    points = matched.exterior_points() if points is None else points
    return vacuum_residual(matched.exterior, points, name="einstein_exterior")


# ============================================================
# Total action
# ============================================================

class ActionBreakdown(NamedTuple):
    matter: float
    hilbert_interior: float
    hilbert_exterior: float
    ghy_interior: float
    ghy_exterior: float

    @property
    def total(self) -> float:
        return self.matter + self.hilbert_interior + self.hilbert_exterior + self.ghy_interior + self.ghy_exterior


def _degenerate(bounds: Bounds) -> bool:
    return any(not hi > lo for lo, hi in bounds)


def _region_integral(fn, bounds: Bounds, nodes: Nodes, exact: bool) -> float:
    if _degenerate(bounds):
        return 0.0
    rule = gauss_legendre(bounds, nodes)
    return rule.integrate(evaluate_points(fn, rule.points, exact))


def _hilbert(metric: MetricField, bounds: Bounds, nodes: Nodes, chi: float) -> float:
    """(1/2 chi) int R mu(g)."""
    density = lambda x: curvature(metric, x).scalar * metric.volume_density(x)
    return _region_integral(density, bounds, nodes, metric.differentiable) / (2.0 * chi)


def _flipped(surface: Hypersurface, metric: MetricField) -> Hypersurface:
    return Hypersurface(surface.embedding, surface.chart, metric, -surface.normal_side, surface.nodes,
                        surface.closed, name=f"{surface.name}+")


def total_action(matched: MatchedSpacetime, nodes: Optional[Nodes] = None) -> ActionBreakdown:
    """Matter + EH(N-) + EH(N+) + GHY(dN-, g-) + GHY(dN+, g+).

    The exterior GHY term uses the opposite orientation of each boundary piece.
    """
    nodes = nodes or matched.nodes
    chi = matched.constants.chi
    degenerate = _degenerate(matched.interior_region)

    matter = 0.0
    if matched.model is not None and not degenerate:
        matter = _region_integral(matched.model.action_density, matched.interior_region, nodes, matched.model.exact)
    hilbert_interior = 0.0 if degenerate else _hilbert(matched.interior, matched.interior_region, nodes, chi)
    hilbert_exterior = 0.0
    if matched.exterior is not None:
        hilbert_exterior = _hilbert(matched.exterior, matched.exterior_region, nodes, chi)

    ghy_interior = ghy_exterior = 0.0
    for piece in matched.boundary:
        ghy_interior += ghy_integral(piece.surface, matched.constants)
        ghy_exterior += ghy_integral(_flipped(piece.surface, piece.across), matched.constants)

    breakdown = ActionBreakdown(matter, hilbert_interior, hilbert_exterior, ghy_interior, ghy_exterior)
    log("Action", f"{matched.name}: total {breakdown.total:.10g}")
    return breakdown


# ============================================================
# Bundled report
# ============================================================

class MatchedResult(NamedTuple):
    name: str
    anchor: str
    max_residual: float
    l2_residual: float
    tolerance: float
    mode: DerivativeMode
    detail: Optional[str] = None


def _record(result: MatchedResult) -> CheckRecord:
    return CheckRecord(name=result.name, anchor=result.anchor, max_residual=result.max_residual,
                       l2_residual=result.l2_residual, tolerance=result.tolerance, mode=result.mode,
                       passed=result.max_residual < result.tolerance, detail=result.detail)


def matched_results(matched: MatchedSpacetime, tolerances: Optional[dict] = None) -> List[MatchedResult]:
    """Interior EL, Einstein residuals, junction jumps and boundary traction of a matched spacetime."""
    settings = get_settings()
    tol = dict(tolerances or {})
    mode = DerivativeMode.EXACT if matched.interior.differentiable else DerivativeMode.FD
    base = settings.exact_tolerance if mode == DerivativeMode.EXACT else settings.fd_tolerance
    out: List[MatchedResult] = []

    def add(name: str, anchor: str, residual: float, l2: float, default: float, detail: Optional[str] = None):
        out.append(MatchedResult(name, anchor, residual, l2, tol.get(name, default), mode, detail))

    if matched.model is not None:
        el = eulerian_el_residual(matched.model, matched.interior_points())
        add("eulerian_el_residual", "reduced Euler-Lagrange equations on spacetime (div T = 0)",
            el.generic.max_residual, el.generic.l2_residual, 1e-4)
    interior = einstein_interior_residual(matched)
    add("einstein_interior_residual", "G(g-) mu(g-) = 2 chi dl/dg- on N-",
        interior.max_residual, interior.l2_residual, 1e-4)

    if matched.exterior is None or matched.interface is None:
        log("Gravity", f"{matched.name}: no interface, junction checks skipped")
        return out

    exterior = einstein_exterior_residual(matched)
    add("einstein_exterior_residual", "G(g+) = 0 on N+", exterior.max_residual, exterior.l2_residual, 1e-6)

    jumps = junction_check(matched.interface, matched.interior, matched.exterior)
    add("junction_metric", "[h] = 0: both metrics induce the same metric on dN", jumps.h, jumps.h, 1e-5)
    add("junction_curvature", "[K] = 0 across dN with a common orientation", jumps.K, jumps.K, 1e-5)
    add("obrien_synge", "[G(n, n)] = [G(T, n)] = 0 when [h] = [K] = 0",
        max(jumps.einstein_normal, jumps.einstein_tangential),
        max(jumps.einstein_normal, jumps.einstein_tangential), 1e-5)

    if matched.model is not None:
        traction = boundary_traction_residual(matched.model, matched.interface)
        add("boundary_traction", "vacuum boundary condition p = 0 on dN",
            traction.max_residual, traction.l2_residual, max(base, 1e-6))
        matched_ok = jumps.h < tol.get("junction_metric", 1e-5) and jumps.K < tol.get("junction_curvature", 1e-5)
        # [h] = [K] = 0 must force p = 0 on the boundary; a violation shows up as the traction
        implication = traction.max_residual if matched_ok else 0.0
        premise = None if matched_ok else (
            f"premise failed: [h] = {jumps.h:.3e}, [K] = {jumps.K:.3e}; implication not tested")
        add("junction_implies_traction", "[h] = [K] = 0 implies p = 0 on dN", implication, implication, 1e-6,
            premise)
    return out


def matched_report(matched: MatchedSpacetime, tolerances: Optional[dict] = None, seed: int = 0) -> Report:
    settings = get_settings()
    records = sorted((_record(result) for result in matched_results(matched, tolerances)), key=lambda r: r.name)
    environment = Environment(seed=seed, grid=settings.grid, fd_grid=settings.fd_grid,
                              nodes=int(np.max(np.atleast_1d(matched.nodes))), constants=matched.constants)
    return Report(scene=matched.name, environment=environment, checks=records)
