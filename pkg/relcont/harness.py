"""
Verification Harness for relcont
================================

Runs the checks of a scene (in parallel, each check once) and collects the
results into a ``Report``. A check that raises is recorded as a failure with
infinite residual; the suite keeps going.

Usage:
    from relcont.harness import run_suite
    from relcont.scenes import build_scene

    report = run_suite(build_scene(SceneConfig(name="minkowski_dust")), pattern="junction_*")
    print(report.passed)
"""

import fnmatch
import math
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import List, Optional, Sequence

from relcont.checks import CHECKS, Check, check_tolerance, get_check
from relcont.config import get_settings
from relcont.dynamics import ResidualField
from relcont.gravity import MatchedResult
from relcont.log import fail, log, ok, warn
from relcont.models import CheckRecord, DerivativeMode, Environment, Report
from relcont.numerics import residual_norms
from relcont.scenes import Scene


# ============================================================
# Selection
# ============================================================

def select_checks(scene: Scene, pattern: Optional[str] = None, names: Optional[Sequence[str]] = None) -> List[Check]:
    """Checks of the scene (or ``names``), filtered by a glob and by the derivative mode."""
    requested = list(names) if names is not None else scene.checks
    checks = {name: get_check(name) for name in requested}
    selected = []
    for name, check in sorted(checks.items()):
        if pattern and not fnmatch.fnmatchcase(name, pattern):
            continue
        if check.exact_only and not scene.exact:
            warn("Harness", f"skipping {name}: needs exact derivatives")
            continue
        selected.append(check)
    return selected


# ============================================================
# Execution
# ============================================================

def _mode(scene: Scene, check: Check, outcome) -> DerivativeMode:
    if isinstance(outcome, ResidualField):
        return outcome.mode
    if check.always_exact:
        return DerivativeMode.EXACT
    return scene.mode


def run_check(scene: Scene, check: Check) -> CheckRecord:
    """Run one check; exceptions become a failing record with the error text."""
    exact_mode = scene.exact or check.always_exact
    tolerance = check_tolerance(check, exact_mode, scene.tolerances)
    try:
        outcome = check.run(scene)
    except Exception as exc:
        fail("Check", f"{check.name}: {type(exc).__name__}: {exc}")
        return CheckRecord(name=check.name, anchor=check.anchor, max_residual=math.inf, l2_residual=math.inf,
                           tolerance=tolerance, mode=_mode(scene, check, None), passed=False,
                           detail=f"{type(exc).__name__}: {exc}")

    mode = _mode(scene, check, outcome)
    if isinstance(outcome, ResidualField):
        tolerance = check_tolerance(check, mode == DerivativeMode.EXACT, scene.tolerances)
        max_residual, l2_residual = outcome.max_residual, outcome.l2_residual
    elif isinstance(outcome, MatchedResult):
        max_residual, l2_residual = outcome.max_residual, outcome.l2_residual
    elif isinstance(outcome, tuple):
        max_residual, l2_residual = float(outcome[0]), float(outcome[1])
    else:
        max_residual, l2_residual = residual_norms(outcome)

    passed = bool(max_residual < tolerance)
    if passed:
        ok("Check", f"{check.name}: {max_residual:.3e} < {tolerance:g}")
    else:
        fail("Check", f"{check.name}: {max_residual:.3e} >= {tolerance:g}")
    return CheckRecord(name=check.name, anchor=check.anchor, max_residual=max_residual, l2_residual=l2_residual,
                       tolerance=tolerance, mode=mode, passed=passed, detail=getattr(outcome, "detail", None))


def run_suite(scene: Scene, checks: Optional[Sequence[str]] = None, pattern: Optional[str] = None) -> Report:
    """Run the selected checks of ``scene`` on a thread pool and assemble the report."""
    selected = select_checks(scene, pattern, checks)
    log("Harness", f"{scene.name}: running {len(selected)} of {len(CHECKS)} known checks ({scene.mode.value})")

    if selected:
        workers = max(1, min(get_settings().threads, len(selected)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda check: run_check(scene, check), selected))
    else:
        records = []

    environment = Environment(seed=scene.seed, grid=scene.grid, fd_grid=scene.fd_grid, nodes=scene.nodes,
                              constants=scene.constants)
    report = Report(scene=scene.name, environment=environment, checks=sorted(records, key=lambda r: r.name),
                    timestamp=datetime.now(timezone.utc).isoformat())
    failures = len(report.failures())
    log("Harness", f"{scene.name}: {len(records) - failures} passed, {failures} failed")
    return report
