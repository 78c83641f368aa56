"""
Command Line for relcont
========================

Usage:
    python -m relcont check --scene minkowski_dust
    python -m relcont check --scene constant_density_star --only 'junction*' --format text
    python -m relcont check --scene-file scenes/star.toml --set exterior_mass_scale=1.1 --out report.json
    python -m relcont list-scenes
    python -m relcont list-checks --scene minkowski_dust
    python -m relcont vary-ghy --scene euclidean_sphere
    python -m relcont action --scene constant_density_star

Exit codes: 0 when every selected check passes, 1 when any fails, 2 on a
configuration or usage error. Reports go to stdout (or ``--out``); progress
lines go to stderr.
"""

import argparse
import json
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from relcont.checks import CHECKS, get_check
from relcont.errors import ConfigError, RelcontError
from relcont.gravity import total_action
from relcont.harness import run_suite
from relcont.log import fail, log
from relcont.models import RunConfig, SceneConfig
from relcont.reporting import get_report_writer, write_csv
from relcont.scenes import Scene, build_scene, get_scene_spec, list_scenes

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


# ============================================================
# Argument parsing
# ============================================================

def _pair(text: str) -> tuple:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def _tolerance(text: str) -> tuple:
    key, value = _pair(text)
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance for {key!r} must be a number, got {value!r}") from None


def _add_scene_options(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--scene", help="registered scene name")
    source.add_argument("--scene-file", type=Path, help="TOML or JSON scene file")
    parser.add_argument("--seed", type=int, help="random seed (unsigned 64-bit)")
    parser.add_argument("--grid", type=int, help="sample points per axis")
    parser.add_argument("--set", dest="overrides", type=_pair, action="append", default=[], metavar="KEY=VALUE",
                        help="override a scene parameter (repeatable)")


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--only", help="glob over check names")
    parser.add_argument("--tol", dest="tolerances", type=_tolerance, action="append", default=[],
                        metavar="NAME=FLOAT", help="override a check tolerance (repeatable)")
    parser.add_argument("--out", type=Path, help="write the report here instead of stdout")
    parser.add_argument("--format", default="json", choices=["json", "text"])
    parser.add_argument("--csv", type=Path, help="append per-check residual rows to this CSV file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relcont",
                                     description="Verify relativistic continuum mechanics identities numerically.")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="run the checks of a scene")
    _add_scene_options(check)
    _add_run_options(check)

    vary = commands.add_parser("vary-ghy", help="run the GHY variation comparisons of a scene")
    _add_scene_options(vary)
    _add_run_options(vary)

    action = commands.add_parser("action", help="print the total action of a matched scene")
    _add_scene_options(action)
    action.add_argument("--nodes", type=int, help="Gauss-Legendre nodes per axis")

    commands.add_parser("list-scenes", help="list registered scenes")

    listing = commands.add_parser("list-checks", help="list checks (of one scene, or all)")
    listing.add_argument("--scene", help="registered scene name")
    return parser


# ============================================================
# Configuration
# ============================================================

def load_scene_file(path: Path) -> SceneConfig:
    """Read a TOML (or JSON) scene file into a ``SceneConfig``."""
    try:
        if path.suffix.lower() == ".json":
            return SceneConfig.model_validate_json(path.read_text(encoding="utf-8"))
        with path.open("rb") as handle:
            return SceneConfig.model_validate(tomllib.load(handle))
    except OSError as exc:
        raise ConfigError(f"cannot read scene file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"scene file {path} is not valid TOML: {exc}") from exc


def run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        scene=args.scene,
        scene_file=args.scene_file,
        only=getattr(args, "only", None),
        seed=args.seed,
        grid=args.grid,
        tolerances=dict(getattr(args, "tolerances", [])),
        overrides=dict(args.overrides),
        out=getattr(args, "out", None),
        csv=getattr(args, "csv", None),
        format=getattr(args, "format", "json"),
    )


def scene_config(config: RunConfig) -> SceneConfig:
    """Scene file (or a bare scene name) with the command-line overrides applied."""
    base = load_scene_file(config.scene_file) if config.scene_file else SceneConfig(name=config.scene)
    for name in config.tolerances:
        get_check(name)

    merged = base.model_dump()
    merged["parameters"] = {**base.parameters, **config.overrides}
    merged["tolerances"] = {**base.tolerances, **config.tolerances}
    if config.seed is not None:
        merged["seed"] = config.seed
    if config.grid is not None:
        merged["grid"] = config.grid
    return SceneConfig.model_validate(merged)


def _build(args: argparse.Namespace) -> tuple:
    config = run_config(args)
    scene = build_scene(scene_config(config))
    return config, scene


# ============================================================
# Commands
# ============================================================

def _emit(config: RunConfig, scene: Scene, names: Optional[List[str]] = None) -> int:
    report = run_suite(scene, checks=names, pattern=config.only)
    get_report_writer(config.format).write(report, config.out)
    if config.csv is not None:
        write_csv(report, config.csv)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_check(args: argparse.Namespace) -> int:
    config, scene = _build(args)
    return _emit(config, scene)


def cmd_vary_ghy(args: argparse.Namespace) -> int:
    config, scene = _build(args)
    names = [name for name in scene.checks if name.startswith("ghy_") or name == "supporting_variations"]
    if not names:
        log("CLI", f"{scene.name} has no GHY variation checks")
    return _emit(config, scene, names)


def cmd_action(args: argparse.Namespace) -> int:
    _, scene = _build(args)
    if scene.matched is None:
        raise ConfigError(f"scene {scene.name!r} has no matched spacetime; try frw_dust or constant_density_star")
    breakdown = total_action(scene.matched, args.nodes)
    payload: Dict[str, float] = dict(breakdown._asdict(), total=breakdown.total)
    sys.stdout.write(json.dumps({"scene": scene.name, "action": payload}, indent=2) + "\n")
    return EXIT_PASS


def cmd_list_scenes(args: argparse.Namespace) -> int:
    specs = list_scenes()
    width = max(len(spec.name) for spec in specs)
    for spec in specs:
        print(f"{spec.name:<{width}}  {spec.description}")
    return EXIT_PASS


def cmd_list_checks(args: argparse.Namespace) -> int:
    names = sorted(set(get_scene_spec(args.scene).checks)) if args.scene else sorted(CHECKS)
    width = max(len(name) for name in names)
    for name in names:
        print(f"{name:<{width}}  {get_check(name).anchor}")
    return EXIT_PASS


COMMANDS = {
    "check": cmd_check,
    "vary-ghy": cmd_vary_ghy,
    "action": cmd_action,
    "list-scenes": cmd_list_scenes,
    "list-checks": cmd_list_checks,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG

    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        fail("CLI", f"invalid configuration: {exc}")
    except RelcontError as exc:
        fail("CLI", f"{type(exc).__name__}: {exc}")
    return EXIT_CONFIG
