"""
Report Writers for relcont
==========================

Renders a suite ``Report`` as JSON (the machine-readable result file) or as a
rich text table, and optionally appends flat CSV rows for sweeps.

Usage:
    from relcont.reporting import get_report_writer, write_csv

    writer = get_report_writer("json")
    writer.write(report, path="report.json")   # or stdout when path is None
    write_csv(report, "runs.csv")
"""

import csv
import io
import sys
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Optional, Union

from rich.console import Console
from rich.table import Table

from relcont.errors import ConfigError
from relcont.log import log
from relcont.models import Report, ReportFormat

CSV_COLUMNS = ["scene", "check", "mode", "grid", "nodes", "max_residual", "l2_residual", "tolerance", "pass"]


# ============================================================
# Abstract Writer Interface
# ============================================================

class ReportWriter(ABC):
    """Turns a report into text."""

    @abstractmethod
    def render(self, report: Report) -> str:
        """Render the full report."""
        pass

    def write(self, report: Report, path: Optional[Union[str, Path]] = None) -> None:
        text = self.render(report)
        if path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        Path(path).write_text(text, encoding="utf-8")
        log("Report", f"wrote {path}")


# ============================================================
# Implementations
# ============================================================

class JsonReportWriter(ReportWriter):
    """Report JSON: scene, environment and one record per check (``pass`` key, inf as Infinity)."""

    def render(self, report: Report) -> str:
        return report.model_dump_json(indent=2, by_alias=True, exclude_none=True) + "\n"


class TextReportWriter(ReportWriter):
    """Human-readable table, one row per check."""

    def render(self, report: Report) -> str:
        env = report.environment
        table = Table(title=f"{report.scene} (seed {env.seed}, grid {env.grid}, nodes {env.nodes})")
        table.add_column("check")
        table.add_column("mode")
        table.add_column("max residual", justify="right")
        table.add_column("tolerance", justify="right")
        table.add_column("result")
        for record in report.checks:
            table.add_row(record.name, record.mode.value, f"{record.max_residual:.3e}", f"{record.tolerance:g}",
                          "pass" if record.passed else "FAIL")

        buffer = io.StringIO()
        console = Console(file=buffer, width=120, highlight=False, color_system=None)
        console.print(table)
        failures = report.failures()
        console.print(f"{len(report.checks) - len(failures)} passed, {len(failures)} failed", markup=False)
        for record in failures:
            if record.detail:
                console.print(f"  {record.name}: {record.detail}", markup=False)
        return buffer.getvalue()


def write_csv(report: Report, path: Union[str, Path]) -> None:
    """Append one row per check; writes the header when the file is new."""
    path = Path(path)
    new_file = not path.exists() or path.stat().st_size == 0
    env = report.environment
    with path.open("a", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        if new_file:
            writer.writerow(CSV_COLUMNS)
        for record in report.checks:
            writer.writerow([report.scene, record.name, record.mode.value, env.grid, env.nodes,
                             repr(record.max_residual), repr(record.l2_residual), repr(record.tolerance),
                             int(record.passed)])
    log("Report", f"appended {len(report.checks)} rows to {path}")


# ============================================================
# Singleton Getters
# ============================================================

_writers: Dict[ReportFormat, ReportWriter] = {}


def get_report_writer(fmt: Union[str, ReportFormat] = ReportFormat.JSON) -> ReportWriter:
    """Get the writer for a report format."""
    try:
        fmt = ReportFormat(fmt)
    except ValueError as exc:
        raise ConfigError(f"unknown report format {fmt!r}; use one of {[f.value for f in ReportFormat]}") from exc

    if fmt not in _writers:
        _writers[fmt] = JsonReportWriter() if fmt == ReportFormat.JSON else TextReportWriter()
    return _writers[fmt]


def reset_report_writers():
    """Reset the writer cache (for testing)."""
    _writers.clear()
