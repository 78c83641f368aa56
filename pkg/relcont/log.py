"""
Console logging for relcont
===========================

Tagged progress lines on standard error via rich. Standard output is reserved
for reports.

Usage:
    from relcont.log import log, ok, warn, fail

    log("Harness", "running 12 checks")
    ok("Check", "bianchi_identity")
"""

from rich.console import Console

from relcont.config import get_settings

console = Console(stderr=True, highlight=False)


def log(tag: str, message: str) -> None:
    """Print an info line unless RELCONT_QUIET is set."""
    if get_settings().quiet:
        return
    console.print(f"[{tag}] {message}", markup=False)


def ok(tag: str, message: str) -> None:
    if get_settings().quiet:
        return
    console.print(f"[OK] [{tag}] {message}", markup=False, style="green")


def warn(tag: str, message: str) -> None:
    console.print(f"[WARN] [{tag}] {message}", markup=False, style="yellow")


def fail(tag: str, message: str) -> None:
    console.print(f"[FAIL] [{tag}] {message}", markup=False, style="red")
