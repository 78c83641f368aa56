"""
Runtime settings for relcont
============================

Reads environment variables (and a local ``.env`` file) once and exposes a
validated ``Settings`` object.

Environment:
    RELCONT_THREADS   worker threads used by the harness (default: CPU count)
    RELCONT_QUIET     set to 1 to silence info lines on stderr

Usage:
    from relcont.config import get_settings

    settings = get_settings()
    print(settings.threads)
"""

import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from relcont.errors import ConfigError

load_dotenv()


class Settings(BaseModel):
    """Process-wide numerical and runtime defaults."""
    threads: int = Field(default=1, ge=1, description="Worker threads for suite execution")
    quiet: bool = Field(default=False, description="Suppress info lines on stderr")
    exact_tolerance: float = Field(default=1e-8, gt=0, description="Tolerance for exact-derivative checks")
    fd_tolerance: float = Field(default=1e-5, gt=0, description="Tolerance for finite-difference checks")
    fd_step_fraction: float = Field(default=1e-4, gt=0, description="FD step as a fraction of the chart scale")
    newton_iterations: int = Field(default=50, ge=1, description="Iteration cap for world-tube inversion")
    quadrature_nodes: int = Field(default=16, ge=1, description="Gauss-Legendre nodes per axis")
    grid: int = Field(default=9, ge=2, description="Sample points per axis in exact mode")
    fd_grid: int = Field(default=3, ge=1, description="Sample points per axis in FD mode")


_settings: Optional[Settings] = None


def _env_flag(name: str) -> bool:
    return os.getenv(name, "").strip().lower() in ("1", "true", "yes", "on")


def get_settings() -> Settings:
    """Get the settings singleton, reading the environment on first use."""
    global _settings

    if _settings is not None:
        return _settings

    raw_threads = os.getenv("RELCONT_THREADS")
    try:
        threads = int(raw_threads) if raw_threads else (os.cpu_count() or 1)
        _settings = Settings(threads=threads, quiet=_env_flag("RELCONT_QUIET"))
    except (ValueError, ValidationError) as exc:
        raise ConfigError(f"RELCONT_THREADS must be a positive integer, got {raw_threads!r}") from exc

    return _settings


def reset_settings():
    """Reset the settings instance (for testing)."""
    global _settings
    _settings = None
