# pydantic models for structured data handling

import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator


# ==================== ENUMS ====================

class Signature(str, Enum):
    """Metric signature families"""
    LORENTZIAN = "lorentzian"
    RIEMANNIAN = "riemannian"


class DerivativeMode(str, Enum):
    """How derivatives behind a residual were obtained"""
    EXACT = "exact"
    FD = "fd"


class ReportFormat(str, Enum):
    """Report output formats"""
    JSON = "json"
    TEXT = "text"


class SurfaceKind(str, Enum):
    """Causal character of a hypersurface read off from g(n, n)"""
    TIMELIKE = "timelike"
    SPACELIKE = "spacelike"


ScalarValue = Union[bool, int, float, str]


# ==================== PYDANTIC MODELS ====================

class Constants(BaseModel):
    """Physical constants of a scene"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    G: float = Field(default=1.0, gt=0, description="Newton's constant")
    c: float = Field(default=1.0, gt=0, description="Speed of light")

    @computed_field
    @property
    def chi(self) -> float:
        """Einstein coupling 8 pi G / c^4."""
        return 8.0 * math.pi * self.G / self.c ** 4


class CheckRecord(BaseModel):
    """One verified identity and its residual norms"""
    model_config = ConfigDict(populate_by_name=True, ser_json_inf_nan="constants")

    name: str = Field(description="Check name")
    anchor: str = Field(min_length=1, description="Identity or theorem the check verifies")
    max_residual: float = Field(description="Max-abs residual over the sample set")
    l2_residual: float = Field(description="Root-mean-square residual over the sample set")
    tolerance: float = Field(gt=0, description="Pass threshold for max_residual")
    mode: DerivativeMode = Field(description="Derivative mode used")
    passed: bool = Field(alias="pass", description="max_residual < tolerance")
    detail: Optional[str] = Field(default=None, description="Error text when the check could not run")


class Environment(BaseModel):
    """Reproducibility stamp of a run"""
    seed: int = Field(description="Random seed")
    grid: int = Field(description="Sample points per axis (exact mode)")
    fd_grid: int = Field(description="Sample points per axis (FD mode)")
    nodes: int = Field(description="Gauss-Legendre nodes per axis")
    constants: Constants = Field(description="Scene constants")


class Report(BaseModel):
    """Suite outcome for one scene"""
    model_config = ConfigDict(ser_json_inf_nan="constants")

    scene: str
    environment: Environment
    checks: List[CheckRecord] = Field(default_factory=list)
    timestamp: Optional[str] = Field(default=None, exclude=True, description="Wall-clock time, kept out of JSON")

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.checks)

    def failures(self) -> List[CheckRecord]:
        return [record for record in self.checks if not record.passed]


class SceneConfig(BaseModel):
    """Scene selection as read from a scene file or the command line"""
    model_config = ConfigDict(extra="forbid")

    name: str = Field(description="Scene name (or label for a scene file)")
    base: Optional[str] = Field(default=None, description="Registered scene this file specializes")
    seed: int = Field(default=42, ge=0)
    grid: Optional[int] = Field(default=None, ge=2)
    fd_grid: Optional[int] = Field(default=None, ge=1)
    nodes: Optional[int] = Field(default=None, ge=2)
    constants: Constants = Field(default_factory=Constants)
    parameters: Dict[str, ScalarValue] = Field(default_factory=dict)
    checks: Optional[List[str]] = Field(default=None, description="Restrict the scene to these checks")
    tolerances: Dict[str, float] = Field(default_factory=dict)

    @field_validator("tolerances")
    @classmethod
    def _positive_tolerances(cls, value: Dict[str, float]) -> Dict[str, float]:
        for name, tol in value.items():
            if not tol > 0:
                raise ValueError(f"tolerance for {name!r} must be positive, got {tol}")
        return value


class RunConfig(BaseModel):
    """Validated command-line configuration"""
    model_config = ConfigDict(extra="forbid")

    scene: Optional[str] = None
    scene_file: Optional[Path] = None
    only: Optional[str] = Field(default=None, description="Glob over check names")
    seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)
    grid: Optional[int] = Field(default=None, ge=2)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    overrides: Dict[str, Any] = Field(default_factory=dict)
    out: Optional[Path] = None
    csv: Optional[Path] = None
    format: ReportFormat = ReportFormat.JSON

    @field_validator("tolerances")
    @classmethod
    def _positive_tolerances(cls, value: Dict[str, float]) -> Dict[str, float]:
        for name, tol in value.items():
            if not tol > 0:
                raise ValueError(f"tolerance for {name!r} must be positive, got {tol}")
        return value
