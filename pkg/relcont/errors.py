"""
Error types for relcont
=======================

Every failure raised by the library derives from ``RelcontError`` so callers
(the harness, the CLI) can catch the whole family in one place.

Usage:
    from relcont.errors import BoundaryEvaluationError

    raise BoundaryEvaluationError(f"point {x} is within the stencil margin of the chart edge")
"""


class RelcontError(ValueError):
    """Base class for all relcont errors."""


class BoundaryEvaluationError(RelcontError):
    """Derivative requested too close to (or outside) the chart boundary."""


class SingularMetricError(RelcontError):
    """Metric or Jacobian could not be inverted."""


class SignatureError(RelcontError):
    """Metric signature or causal character does not match what was declared."""


class ContractViolation(RelcontError):
    """Ranks, weights or shapes do not fit the operation."""


class InversionError(RelcontError):
    """Newton inversion of a world-tube did not converge or left the domain."""


class DomainError(RelcontError):
    """Thermodynamic or kinematic argument outside its admissible domain."""


class InconsistentStateError(RelcontError):
    """A continuum state violates its own structural constraints."""


class DegenerateDeformationError(RelcontError):
    """Right Cauchy-Green tensor is not positive definite on the body."""


class NondegeneracyError(RelcontError):
    """Induced metric on a hypersurface is (numerically) degenerate."""


class UnknownSceneError(RelcontError):
    """Scene name not present in the registry."""


class UnknownCheckError(RelcontError):
    """Check name not present in the registry."""


class ConfigError(RelcontError):
    """Invalid configuration value, flag or scene file."""
