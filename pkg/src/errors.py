"""
Exception hierarchy shared by every module.

Input problems subclass ValueError so callers can keep catching ValueError;
broken solver invariants subclass RuntimeError and carry the event trace.
"""
from typing import Optional


class DomainError(ValueError):
    """Argument outside the domain of a valuation or solver."""


class SlopeRangeError(ValueError):
    """Slope that no supergradient of the valuation can take."""


class InstanceValidationError(ValueError):
    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


class GapConstructionError(ValueError):
    """The valuation/width pair admits no integrality gap (mu = 1)."""


class OracleSizeError(ValueError):
    """Exhaustive enumeration refused because n**m is above the guard."""


class InvariantViolation(RuntimeError):
    def __init__(self, message: str, trace: Optional[list] = None, details: Optional[dict] = None):
        super().__init__(message)
        self.trace = trace or []
        self.details = details or {}


class IterationBudgetExceeded(InvariantViolation):
    """Solver ran past its iteration budget; always a bug, never a truncation."""
