"""
Exception types and machine-readable reason codes
"""
from enum import Enum
from typing import Any, Dict, Optional


class ReasonCode(Enum):
    """Reason codes attached to failed checks and errors"""
    HYPOTHESIS_FAILED = "hypothesis_failed"
    DECOMPOSITION_FAILED = "decomposition_failed"
    SOLVER_FAILED = "solver_failed"
    WINDOW_VIOLATED = "window_violated"
    LEAKAGE = "leakage"
    DEGENERACY = "degeneracy"
    ORDERING = "ordering"
    HVZ_MISSING = "hvz_missing"
    PULLTHROUGH_RESIDUAL = "pullthrough_residual"
    NOT_CAUCHY = "not_cauchy"
    MOMENT_GROWTH = "moment_growth"
    PRECONDITION = "precondition"
    CONFIG = "config"
    INTERNAL = "internal"


class FiberLabError(Exception):
    """Common root; every error knows its reason code"""
    reason_code: ReasonCode = ReasonCode.INTERNAL


class DimensionError(FiberLabError, ValueError):
    """Mode counts or basis dimensions do not match"""
    reason_code = ReasonCode.PRECONDITION


class CapacityError(FiberLabError, ValueError):
    """Requested basis is larger than MAX_BASIS_DIMENSION"""
    reason_code = ReasonCode.PRECONDITION


class ModelError(FiberLabError, ValueError):
    """Model cannot be built (Hypothesis 1 violated)"""
    reason_code = ReasonCode.HYPOTHESIS_FAILED


class PreconditionError(FiberLabError, ValueError):
    """Operation precondition violated"""
    reason_code = ReasonCode.PRECONDITION


class ConfigError(FiberLabError, ValueError):
    """Config file could not be parsed or validated"""
    reason_code = ReasonCode.CONFIG

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(field)
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class DecompositionError(FiberLabError, RuntimeError):
    """Parity conjugation left off-block entries above tolerance"""
    reason_code = ReasonCode.DECOMPOSITION_FAILED


class SolverError(FiberLabError, RuntimeError):
    """Eigensolver rejected its input or did not converge"""
    reason_code = ReasonCode.SOLVER_FAILED

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class NumericalSingularityError(FiberLabError, RuntimeError):
    """Shifted system lost positive definiteness"""
    reason_code = ReasonCode.SOLVER_FAILED

    def __init__(self, message: str, mode: Any = None):
        self.mode = mode
        super().__init__(f"{message} (mode {mode})" if mode is not None else message)
