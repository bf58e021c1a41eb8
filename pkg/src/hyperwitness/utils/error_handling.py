"""
Standardized Error Handling Framework
====================================

Provides the exception hierarchy shared by the simulation, analysis and CLI
layers of hyperwitness. Every domain error carries a severity, the component
that raised it and a context dict, and serializes to the JSON shape the CLI
prints on exit code 1.
"""

import json
import logging
from datetime import datetime
from enum import Enum
from typing import Any, Optional

logger = logging.getLogger(__name__)


class ErrorSeverity(Enum):
    """Error severity levels"""

    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class HyperwitnessError(Exception):
    """Base exception for hyperwitness errors"""

    def __init__(
        self,
        message: str,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM,
        component: str = "unknown",
        context: Optional[dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.severity = severity
        self.component = component
        self.context = context or {}
        self.timestamp = datetime.now().isoformat()

    @property
    def error_type(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict[str, Any]:
        """Structured form used for machine-readable error output."""
        return {
            "error": self.error_type,
            "message": self.message,
            "severity": self.severity.value,
            "component": self.component,
            "context": _jsonable(self.context),
        }


class RegisterConflict(HyperwitnessError, ValueError):
    """Qubit registers overlap or do not match"""

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        super().__init__(message, ErrorSeverity.HIGH, "qcore", context)


class InvalidSubsystem(HyperwitnessError, ValueError):
    """Partial trace or bipartition over an illegal set of qubits"""

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        super().__init__(message, ErrorSeverity.HIGH, "qcore", context)


class InvalidDensityMatrix(HyperwitnessError, ValueError):
    """Matrix is not Hermitian, not unit trace or not positive"""

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        super().__init__(message, ErrorSeverity.HIGH, "qcore", context)


class InvalidProbability(HyperwitnessError, ValueError):
    """Mixing weight or channel strength outside [0, 1]"""

    def __init__(
        self,
        message: str,
        component: str = "noise",
        context: Optional[dict[str, Any]] = None,
    ):
        super().__init__(message, ErrorSeverity.MEDIUM, component, context)


class InvalidIndex(HyperwitnessError, ValueError):
    """Stabilizer index out of range"""

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        super().__init__(message, ErrorSeverity.MEDIUM, "observables", context)


class InvalidParameter(HyperwitnessError, ValueError):
    """Generic bad argument value"""

    def __init__(
        self,
        message: str,
        component: str = "unknown",
        context: Optional[dict[str, Any]] = None,
    ):
        super().__init__(message, ErrorSeverity.MEDIUM, component, context)


class NumericalInconsistency(HyperwitnessError, ArithmeticError):
    """A numerical result violates an invariant it must satisfy"""

    def __init__(
        self,
        message: str,
        component: str = "unknown",
        context: Optional[dict[str, Any]] = None,
    ):
        super().__init__(message, ErrorSeverity.CRITICAL, component, context)


class UnsupportedBasis(HyperwitnessError, ValueError):
    """Measurement accounting met a Pauli letter it does not support"""

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        super().__init__(message, ErrorSeverity.MEDIUM, "observables", context)


class NoThreshold(HyperwitnessError):
    """Witness does not change sign on the searched interval"""

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        super().__init__(message, ErrorSeverity.MEDIUM, "noise", context)


class ParseError(HyperwitnessError, ValueError):
    """Input document does not match its schema"""

    def __init__(
        self,
        message: str,
        location: str = "",
        context: Optional[dict[str, Any]] = None,
    ):
        context = dict(context or {})
        context["location"] = location
        super().__init__(message, ErrorSeverity.HIGH, "datalab", context)
        self.location = location


class MissingEntries(HyperwitnessError, LookupError):
    """Stabilizer table lacks products a witness expansion needs"""

    def __init__(self, message: str, missing: list[list[int]], witness: str = ""):
        super().__init__(
            message,
            ErrorSeverity.HIGH,
            "datalab",
            {"witness": witness, "missing": missing},
        )
        self.missing = missing


class EmptyData(HyperwitnessError, ValueError):
    """No counts to convert"""

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        super().__init__(message, ErrorSeverity.MEDIUM, "datalab", context)


class FitError(HyperwitnessError):
    """Least-squares problem is degenerate or did not converge"""

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        super().__init__(message, ErrorSeverity.MEDIUM, "fringe", context)


class ConfigurationError(HyperwitnessError):
    """Configuration error"""

    def __init__(
        self,
        message: str,
        config_component: str = "unknown",
        context: Optional[dict[str, Any]] = None,
    ):
        super().__init__(
            message, ErrorSeverity.HIGH, f"config_{config_component}", context
        )


def _jsonable(value: Any) -> Any:
    """Best-effort conversion of error context into JSON-compatible values."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [_jsonable(v) for v in items]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def safe_json_load(file_path: str) -> Any:
    """Load a JSON file, raising ParseError with the location on failure"""
    try:
        with open(file_path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ParseError(f"File not found: {file_path}", location=str(file_path)) from e
    except json.JSONDecodeError as e:
        raise ParseError(
            f"Invalid JSON in {file_path}: {e.msg}",
            location=f"{file_path}:{e.lineno}:{e.colno}",
        ) from e


def require_config(config_key: str, config_dict: dict[str, Any]) -> Any:
    """Require configuration key with proper error handling"""
    if config_key not in config_dict:
        raise ConfigurationError(f"Required configuration missing: {config_key}")
    return config_dict[config_key]


def handle_error(
    error: Exception, component: str = "unknown", context: Optional[dict] = None
) -> HyperwitnessError:
    """
    Standardized error handling function that converts any exception to
    HyperwitnessError with proper context and logging
    """
    context = context or {}
    logger.error(f"Error in {component}: {error}")
    if context:
        logger.debug(f"Context: {context}")

    if isinstance(error, HyperwitnessError):
        return error

    if isinstance(error, (ValueError, TypeError, KeyError)):
        severity = ErrorSeverity.MEDIUM
    elif isinstance(error, (FileNotFoundError, PermissionError)):
        severity = ErrorSeverity.HIGH
    else:
        severity = ErrorSeverity.MEDIUM

    return HyperwitnessError(
        message=str(error), severity=severity, component=component, context=context
    )
