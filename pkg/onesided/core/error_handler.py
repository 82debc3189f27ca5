"""
Error types and event handling for key-rate computations.
"""

import sys
import time
import logging
from typing import Dict, List, Optional, Any
from enum import Enum


class OneSidedError(Exception):
    """Base class for all errors raised by onesided."""


class DomainError(OneSidedError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateIntensityError(DomainError):
    """Signal and weak decoy intensities coincide."""


class EstimationFailureError(OneSidedError):
    """No single-photon signal could be certified from the statistics."""


class NormalizationError(DomainError):
    """A state or distribution is not normalized."""


class ConfigError(OneSidedError):
    """Base class for configuration problems."""


class ConfigParseError(ConfigError):
    """Malformed configuration text."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ConfigValidationError(ConfigError):
    """A configuration value violates its invariant."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class ErrorSeverity(Enum):
    """Error severity levels."""
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


class PointFlag(str, Enum):
    """Conditions attached to computed points instead of raising."""
    EMPTY = "empty"            # Q = 0, E reported as e0
    CLAMPED = "clamped"        # decoy bound clamped into [0, 1]
    NO_SIGNAL = "no_signal"    # Y11 lower bound <= 0
    FLOORED = "floored"        # negative key rate floored to 0
    FLAT = "flat"              # optimizer found no positive rate
    NO_POSITIVE_RATE = "no_positive_rate"


def join_flags(flags) -> str:
    """Render flags for the CSV `flags` column."""
    return "|".join(sorted({PointFlag(flag).value for flag in flags}))


class ErrorHandler:
    """Logs errors and numerical events raised while running computations."""

    def __init__(self, log_file: Optional[str] = None, verbose: bool = False):
        self.errors: List[Dict] = []
        self.verbose = verbose

        self.logger = logging.getLogger("onesided")
        self.logger.setLevel(logging.DEBUG if verbose else logging.INFO)

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )

        if not self.logger.handlers:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(logging.DEBUG if verbose else logging.WARNING)
            console_handler.setFormatter(formatter)
            self.logger.addHandler(console_handler)

        if log_file:
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

    def handle_error(self, error: Exception, context: Dict[str, Any],
                     severity: ErrorSeverity = ErrorSeverity.ERROR) -> bool:
        """
        Record and log an error.

        Returns:
            bool: True if the caller may continue, False if the error should propagate
        """
        self._record(type(error).__name__, str(error), context, severity)

        if isinstance(error, ConfigError):
            return False
        if isinstance(error, (EstimationFailureError, DomainError)):
            # point-level numerical failures do not stop a sweep
            return severity in (ErrorSeverity.INFO, ErrorSeverity.WARNING)
        if isinstance(error, OSError):
            path = context.get("path", "unknown")
            self.logger.error(f"I/O failure on {path}")
            return False

        return False

    def record_event(self, flag: PointFlag, context: Dict[str, Any],
                     severity: ErrorSeverity = ErrorSeverity.INFO):
        """Record a flagged numerical event (clamp, floor, empty point...)."""
        self._record(PointFlag(flag).value, "flagged point", context, severity)

    def _record(self, kind: str, message: str, context: Dict[str, Any],
                severity: ErrorSeverity):
        self.errors.append({
            "type": kind,
            "message": message,
            "context": context,
            "severity": severity,
            "timestamp": time.time(),
        })

        log_message = f"{kind}: {message} | Context: {context}"
        if severity == ErrorSeverity.INFO:
            self.logger.debug(log_message)
        elif severity == ErrorSeverity.WARNING:
            self.logger.warning(log_message)
        elif severity == ErrorSeverity.ERROR:
            self.logger.error(log_message)
        elif severity == ErrorSeverity.CRITICAL:
            self.logger.critical(log_message)

    def get_error_summary(self) -> Dict[str, Any]:
        """Get a summary of all errors and events encountered."""
        error_counts = {}
        severity_counts = {}

        for error in self.errors:
            error_type = error["type"]
            severity = error["severity"].value

            error_counts[error_type] = error_counts.get(error_type, 0) + 1
            severity_counts[severity] = severity_counts.get(severity, 0) + 1

        return {
            "total_errors": len(self.errors),
            "error_types": error_counts,
            "severity_breakdown": severity_counts,
        }
