"""
Core computations: channel model, decoy estimation, key rates, optimization,
Monte Carlo simulation and the dimension attack.
"""

from .error_handler import (
    ConfigError,
    DegenerateIntensityError,
    DomainError,
    ErrorHandler,
    ErrorSeverity,
    EstimationFailureError,
    NormalizationError,
    OneSidedError,
    PointFlag,
)
from .progress_reporter import ProgressReporter, ProgressType
from .config_manager import ConfigManager, RunConfig

__all__ = [
    'ConfigError',
    'DegenerateIntensityError',
    'DomainError',
    'ErrorHandler',
    'ErrorSeverity',
    'EstimationFailureError',
    'NormalizationError',
    'OneSidedError',
    'PointFlag',
    'ProgressReporter',
    'ProgressType',
    'ConfigManager',
    'RunConfig',
]
