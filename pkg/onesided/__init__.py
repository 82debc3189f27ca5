"""
onesided - numerical laboratory for one-sided measurement-device-independent QKD.
"""

__version__ = "0.1.0"

# Core components
from .core.error_handler import ErrorHandler, PointFlag
from .core.progress_reporter import ProgressReporter
from .core.config_manager import ConfigManager, RunConfig, parse_config, serialize_config
from .core.model import ChannelParams, arm_transmittance, gain_qber_xx, gain_qber_zz, single_photon_truth
from .core.decoy import IntensitySet, PairStatistics, observe, two_decoy_estimates
from .core.keyrate import KeyRatePoint, RateMode, TrustedSourceModel, rate_at
from .core.optimizer import SweepGrid, max_distance, optimize_signal_intensity, rate_vs_distance
from .core.montecarlo import estimate_statistics, observe_monte_carlo
from .core.attack import attack_indistinguishability_report

__all__ = [
    "ErrorHandler",
    "PointFlag",
    "ProgressReporter",
    "ConfigManager",
    "RunConfig",
    "parse_config",
    "serialize_config",
    "ChannelParams",
    "arm_transmittance",
    "gain_qber_xx",
    "gain_qber_zz",
    "single_photon_truth",
    "IntensitySet",
    "PairStatistics",
    "observe",
    "two_decoy_estimates",
    "KeyRatePoint",
    "RateMode",
    "TrustedSourceModel",
    "rate_at",
    "SweepGrid",
    "max_distance",
    "optimize_signal_intensity",
    "rate_vs_distance",
    "estimate_statistics",
    "observe_monte_carlo",
    "attack_indistinguishability_report",
]
