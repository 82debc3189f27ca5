"""
Command-line interface for onesided.
"""

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .core.error_handler import ConfigError, ErrorHandler, ErrorSeverity
from .core.config_manager import ConfigManager, RunConfig, validate_config
from .core.progress_reporter import ProgressReporter, ProgressType
from .core.keyrate import RateMode, TrustedSourceModel
from .core.optimizer import (
    DEFAULT_RANGE,
    MaxDistanceResult,
    OptimizationResult,
    max_distance,
    optimal_intensities,
    rate_vs_distance,
    signal_intensities,
)
from .core.montecarlo import VALIDATION_DISTANCES_KM, ValidationReport, cross_validate
from .core.attack import AttackReport, attack_indistinguishability_report
from .utils.csv_export import write_key_rate_csv
from .utils.display import (
    print_attack_report,
    print_event_summary,
    print_max_distances,
    print_optimization_results,
    print_sweep_summary,
    print_validation_report,
)


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3


def _with_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Re-validate a config with command-line overrides applied."""
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if not overrides:
        return config
    return validate_config({**config.to_dict(), **overrides})


def _intensity_range(config: RunConfig, mode: RateMode) -> Tuple[float, float]:
    lo, hi = DEFAULT_RANGE
    if mode is RateMode.TWO_DECOY:
        lo = max(lo, 2.0 * config.mu_decoy)
    return lo, hi


def run_sweep(config: RunConfig, error_handler: Optional[ErrorHandler] = None,
              progress_reporter: Optional[ProgressReporter] = None, workers: int = 1) -> Path:
    """Evaluate the rate-vs-distance grid and write it to config.out."""
    error_handler = error_handler or ErrorHandler()
    points = rate_vs_distance(config.channel, config.grid(), config.signal_by_eta_s,
                              decoy=config.mu_decoy, workers=workers,
                              progress_reporter=progress_reporter)
    for point in points:
        for flag in point.flags:
            error_handler.record_event(flag, {"distance_km": point.distance_km, "eta_s": point.eta_s})

    try:
        path = write_key_rate_csv(points, config.out)
    except OSError as e:
        error_handler.handle_error(e, {"path": config.out}, ErrorSeverity.ERROR)
        raise
    print_sweep_summary(points, str(path))
    return path


def run_optimize(config: RunConfig, distance_km: float = 0.0) -> Dict[float, OptimizationResult]:
    results = optimal_intensities(config.channel, config.eta_s_list, distance_km=distance_km,
                                  mode=config.mode,
                                  intensity_range=_intensity_range(config, config.mode),
                                  decoy=config.mu_decoy)
    print_optimization_results(results, distance_km)
    return results


def run_maxdist(config: RunConfig, modes: Sequence[RateMode]) -> List[Tuple[float, str, float, MaxDistanceResult]]:
    """Maximum distance per trust level at its configured signal intensity."""
    rows = []
    for eta_s, mu in config.signal_by_eta_s.items():
        for mode in modes:
            intensities = signal_intensities(mu, config.mu_decoy, mode)
            result = max_distance(config.channel, intensities, TrustedSourceModel(eta_s), mode)
            rows.append((eta_s, mode.value, mu, result))
    print_max_distances(rows)
    return rows


def run_validate(config: RunConfig, simulator_e_d: Optional[float] = None,
                 progress_reporter: Optional[ProgressReporter] = None,
                 workers: int = 1) -> ValidationReport:
    """
    Compare the Monte Carlo simulation with the closed forms at 0, 50 and 100 km.

    `simulator_e_d` replaces the misalignment of the simulated channel only.
    """
    channel = config.channel
    simulator_channel = None
    if simulator_e_d is not None:
        simulator_channel = dataclasses.replace(channel, e_d=simulator_e_d)
    mu = config.signal_by_eta_s[max(config.eta_s_list)]

    report = cross_validate(channel, mu, config.mc_trials, config.mc_seed,
                            distances_km=VALIDATION_DISTANCES_KM,
                            simulator_channel=simulator_channel, workers=workers,
                            progress_reporter=progress_reporter)
    print_validation_report(report)
    return report


def run_attack_report(split: Tuple[float, float] = (0.5, 0.5)) -> AttackReport:
    report = attack_indistinguishability_report(split)
    print_attack_report(report)
    return report


def _probability(text: str) -> float:
    """argparse type for values in [0, 1]."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onesided",
        description="onesided - key rates, decoy-state estimation and Monte Carlo checks "
                    "for one-sided MDI-QKD",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  onesided sweep                              # Default curves to keyrate.csv
  onesided -c run.conf sweep --mode two-decoy # Two-decoy curves from a config file
  onesided optimize --distance 0              # Optimal signal intensity per eta_s
  onesided maxdist --mode both                # Maximum distance per eta_s and mode
  onesided validate --trials 1000000          # Monte Carlo vs closed forms
  onesided attack-report                      # Dimension attack table
  onesided init --create-config yaml          # Write a default config file
        """
    )

    parser.add_argument("-c", "--config", help="Configuration file (.conf, .yaml, .yml or .json)")
    parser.add_argument("--progress", choices=["silent", "simple", "detailed", "verbose"],
                        default="simple", help="Progress reporting type (default: simple)")
    parser.add_argument("--log-file", help="Also write log records to this file")
    parser.add_argument("--workers", type=int, default=1,
                        help="Parallel workers for sweeps and Monte Carlo blocks (default: 1)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Verbose output")
    parser.add_argument("-q", "--quiet", action="store_true", help="Quiet output")

    commands = parser.add_subparsers(dest="command", required=True)

    sweep = commands.add_parser("sweep", help="Key rate versus distance for every eta_s")
    sweep.add_argument("--mode", choices=[m.value for m in RateMode], help="Override the rate mode")
    sweep.add_argument("--out", help="Override the output CSV path")

    optimize = commands.add_parser("optimize", help="Optimal signal intensity per eta_s")
    optimize.add_argument("--distance", type=float, default=0.0, help="Distance in km (default: 0)")
    optimize.add_argument("--mode", choices=[m.value for m in RateMode], help="Override the rate mode")

    maxdist = commands.add_parser("maxdist", help="Maximum distance with a positive key rate")
    maxdist.add_argument("--mode", choices=[m.value for m in RateMode] + ["both"],
                         help="Rate mode, or both (default: the configured mode)")

    validate = commands.add_parser("validate", help="Monte Carlo cross-validation of the closed forms")
    validate.add_argument("--trials", type=int, help="Pulse pairs per configuration")
    validate.add_argument("--seed", type=int, help="Random seed")
    validate.add_argument("--simulator-e-d", type=_probability,
                          help="Misalignment used by the simulator only (mutation check)")

    attack = commands.add_parser("attack-report", help="Dimension attack indistinguishability table")
    attack.add_argument("--split", type=_probability, default=0.5,
                        help="Probability of announcing the first state of the Bell pair (default: 0.5)")

    init = commands.add_parser("init", help="Create a default configuration file")
    init.add_argument("--create-config", choices=["conf", "yaml", "json"], default="conf",
                      help="Configuration file format (default: conf)")
    init.add_argument("--directory", default=".", help="Target directory (default: .)")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)

    if args.quiet:
        progress_type = ProgressType.SILENT
    elif args.verbose:
        progress_type = ProgressType.VERBOSE
    else:
        progress_type = ProgressType(args.progress)

    error_handler = ErrorHandler(log_file=args.log_file, verbose=args.verbose)
    progress_reporter = ProgressReporter(progress_type)
    config_manager = ConfigManager(error_handler)

    try:
        if args.command == "init":
            config_file = config_manager.create_default_config(args.directory, args.create_config)
            print(f"✅ Created configuration file: {config_file}")
            return EXIT_OK

        if args.command == "attack-report":
            report = run_attack_report((args.split, 1.0 - args.split))
            return EXIT_OK if report.passed else EXIT_VALIDATION

        config = config_manager.load_config_file(args.config) if args.config else RunConfig()

        if args.command == "sweep":
            config = _with_overrides(config, mode=args.mode, out=args.out)
            print(f"🚀 Sweeping {config.l_min:g}-{config.l_max:g} km, mode {config.mode.value}")
            run_sweep(config, error_handler, progress_reporter, workers=args.workers)

        elif args.command == "optimize":
            config = _with_overrides(config, mode=args.mode)
            run_optimize(config, args.distance)

        elif args.command == "maxdist":
            if args.mode == "both":
                modes = list(RateMode)
            else:
                config = _with_overrides(config, mode=args.mode)
                modes = [config.mode]
            run_maxdist(config, modes)

        elif args.command == "validate":
            config = _with_overrides(config, mc_trials=args.trials, mc_seed=args.seed)
            print(f"🎲 Simulating {config.mc_trials} pulse pairs per configuration (seed {config.mc_seed})")
            report = run_validate(config, args.simulator_e_d, progress_reporter, workers=args.workers)
            if not report.passed:
                return EXIT_VALIDATION

        if not args.quiet:
            print_event_summary(error_handler.get_error_summary())
        return EXIT_OK

    except ConfigError as e:
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print("\n🛑 Operation cancelled by user", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as e:
        print(f"❌ I/O error on {e.filename or 'output'}: {e.strerror or e}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as e:
        print(f"❌ Fatal error: {e}", file=sys.stderr)
        if args.verbose:
            import traceback
            traceback.print_exc()
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
