"""
Display utilities for reports printed by the command line.
"""

from typing import Dict, Iterable, List, Mapping, Tuple

from ..core.attack import AttackReport
from ..core.montecarlo import ValidationReport
from ..core.keyrate import KeyRatePoint
from ..core.optimizer import MaxDistanceResult, OptimizationResult


def _header(title: str):
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def _fraction(p: float) -> str:
    """Render 0, 1/4, 1/2, 3/4 and 1 the way a probability table does."""
    for text, value in (("0", 0.0), ("1/4", 0.25), ("1/2", 0.5), ("3/4", 0.75), ("1", 1.0)):
        if abs(p - value) <= 1e-12:
            return text
    return f"{p:.6f}"


def print_attack_report(report: AttackReport):
    """Print the 16-pair table: state pair, possible clicks, M_z = +/- and TV distance."""
    _header("DIMENSION ATTACK REPORT")
    print(f"{'Alice':>6} {'Bob':>6}  {'possible clicks':<28} {'Mz=+':>5} {'Mz=-':>5}  {'TV distance':>12}")
    for row in report.rows:
        clicks = ", ".join(b.value for b in row.possible_clicks)
        print(f"{row.alice.ket:>6} {row.bob.ket:>6}  {clicks:<28} "
              f"{_fraction(row.mz_plus):>5} {_fraction(row.mz_minus):>5}  {row.tv_distance:>12.3e}")

    print(f"\n📏 Max TV distance: {report.max_tv_distance:.3e} (tolerance {report.tolerance:.0e})")
    print(f"🕵️  Charlie's guess probability for Alice's state: {report.guess_probability:.12f}")
    print(f"🔓 Complete knowledge of Alice's bit: {'yes' if report.knowledge_complete else 'no'}")
    print(f"{'✅ PASS' if report.passed else '❌ FAIL'}")


def print_validation_report(report: ValidationReport):
    _header("MONTE CARLO VALIDATION")
    for configuration in report.configurations:
        status = "✅" if configuration.passed else "❌"
        print(f"{status} L = {configuration.distance_km:g} km, {configuration.basis.value}")
        for check in configuration.checks:
            print(f"   {check.quantity:<4} empirical={check.empirical:.6e} model={check.expected:.6e} "
                  f"stderr={check.stderr:.2e} z={check.z_score:+.2f}")

    total = len(report.configurations)
    print(f"\n📊 {total - report.failures}/{total} configurations agree "
          f"(at most {report.allowed_failures} failure allowed)")
    print(f"{'✅ PASS' if report.passed else '❌ FAIL'}")


def print_optimization_results(results: Mapping[float, OptimizationResult], distance_km: float):
    _header(f"OPTIMAL SIGNAL INTENSITY AT L = {distance_km:g} km")
    for eta_s, result in sorted(results.items(), reverse=True):
        flags = f"  [{', '.join(sorted(f.value for f in result.flags))}]" if result.flags else ""
        print(f"   eta_s = {eta_s:<5g} mu* = {result.mu_star:.4f}  R = {result.rate_star:.6e}{flags}")


def print_max_distances(results: Iterable[Tuple[float, str, float, MaxDistanceResult]]):
    """Rows of (eta_s, mode, mu, result)."""
    _header("MAXIMUM DISTANCE")
    for eta_s, mode, mu, result in results:
        flags = f"  [{', '.join(sorted(f.value for f in result.flags))}]" if result.flags else ""
        print(f"   eta_s = {eta_s:<5g} mode = {mode:<10} mu = {mu:<6g} "
              f"L_max = {result.distance_km:.2f} km{flags}")


def print_sweep_summary(points: List[KeyRatePoint], path: str):
    """One line per curve: points written and the last distance with a positive rate."""
    curves: Dict[float, List[KeyRatePoint]] = {}
    for point in points:
        curves.setdefault(point.eta_s, []).append(point)

    print(f"✅ Wrote {len(points)} points to {path}")
    for eta_s, curve in curves.items():
        positive = [p.distance_km for p in curve if p.rate > 0.0]
        reach = f"{max(positive):g} km" if positive else "none"
        print(f"   eta_s = {eta_s:<5g} mu = {curve[0].mu:<6g} last positive rate at {reach}")


def print_event_summary(summary: Mapping):
    """Flagged points and errors recorded during the run."""
    if summary.get("total_errors", 0) == 0:
        return
    print(f"\n⚠️  Events recorded: {summary['total_errors']}")
    for event_type, count in sorted(summary.get("error_types", {}).items()):
        print(f"   • {event_type}: {count}")
