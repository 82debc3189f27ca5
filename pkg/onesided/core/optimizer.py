"""
Signal-intensity optimization, maximum-distance search and rate-vs-distance sweeps.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .error_handler import DomainError, PointFlag
from .model import ChannelParams
from .decoy import IntensitySet
from .keyrate import KeyRatePoint, RateMode, TrustedSourceModel, rate_at
from .progress_reporter import ProgressReporter


logger = logging.getLogger("onesided.optimizer")

DEFAULT_DECOY = 0.01
DEFAULT_RANGE = (0.02, 1.0)
COARSE_POINTS = 21
MAX_SEARCH_KM = 2000.0


@dataclass(frozen=True)
class SweepGrid:
    """Distances, signal-intensity search range and trust levels of a sweep."""
    distances_km: Tuple[float, ...]
    intensity_range: Tuple[float, float] = DEFAULT_RANGE
    step: float = 0.01
    eta_s_values: Tuple[float, ...] = (1.0, 0.95, 0.9, 0.85)
    mode: RateMode = RateMode.ASYMPTOTIC

    def __post_init__(self):
        distances = tuple(float(d) for d in self.distances_km)
        if any(b <= a for a, b in zip(distances, distances[1:])):
            raise DomainError("distances must be strictly increasing")
        if distances and distances[0] < 0.0:
            raise DomainError("distances must be >= 0")
        lo, hi = self.intensity_range
        if not 0.0 < lo < hi:
            raise DomainError(f"intensity range must satisfy 0 < lo < hi, got {self.intensity_range}")
        if not self.step > 0.0:
            raise DomainError(f"step must be > 0, got {self.step!r}")
        for eta_s in self.eta_s_values:
            TrustedSourceModel(eta_s)
        object.__setattr__(self, "distances_km", distances)
        object.__setattr__(self, "mode", RateMode(self.mode))

    @classmethod
    def from_range(cls, l_min: float, l_max: float, l_step: float, **kwargs) -> "SweepGrid":
        if not l_step > 0.0 or l_max < l_min:
            raise DomainError(f"bad distance range {l_min}..{l_max} step {l_step}")
        count = int(math.floor((l_max - l_min) / l_step + 1e-9)) + 1
        distances = l_min + l_step * np.arange(count, dtype=float)
        return cls(distances_km=tuple(float(d) for d in distances), **kwargs)


@dataclass(frozen=True)
class OptimizationResult:
    mu_star: float
    rate_star: float
    coarse_mu: float
    coarse_rate: float
    flags: FrozenSet[PointFlag] = field(default_factory=frozenset)


@dataclass(frozen=True)
class MaxDistanceResult:
    distance_km: float
    flags: FrozenSet[PointFlag] = field(default_factory=frozenset)


def signal_intensities(mu: float, decoy: float = DEFAULT_DECOY,
                       mode: RateMode = RateMode.ASYMPTOTIC) -> IntensitySet:
    """Intensity set for a signal mu; the decoy only matters in two-decoy mode."""
    if RateMode(mode) is RateMode.TWO_DECOY:
        if not mu > decoy:
            raise DomainError(f"signal intensity {mu!r} must exceed the decoy {decoy!r}")
        return IntensitySet(mu1=decoy, mu2=mu)
    return IntensitySet(mu1=min(decoy, 0.5 * mu), mu2=mu)


def optimize_signal_intensity(channel: ChannelParams, distance_km: float,
                              trust: TrustedSourceModel,
                              mode: RateMode = RateMode.ASYMPTOTIC,
                              intensity_range: Tuple[float, float] = DEFAULT_RANGE,
                              tol: float = 1e-4,
                              decoy: float = DEFAULT_DECOY) -> OptimizationResult:
    """
    Maximize the key rate over mu = nu.

    A 21-point coarse grid locates the best cell, then golden-section search
    refines inside the bracket around it. The refined point is kept only if
    it does not fall below the best grid value.
    """
    lo, hi = (float(v) for v in intensity_range)
    if not 0.0 < lo < hi <= 2.0:
        raise DomainError(f"intensity range must lie within (0, 2], got {intensity_range}")
    if not tol > 0.0:
        raise DomainError(f"tol must be > 0, got {tol!r}")
    mode = RateMode(mode)

    def signed_rate(mu: float) -> float:
        return rate_at(channel, distance_km, signal_intensities(mu, decoy, mode), trust, mode).signed_rate

    grid = np.linspace(lo, hi, COARSE_POINTS)
    values = np.array([signed_rate(mu) for mu in grid])
    best = int(np.argmax(values))
    coarse_mu, coarse_signed = float(grid[best]), float(values[best])

    if coarse_signed <= 0.0:
        logger.debug(f"flat landscape at L={distance_km} km, eta_s={trust.eta_s}")
        return OptimizationResult(mu_star=coarse_mu, rate_star=0.0, coarse_mu=coarse_mu,
                                  coarse_rate=0.0, flags=frozenset({PointFlag.FLAT}))

    left = float(grid[max(best - 1, 0)])
    right = float(grid[min(best + 1, COARSE_POINTS - 1)])
    objective = lambda mu: -signed_rate(mu)
    try:
        if best in (0, COARSE_POINTS - 1):
            raise ValueError("maximum on the edge of the coarse grid")
        result = optimize.minimize_scalar(objective, bracket=(left, coarse_mu, right),
                                          method="golden", tol=tol / (2.0 * right))
    except ValueError:
        result = optimize.minimize_scalar(objective, bounds=(left, right), method="bounded",
                                          options={"xatol": tol})

    mu_star, rate_star = float(result.x), float(-result.fun)
    if not (left <= mu_star <= right) or rate_star < coarse_signed:
        mu_star, rate_star = coarse_mu, coarse_signed

    return OptimizationResult(mu_star=mu_star, rate_star=max(rate_star, 0.0),
                              coarse_mu=coarse_mu, coarse_rate=max(coarse_signed, 0.0))


def optimal_intensities(channel: ChannelParams, eta_s_values: Sequence[float],
                        distance_km: float = 0.0,
                        mode: RateMode = RateMode.ASYMPTOTIC,
                        intensity_range: Tuple[float, float] = DEFAULT_RANGE,
                        tol: float = 1e-4,
                        decoy: float = DEFAULT_DECOY) -> Dict[float, OptimizationResult]:
    """Optimal signal intensity for each trust level."""
    return {
        eta_s: optimize_signal_intensity(channel, distance_km, TrustedSourceModel(eta_s), mode,
                                         intensity_range, tol, decoy)
        for eta_s in eta_s_values
    }


def max_distance(channel: ChannelParams, intensities: IntensitySet,
                 trust: TrustedSourceModel, mode: RateMode = RateMode.ASYMPTOTIC,
                 tol_km: float = 0.01) -> MaxDistanceResult:
    """
    Largest distance with a positive key rate.

    The rate is assumed to decrease with distance: the bracket is doubled from
    50 km until the signed rate turns non-positive, then bisected to tol_km.
    """
    mode = RateMode(mode)

    def signed_rate(distance_km: float) -> float:
        return rate_at(channel, distance_km, intensities, trust, mode).signed_rate

    if signed_rate(0.0) <= 0.0:
        return MaxDistanceResult(distance_km=0.0, flags=frozenset({PointFlag.NO_POSITIVE_RATE}))

    lo, hi = 0.0, 50.0
    while (value := signed_rate(hi)) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > MAX_SEARCH_KM:
            raise DomainError(f"key rate still positive beyond {MAX_SEARCH_KM} km")
    if value == 0.0:
        return MaxDistanceResult(distance_km=hi)

    root = optimize.root_scalar(signed_rate, bracket=[lo, hi], method="bisect", xtol=tol_km)
    return MaxDistanceResult(distance_km=float(root.root))


def _evaluate_point(task) -> KeyRatePoint:
    channel, distance_km, intensities, eta_s, mode = task
    return rate_at(channel, distance_km, intensities, TrustedSourceModel(eta_s), mode)


def rate_vs_distance(channel: ChannelParams, grid: SweepGrid,
                     intensities_per_eta_s: Mapping[float, float],
                     decoy: float = DEFAULT_DECOY, workers: int = 1,
                     progress_reporter: Optional[ProgressReporter] = None) -> List[KeyRatePoint]:
    """
    One KeyRatePoint per (eta_s, distance), ordered by eta_s descending then distance.

    Decoy intensities are fixed at (decoy, 0); only the signal depends on eta_s.
    """
    tasks = []
    for eta_s in sorted(grid.eta_s_values, reverse=True):
        if eta_s not in intensities_per_eta_s:
            raise DomainError(f"no signal intensity given for eta_s={eta_s}")
        intensities = signal_intensities(intensities_per_eta_s[eta_s], decoy, grid.mode)
        tasks.extend((channel, d, intensities, eta_s, grid.mode) for d in grid.distances_km)

    if progress_reporter:
        progress_reporter.start("key-rate sweep", total=len(tasks))

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = executor.map(_evaluate_point, tasks, chunksize=max(1, len(tasks) // (4 * workers)))
            points = _collect(results, progress_reporter)
    else:
        points = _collect(map(_evaluate_point, tasks), progress_reporter)

    if progress_reporter:
        progress_reporter.finish()
    return points


def _collect(results, progress_reporter: Optional[ProgressReporter]) -> List[KeyRatePoint]:
    points = []
    for point in results:
        points.append(point)
        if progress_reporter:
            progress_reporter.update_progress(len(points))
    return points
