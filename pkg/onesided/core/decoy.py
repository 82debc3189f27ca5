"""
Single-photon parameter estimation.

Exact single-photon quantities in the infinite-decoy limit, and analytic
bounds from the vacuum + weak decoy scheme (intensities mu0 = 0 < mu1 < mu2,
shared by Alice and Bob). The estimator only sees a PairStatistics table, so
closed-form and Monte Carlo statistics go through the same code.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterator, Tuple

from .error_handler import (
    DegenerateIntensityError,
    DomainError,
    EstimationFailureError,
    PointFlag,
)
from .model import (
    E0,
    BasisStatistics,
    ChannelParams,
    arm_transmittance,
    gain_qber_xx,
    gain_qber_zz,
    single_photon_truth,
)


logger = logging.getLogger("onesided.decoy")


class Basis(str, Enum):
    """Basis pair used by both parties."""
    ZZ = "ZZ"
    XX = "XX"


class EstimateMode(str, Enum):
    EXACT = "exact"
    TWO_DECOY_BOUND = "two-decoy-bound"


@dataclass(frozen=True, kw_only=True)
class IntensitySet:
    """Vacuum, weak decoy and signal mean photon numbers, passed by keyword."""
    mu1: float
    mu2: float
    mu0: float = 0.0

    def __post_init__(self):
        values = (self.mu0, self.mu1, self.mu2)
        if not all(math.isfinite(v) for v in values):
            raise DomainError(f"intensities must be finite, got {values}")
        if self.mu0 != 0.0:
            raise DomainError(f"mu0 must be the vacuum (0), got {self.mu0!r}")
        if self.mu1 <= 0.0:
            raise DomainError(f"mu1 must be > 0, got {self.mu1!r}")
        if self.mu2 == self.mu1:
            raise DegenerateIntensityError(f"mu2 and mu1 coincide at {self.mu1!r}")
        if self.mu2 < self.mu1:
            raise DomainError(f"mu2 must exceed mu1, got mu2={self.mu2!r} < mu1={self.mu1!r}")

    def __getitem__(self, index: int) -> float:
        return (self.mu0, self.mu1, self.mu2)[index]

    @property
    def signal(self) -> float:
        return self.mu2


PairKey = Tuple[Basis, int, int]
PAIR_INDICES = tuple((i, j) for i in range(3) for j in range(3))


@dataclass(frozen=True)
class PairStatistics:
    """Gain and QBER for every intensity pair (i, j) in both bases."""
    table: Dict[PairKey, BasisStatistics]

    def __post_init__(self):
        missing = [(basis.value, i, j) for basis in Basis for i, j in PAIR_INDICES
                   if (basis, i, j) not in self.table]
        if missing:
            raise DomainError(f"pair statistics incomplete, missing {missing}")

    def get(self, basis: Basis, i: int, j: int) -> BasisStatistics:
        return self.table[(Basis(basis), i, j)]

    def gain(self, basis: Basis, i: int, j: int) -> float:
        return self.get(basis, i, j).gain

    def error_gain(self, basis: Basis, i: int, j: int) -> float:
        return self.get(basis, i, j).error_gain

    def __iter__(self) -> Iterator[Tuple[PairKey, BasisStatistics]]:
        for basis in Basis:
            for i, j in PAIR_INDICES:
                key = (basis, i, j)
                yield key, self.table[key]


@dataclass(frozen=True)
class SinglePhotonEstimates:
    """Y11, e11 and Q11 (Z basis) with the direction of the bounds."""
    y11: float
    e11: float
    q11_zz: float
    mode: EstimateMode
    flags: FrozenSet[PointFlag] = field(default_factory=frozenset)

    @property
    def certified(self) -> bool:
        return PointFlag.NO_SIGNAL not in self.flags


def observe(channel: ChannelParams, distance_km: float,
            intensities: IntensitySet) -> PairStatistics:
    """Closed-form statistics table over the 9 intensity pairs and both bases."""
    arms = arm_transmittance(channel, distance_km)
    table = {}
    for i, j in PAIR_INDICES:
        mu, nu = intensities[i], intensities[j]
        table[(Basis.ZZ, i, j)] = gain_qber_zz(mu, nu, arms, channel)
        table[(Basis.XX, i, j)] = gain_qber_xx(mu, nu, arms, channel)
    return PairStatistics(table=table)


def _check_decoy_spread(intensities: IntensitySet) -> Tuple[float, float]:
    mu1, mu2 = intensities.mu1, intensities.mu2
    if mu2 == mu1:
        raise DegenerateIntensityError(f"mu2 and mu1 coincide at {mu1!r}")
    if not mu2 > mu1 > 0.0:
        raise DomainError(f"need mu2 > mu1 > 0, got mu1={mu1!r}, mu2={mu2!r}")
    return mu1, mu2


def _multi_photon_free_gain(stats: PairStatistics, basis: Basis, k: int, mu: float) -> float:
    """e^{2mu} Q_kk + Q_00 - e^{mu} Q_k0 - e^{mu} Q_0k: removes all vacuum contributions."""
    return (math.exp(2.0 * mu) * stats.gain(basis, k, k)
            + stats.gain(basis, 0, 0)
            - math.exp(mu) * stats.gain(basis, k, 0)
            - math.exp(mu) * stats.gain(basis, 0, k))


def y11_lower_unclamped(stats: PairStatistics, intensities: IntensitySet,
                        basis: Basis) -> float:
    """Two-decoy lower bound on Y11 before clamping; may be negative."""
    mu1, mu2 = _check_decoy_spread(intensities)
    basis = Basis(basis)
    weak = _multi_photon_free_gain(stats, basis, 1, mu1)
    strong = _multi_photon_free_gain(stats, basis, 2, mu2)
    return (mu2 ** 3 * weak - mu1 ** 3 * strong) / (mu2 ** 2 * mu1 ** 2 * (mu2 - mu1))


def y11_lower_two_decoy(stats: PairStatistics, intensities: IntensitySet,
                        basis: Basis) -> float:
    """
    Lower bound on the single-photon yield in the given basis, clamped to [0, 1].

    Raises:
        DegenerateIntensityError: if mu2 == mu1
    """
    raw = y11_lower_unclamped(stats, intensities, basis)
    if raw < 0.0:
        logger.debug(f"Y11 lower bound {raw:.3e} < 0 in {Basis(basis).value}, clamped to 0")
    return min(1.0, max(0.0, raw))


def e11_upper_unclamped(stats: PairStatistics, intensities: IntensitySet,
                        y11_xx: float) -> float:
    """Upper bound on the X-basis single-photon error before clamping."""
    if not y11_xx > 0.0:
        raise EstimationFailureError(
            f"no single-photon signal certified (Y11 lower bound = {y11_xx!r})"
        )
    mu1, _ = _check_decoy_spread(intensities)
    basis = Basis.XX
    # every error-gain term is taken at the weak decoy pair (mu1, nu1)
    numerator = (stats.error_gain(basis, 0, 0)
                 + math.exp(2.0 * mu1) * stats.error_gain(basis, 1, 1)
                 - math.exp(mu1) * stats.error_gain(basis, 1, 0)
                 - math.exp(mu1) * stats.error_gain(basis, 0, 1))
    return numerator / (mu1 * mu1 * y11_xx)


def e11_upper_two_decoy(stats: PairStatistics, intensities: IntensitySet,
                        y11_xx: float) -> float:
    """
    Upper bound on e11 (X basis), clamped to [0, 1].

    Raises:
        EstimationFailureError: if y11_xx <= 0
    """
    return min(1.0, max(0.0, e11_upper_unclamped(stats, intensities, y11_xx)))


def asymptotic_estimates(channel: ChannelParams, distance_km: float,
                         mu: float, nu: float) -> SinglePhotonEstimates:
    """Infinite-decoy limit: the single-photon quantities are known exactly."""
    arms = arm_transmittance(channel, distance_km)
    truth = single_photon_truth(mu, nu, arms, channel)
    return SinglePhotonEstimates(y11=truth.y11, e11=truth.e11, q11_zz=truth.q11_zz,
                                 mode=EstimateMode.EXACT)


def two_decoy_estimates(stats: PairStatistics,
                        intensities: IntensitySet) -> SinglePhotonEstimates:
    """Y11 and Q11 from the Z basis, e11 from the X basis, with clamp flags."""
    flags = set()
    mu2 = intensities.mu2

    y_zz_raw = y11_lower_unclamped(stats, intensities, Basis.ZZ)
    y_xx_raw = y11_lower_unclamped(stats, intensities, Basis.XX)
    y_zz = min(1.0, max(0.0, y_zz_raw))
    y_xx = min(1.0, max(0.0, y_xx_raw))
    if y_zz != y_zz_raw or y_xx != y_xx_raw:
        flags.add(PointFlag.CLAMPED)

    q11_zz = (mu2 * mu2) * math.exp(-(mu2 + mu2)) * y_zz

    if y_xx > 0.0 and y_zz > 0.0:
        e_raw = e11_upper_unclamped(stats, intensities, y_xx)
        e11 = min(1.0, max(0.0, e_raw))
        if e11 != e_raw:
            flags.add(PointFlag.CLAMPED)
    else:
        flags.add(PointFlag.NO_SIGNAL)
        e11 = E0

    return SinglePhotonEstimates(y11=y_zz, e11=e11, q11_zz=q11_zz,
                                 mode=EstimateMode.TWO_DECOY_BOUND, flags=frozenset(flags))
