"""
Pulse-level Monte Carlo simulation of the relay.

Alice and Bob send phase-randomized weak coherent pulses in BB84
polarization states. The pulses cross lossy arms, interfere on a 50/50 beam
splitter and hit four threshold detectors behind polarizing beam splitters:

    D1 = c_H, D2 = c_V, D3 = d_H, D4 = d_V

Given the random phases every output mode is a coherent state, so photon
numbers are drawn per detector from a Poisson law and dark counts are added
independently. Misalignment flips the polarization of Bob's pulse inside the
channel. Nothing here evaluates the closed-form gains; the module exists to
check them.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, List, Mapping, Optional, Sequence, Union

import numpy as np

from .error_handler import DomainError
from .numerics import check_non_negative
from .model import (
    E0,
    ArmEfficiencies,
    BasisStatistics,
    ChannelParams,
    arm_transmittance,
    gain_qber_xx,
    gain_qber_zz,
)
from .decoy import PAIR_INDICES, Basis, IntensitySet, PairStatistics
from .progress_reporter import ProgressReporter


logger = logging.getLogger("onesided.montecarlo")

DEFAULT_BLOCK_SIZE = 1 << 18
VALIDATION_DISTANCES_KM = (0.0, 50.0, 100.0)
SQRT_HALF = math.sqrt(0.5)

Seed = Union[int, Sequence[int], np.random.SeedSequence]


class Encoding(str, Enum):
    """Preparation basis of a single party."""
    Z = "Z"
    X = "X"


class Detector(int, Enum):
    D1 = 1
    D2 = 2
    D3 = 4
    D4 = 8


class Announcement(str, Enum):
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"
    FAILURE = "failure"


_FAILURE, _PSI_PLUS, _PSI_MINUS = 0, 1, 2
_CODE_TO_ANNOUNCEMENT = {
    _FAILURE: Announcement.FAILURE,
    _PSI_PLUS: Announcement.PSI_PLUS,
    _PSI_MINUS: Announcement.PSI_MINUS,
}
_ANNOUNCEMENT_TO_CODE = {announcement: code for code, announcement in _CODE_TO_ANNOUNCEMENT.items()}
_PSI_MINUS_PATTERNS = (Detector.D1 | Detector.D4, Detector.D2 | Detector.D3)
_PSI_PLUS_PATTERNS = (Detector.D1 | Detector.D2, Detector.D3 | Detector.D4)
_DETECTOR_WEIGHTS = np.array([d.value for d in Detector])


@dataclass(frozen=True)
class PulsePairSpec:
    """Intensities, bases and bits of one pulse pair."""
    intensity_a: float
    intensity_b: float
    basis_a: Encoding = Encoding.Z
    basis_b: Encoding = Encoding.Z
    bit_a: int = 0
    bit_b: int = 0

    def __post_init__(self):
        check_non_negative("intensity_a", self.intensity_a)
        check_non_negative("intensity_b", self.intensity_b)
        if self.bit_a not in (0, 1) or self.bit_b not in (0, 1):
            raise DomainError(f"bits must be 0 or 1, got ({self.bit_a!r}, {self.bit_b!r})")
        object.__setattr__(self, "basis_a", Encoding(self.basis_a))
        object.__setattr__(self, "basis_b", Encoding(self.basis_b))


def _sifted_errors(basis_code: int, same: np.ndarray, announced: np.ndarray) -> np.ndarray:
    """
    Error mask for sifted pairs. Bob flips his bit except after psi+ in the
    X basis, so an error is unequal bits in that one case and equal bits otherwise.
    """
    if basis_code == 0:
        return same
    return np.where(announced == _PSI_PLUS, ~same, same)


@dataclass(frozen=True)
class ClickRecord:
    """Detectors that fired on one pulse pair and the relay's announcement."""
    detectors: FrozenSet[Detector]
    announcement: Announcement

    @property
    def success(self) -> bool:
        return self.announcement is not Announcement.FAILURE

    def sifted_error(self, spec: PulsePairSpec) -> Optional[bool]:
        """Whether Bob's flipped bit disagrees with Alice's; None if not sifted or not successful."""
        if not self.success or spec.basis_a != spec.basis_b:
            return None
        code = 0 if spec.basis_a is Encoding.Z else 1
        wrong = _sifted_errors(code, np.array([spec.bit_a == spec.bit_b]),
                               np.array([_ANNOUNCEMENT_TO_CODE[self.announcement]]))
        return bool(wrong[0])


@dataclass(frozen=True)
class PulseDistribution:
    """
    How pulse pairs are drawn: fixed intensities, uniform random bits, and
    either one fixed basis pair or uniformly random bases followed by sifting.
    """
    intensity_a: float
    intensity_b: float
    basis: Optional[Basis] = None

    def __post_init__(self):
        check_non_negative("intensity_a", self.intensity_a)
        check_non_negative("intensity_b", self.intensity_b)
        if self.basis is not None:
            object.__setattr__(self, "basis", Basis(self.basis))


@dataclass(frozen=True)
class BasisCounts:
    """Trials, successes and errors of one sifted basis pair."""
    trials: int = 0
    successes: int = 0
    errors: int = 0

    def __post_init__(self):
        if not 0 <= self.errors <= self.successes <= self.trials:
            raise DomainError(f"need errors <= successes <= trials, got {self}")

    def __add__(self, other: "BasisCounts") -> "BasisCounts":
        return BasisCounts(self.trials + other.trials, self.successes + other.successes,
                           self.errors + other.errors)

    @property
    def gain(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def qber(self) -> float:
        return self.errors / self.successes if self.successes else E0

    @property
    def gain_stderr(self) -> float:
        q = self.gain
        return math.sqrt(q * (1.0 - q) / self.trials) if self.trials else 0.0

    @property
    def qber_stderr(self) -> float:
        if not self.successes:
            return 0.0
        e = self.qber
        return math.sqrt(e * (1.0 - e) / self.successes)

    def to_basis_statistics(self) -> BasisStatistics:
        return BasisStatistics(gain=self.gain, qber=self.qber, empty=self.successes == 0)


@dataclass(frozen=True)
class EmpiricalStatistics:
    """Counts per sifted basis pair, plus every simulated pulse pair sifted or not."""
    counts: Mapping[Basis, BasisCounts] = field(
        default_factory=lambda: {basis: BasisCounts() for basis in Basis}
    )
    pulse_pairs: int = 0

    def __getitem__(self, basis: Basis) -> BasisCounts:
        return self.counts[Basis(basis)]

    def merge(self, other: "EmpiricalStatistics") -> "EmpiricalStatistics":
        return EmpiricalStatistics({basis: self[basis] + other[basis] for basis in Basis},
                                   pulse_pairs=self.pulse_pairs + other.pulse_pairs)

    @property
    def total_trials(self) -> int:
        return self.pulse_pairs

    @property
    def sifted_trials(self) -> int:
        return sum(c.trials for c in self.counts.values())


@dataclass(frozen=True)
class AgreementCheck:
    """One empirical quantity compared with its closed-form value."""
    basis: Basis
    quantity: str
    empirical: float
    expected: float
    stderr: float
    z_score: float
    passed: bool


def _polarization(basis: np.ndarray, bit: np.ndarray):
    """H and V amplitudes of the BB84 states; basis 0 is Z, 1 is X."""
    is_z = basis == 0
    h = np.where(is_z, 1.0 - bit, SQRT_HALF)
    v = np.where(is_z, bit.astype(float), SQRT_HALF * (1.0 - 2.0 * bit))
    return h, v


def _detector_clicks(intensity_a: float, intensity_b: float, arms: ArmEfficiencies,
                     params: ChannelParams, basis_a: np.ndarray, basis_b: np.ndarray,
                     bit_a: np.ndarray, bit_b: np.ndarray,
                     rng: np.random.Generator) -> np.ndarray:
    """Boolean (n, 4) click matrix for D1..D4."""
    n = bit_a.shape[0]
    phase_a = rng.uniform(0.0, 2.0 * math.pi, n)
    phase_b = rng.uniform(0.0, 2.0 * math.pi, n)
    misaligned = rng.random(n) < params.e_d

    alpha = math.sqrt(intensity_a * arms.eta_a) * np.exp(1j * phase_a)
    beta = math.sqrt(intensity_b * arms.eta_b) * np.exp(1j * phase_b)
    h_a, v_a = _polarization(basis_a, bit_a)
    h_b, v_b = _polarization(basis_b, bit_b ^ misaligned)

    a_h, a_v = alpha * h_a, alpha * v_a
    b_h, b_v = beta * h_b, beta * v_b
    modes = np.stack([a_h + b_h, a_v + b_v, a_h - b_h, a_v - b_v], axis=1) * SQRT_HALF

    photons = rng.poisson(np.abs(modes) ** 2)
    dark = rng.random((n, 4)) < params.p_d
    return (photons > 0) | dark


def _announce(clicks: np.ndarray) -> np.ndarray:
    pattern = clicks.astype(np.int64) @ _DETECTOR_WEIGHTS
    return np.select(
        [np.isin(pattern, [int(p) for p in _PSI_MINUS_PATTERNS]),
         np.isin(pattern, [int(p) for p in _PSI_PLUS_PATTERNS])],
        [_PSI_MINUS, _PSI_PLUS],
        default=_FAILURE,
    )


def simulate_pulse_pair(spec: PulsePairSpec, arms: ArmEfficiencies, params: ChannelParams,
                        rng: np.random.Generator) -> ClickRecord:
    """Simulate one pulse pair and return the fired detectors and the announcement."""
    basis_a = np.array([0 if spec.basis_a is Encoding.Z else 1])
    basis_b = np.array([0 if spec.basis_b is Encoding.Z else 1])
    clicks = _detector_clicks(spec.intensity_a, spec.intensity_b, arms, params,
                              basis_a, basis_b,
                              np.array([spec.bit_a]), np.array([spec.bit_b]), rng)
    fired = frozenset(d for d, hit in zip(Detector, clicks[0]) if hit)
    return ClickRecord(detectors=fired, announcement=_CODE_TO_ANNOUNCEMENT[int(_announce(clicks)[0])])


def _simulate_block(source: PulseDistribution, arms: ArmEfficiencies, params: ChannelParams,
                    n: int, seed: np.random.SeedSequence) -> EmpiricalStatistics:
    rng = np.random.default_rng(seed)
    bit_a = rng.integers(0, 2, n)
    bit_b = rng.integers(0, 2, n)
    if source.basis is None:
        basis_a = rng.integers(0, 2, n)
        basis_b = rng.integers(0, 2, n)
    else:
        code = 0 if source.basis is Basis.ZZ else 1
        basis_a = np.full(n, code)
        basis_b = np.full(n, code)

    clicks = _detector_clicks(source.intensity_a, source.intensity_b, arms, params,
                              basis_a, basis_b, bit_a, bit_b, rng)
    announced = _announce(clicks)
    success = announced != _FAILURE
    same = bit_a == bit_b

    counts = {}
    for basis, code in ((Basis.ZZ, 0), (Basis.XX, 1)):
        sifted = (basis_a == code) & (basis_b == code)
        wrong = _sifted_errors(code, same, announced)
        hits = sifted & success
        counts[basis] = BasisCounts(trials=int(sifted.sum()), successes=int(hits.sum()),
                                    errors=int((hits & wrong).sum()))
    return EmpiricalStatistics(counts, pulse_pairs=n)


def estimate_statistics(source: PulseDistribution, n_trials: int, arms: ArmEfficiencies,
                        params: ChannelParams, seed: Seed,
                        block_size: int = DEFAULT_BLOCK_SIZE, workers: int = 1,
                        progress_reporter: Optional[ProgressReporter] = None) -> EmpiricalStatistics:
    """
    Simulate n_trials pulse pairs drawn from `source`.

    Trials are split into fixed-size blocks, each with its own child of the
    seed sequence, so results depend only on (seed, block_size) and not on
    `workers`.
    """
    if n_trials < 1:
        raise DomainError(f"n_trials must be >= 1, got {n_trials!r}")
    if block_size < 1:
        raise DomainError(f"block_size must be >= 1, got {block_size!r}")

    n_blocks, remainder = divmod(int(n_trials), int(block_size))
    sizes = [block_size] * n_blocks + ([remainder] if remainder else [])
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(len(sizes))

    if progress_reporter:
        progress_reporter.start("Monte Carlo blocks", total=len(sizes))

    run = lambda size, child: _simulate_block(source, arms, params, size, child)
    total = EmpiricalStatistics()
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            blocks = executor.map(run, sizes, children)
            for done, block in enumerate(blocks, start=1):
                total = total.merge(block)
                if progress_reporter:
                    progress_reporter.update_progress(done)
    else:
        for done, (size, child) in enumerate(zip(sizes, children), start=1):
            total = total.merge(run(size, child))
            if progress_reporter:
                progress_reporter.update_progress(done)

    if progress_reporter:
        progress_reporter.finish()
    logger.debug(f"simulated {n_trials} pulse pairs in {len(sizes)} blocks")
    return total


def observe_monte_carlo(channel: ChannelParams, distance_km: float, intensities: IntensitySet,
                        n_trials: int, seed: int, block_size: int = DEFAULT_BLOCK_SIZE,
                        workers: int = 1) -> PairStatistics:
    """
    Empirical statistics table for the decoy estimator.

    Every (basis, i, j) entry gets n_trials pulse pairs from its own stream
    seeded with (seed, basis, i, j).
    """
    arms = arm_transmittance(channel, distance_km)
    table = {}
    for basis_index, basis in enumerate(Basis):
        for i, j in PAIR_INDICES:
            source = PulseDistribution(intensities[i], intensities[j], basis)
            empirical = estimate_statistics(source, n_trials, arms, channel,
                                            seed=[int(seed), basis_index, i, j],
                                            block_size=block_size, workers=workers)
            table[(basis, i, j)] = empirical[basis].to_basis_statistics()
    return PairStatistics(table=table)


def _check(basis: Basis, quantity: str, empirical: float, expected: float,
           stderr: float, sigmas: float) -> AgreementCheck:
    deviation = empirical - expected
    if stderr > 0.0:
        z_score = deviation / stderr
    else:
        z_score = 0.0 if deviation == 0.0 else math.copysign(math.inf, deviation)
    return AgreementCheck(basis=basis, quantity=quantity, empirical=empirical, expected=expected,
                          stderr=stderr, z_score=z_score, passed=abs(z_score) <= sigmas)


def _binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n) if n else 0.0


def compare_with_model(empirical: EmpiricalStatistics, model: Mapping[Basis, BasisStatistics],
                       sigmas: float = 3.0) -> List[AgreementCheck]:
    """
    Gain and QBER z-scores for every basis present in `model`.

    The standard errors use the closed-form probabilities, so a handful of
    successes with zero observed errors is not scored as an infinite deviation.
    """
    checks = []
    for basis, expected in model.items():
        counts = empirical[basis]
        checks.append(_check(Basis(basis), "gain", counts.gain, expected.gain,
                             _binomial_stderr(expected.gain, counts.trials), sigmas))
        if counts.successes:
            checks.append(_check(Basis(basis), "qber", counts.qber, expected.qber,
                                 _binomial_stderr(expected.qber, counts.successes), sigmas))
    return checks


@dataclass(frozen=True)
class ConfigurationCheck:
    """Model-vs-simulation agreement at one (distance, basis) configuration."""
    distance_km: float
    basis: Basis
    checks: List[AgreementCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


@dataclass(frozen=True)
class ValidationReport:
    configurations: List[ConfigurationCheck]
    allowed_failures: int = 1

    @property
    def failures(self) -> int:
        return sum(not c.passed for c in self.configurations)

    @property
    def passed(self) -> bool:
        return self.failures <= self.allowed_failures


def cross_validate(channel: ChannelParams, mu: float, n_trials: int, seed: int,
                   distances_km: Sequence[float] = VALIDATION_DISTANCES_KM,
                   simulator_channel: Optional[ChannelParams] = None,
                   sigmas: float = 3.0, allowed_failures: int = 1,
                   block_size: int = DEFAULT_BLOCK_SIZE, workers: int = 1,
                   progress_reporter: Optional[ProgressReporter] = None) -> ValidationReport:
    """
    Compare simulated and closed-form Z and X statistics at each distance.

    `simulator_channel` lets the simulation run with different parameters
    than the closed forms it is checked against.
    """
    simulator_channel = simulator_channel or channel
    closed_forms = {Basis.ZZ: gain_qber_zz, Basis.XX: gain_qber_xx}
    configurations = []
    for index, distance_km in enumerate(distances_km):
        model_arms = arm_transmittance(channel, distance_km)
        sim_arms = arm_transmittance(simulator_channel, distance_km)
        for basis_index, basis in enumerate(Basis):
            expected = closed_forms[basis](mu, mu, model_arms, channel)
            empirical = estimate_statistics(PulseDistribution(mu, mu, basis), n_trials, sim_arms,
                                            simulator_channel, seed=[int(seed), index, basis_index],
                                            block_size=block_size, workers=workers,
                                            progress_reporter=progress_reporter)
            checks = compare_with_model(empirical, {basis: expected}, sigmas)
            configurations.append(ConfigurationCheck(float(distance_km), basis, checks))
            if not configurations[-1].passed:
                logger.warning(f"Monte Carlo disagrees with the model at L={distance_km} km, {basis.value}")
    return ValidationReport(configurations=configurations, allowed_failures=allowed_failures)
