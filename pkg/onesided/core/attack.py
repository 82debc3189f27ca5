"""
Dimension-mismatch attack on an untrusted relay.

If Alice's encoder leaks her state into a four-dimensional space where the
four BB84 preparations are orthogonal, Charlie reads her state perfectly,
measures Bob's photon in Alice's basis, and announces a Bell outcome drawn
from the pair consistent with both results. The announced statistics are
identical to an honest complete Bell-state measurement.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .error_handler import DomainError, NormalizationError
from .numerics import total_variation_distance


TOLERANCE = 1e-12
SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class QubitState:
    """Normalized qubit a|0> + b|1>."""
    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if not math.isfinite(norm) or abs(norm - 1.0) > TOLERANCE:
            raise NormalizationError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    def overlap(self, other: "QubitState") -> float:
        """|<self|other>|^2."""
        return float(abs(np.vdot(self.vector, other.vector)) ** 2)

    def with_global_phase(self, phase: float) -> "QubitState":
        factor = complex(math.cos(phase), math.sin(phase))
        return QubitState(self.alpha * factor, self.beta * factor)


class BB84(str, Enum):
    ZERO = "0"
    ONE = "1"
    PLUS = "+"
    MINUS = "-"

    @property
    def basis(self) -> str:
        return "Z" if self in (BB84.ZERO, BB84.ONE) else "X"

    @property
    def state(self) -> QubitState:
        return _BB84_STATES[self]

    @property
    def ket(self) -> str:
        return f"|{self.value}>"


_BB84_STATES = {
    BB84.ZERO: QubitState(1.0, 0.0),
    BB84.ONE: QubitState(0.0, 1.0),
    BB84.PLUS: QubitState(SQRT_HALF, SQRT_HALF),
    BB84.MINUS: QubitState(SQRT_HALF, -SQRT_HALF),
}
_BASIS_LABELS = {"Z": (BB84.ZERO, BB84.ONE), "X": (BB84.PLUS, BB84.MINUS)}


class BellState(str, Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


# rows: phi+, phi-, psi+, psi- in the |00>, |01>, |10>, |11> basis
BELL_BASIS = SQRT_HALF * np.array([
    [1, 0, 0, 1],
    [1, 0, 0, -1],
    [0, 1, 1, 0],
    [0, 1, -1, 0],
], dtype=complex)

# Bell pair supporting |a>|k> when Bob's photon is found in state k of Alice's basis
CONSISTENT_PAIRS: Dict[Tuple[BB84, BB84], Tuple[BellState, BellState]] = {
    (BB84.ZERO, BB84.ZERO): (BellState.PHI_PLUS, BellState.PHI_MINUS),
    (BB84.ONE, BB84.ONE): (BellState.PHI_PLUS, BellState.PHI_MINUS),
    (BB84.ZERO, BB84.ONE): (BellState.PSI_PLUS, BellState.PSI_MINUS),
    (BB84.ONE, BB84.ZERO): (BellState.PSI_PLUS, BellState.PSI_MINUS),
    (BB84.PLUS, BB84.PLUS): (BellState.PHI_PLUS, BellState.PSI_PLUS),
    (BB84.MINUS, BB84.MINUS): (BellState.PHI_PLUS, BellState.PSI_PLUS),
    (BB84.PLUS, BB84.MINUS): (BellState.PHI_MINUS, BellState.PSI_MINUS),
    (BB84.MINUS, BB84.PLUS): (BellState.PHI_MINUS, BellState.PSI_MINUS),
}

# orthogonal four-dimensional states Alice's encoder leaks to Charlie
LEAKED_EMBEDDING = {
    BB84.ZERO: BELL_BASIS[0],
    BB84.ONE: BELL_BASIS[1],
    BB84.PLUS: BELL_BASIS[2],
    BB84.MINUS: BELL_BASIS[3],
}


@dataclass(frozen=True)
class BellOutcomeDistribution:
    """Probabilities of phi+, phi-, psi+, psi- (in that order)."""
    probabilities: Tuple[float, float, float, float]

    def __post_init__(self):
        values = tuple(float(p) for p in self.probabilities)
        if len(values) != 4:
            raise DomainError(f"expected 4 Bell outcomes, got {len(values)}")
        if any(p < -TOLERANCE for p in values):
            raise NormalizationError(f"negative probability in {values}")
        if abs(sum(values) - 1.0) > TOLERANCE:
            raise NormalizationError(f"probabilities sum to {sum(values)!r}, expected 1")
        object.__setattr__(self, "probabilities", tuple(max(p, 0.0) for p in values))

    def __getitem__(self, outcome: BellState) -> float:
        return self.probabilities[list(BellState).index(BellState(outcome))]

    @property
    def support(self) -> Tuple[BellState, ...]:
        return tuple(b for b, p in zip(BellState, self.probabilities) if p > TOLERANCE)

    def to_dict(self) -> Dict[str, float]:
        return {b.value: p for b, p in zip(BellState, self.probabilities)}


def _as_state(state) -> QubitState:
    return state.state if isinstance(state, BB84) else state


def genuine_bsm_distribution(a: QubitState, b: QubitState) -> BellOutcomeDistribution:
    """Outcome probabilities |<Bell_i|a (x) b>|^2 of a complete Bell-state measurement."""
    a, b = _as_state(a), _as_state(b)
    amplitudes = BELL_BASIS.conj() @ np.kron(a.vector, b.vector)
    return BellOutcomeDistribution(tuple(np.abs(amplitudes) ** 2))


def attack_distribution(alice: BB84, bob: QubitState,
                        split: Tuple[float, float] = (0.5, 0.5)) -> BellOutcomeDistribution:
    """
    Announcements of a Charlie who knows Alice's state.

    Bob's photon is measured in Alice's basis; the result k selects the Bell
    pair consistent with |alice>|k>, and Charlie announces its first or second
    member with probabilities `split`.
    """
    alice = BB84(alice)
    bob = _as_state(bob)
    first, second = (float(s) for s in split)
    if first < 0.0 or second < 0.0 or abs(first + second - 1.0) > TOLERANCE:
        raise NormalizationError(f"split must be a probability pair, got {split}")

    probabilities = dict.fromkeys(BellState, 0.0)
    for outcome in _BASIS_LABELS[alice.basis]:
        p_outcome = outcome.state.overlap(bob)
        pair = CONSISTENT_PAIRS[(alice, outcome)]
        probabilities[pair[0]] += first * p_outcome
        probabilities[pair[1]] += second * p_outcome
    return BellOutcomeDistribution(tuple(probabilities[b] for b in BellState))


def charlie_guess_probability(embedding: Optional[Sequence[np.ndarray]] = None) -> float:
    """
    Probability that Charlie identifies which of the equiprobable states he received.

    Uses the square-root measurement: P = (1/n) sum_i (sqrt(G))_ii^2 for the
    Gram matrix G, which is 1 for orthogonal states.
    """
    if embedding is None:
        embedding = [LEAKED_EMBEDDING[label] for label in BB84]
    vectors = np.array([np.asarray(v, dtype=complex) for v in embedding])
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(np.abs(norms - 1.0) > TOLERANCE):
        raise NormalizationError(f"embedding vectors are not normalized: {norms}")

    gram = vectors.conj() @ vectors.T
    eigenvalues, eigenvectors = np.linalg.eigh(gram)
    root = eigenvectors @ np.diag(np.sqrt(np.clip(eigenvalues, 0.0, None))) @ eigenvectors.conj().T
    return float(np.mean(np.abs(np.diag(root)) ** 2))


@dataclass(frozen=True)
class AttackReportRow:
    alice: BB84
    bob: BB84
    genuine: BellOutcomeDistribution
    attack: BellOutcomeDistribution
    tv_distance: float
    mz_plus: float     # Charlie's measurement of Bob agrees with Alice's state
    mz_minus: float

    @property
    def possible_clicks(self) -> Tuple[BellState, ...]:
        return self.genuine.support


@dataclass(frozen=True)
class AttackReport:
    rows: List[AttackReportRow]
    guess_probability: float
    tolerance: float = TOLERANCE

    @property
    def max_tv_distance(self) -> float:
        return max(row.tv_distance for row in self.rows)

    @property
    def knowledge_complete(self) -> bool:
        return self.guess_probability >= 1.0 - self.tolerance

    @property
    def passed(self) -> bool:
        return self.max_tv_distance <= self.tolerance and self.knowledge_complete


def attack_indistinguishability_report(split: Tuple[float, float] = (0.5, 0.5)) -> AttackReport:
    """Genuine vs attack distributions for all 16 BB84 input pairs."""
    rows = []
    for alice in BB84:
        for bob in BB84:
            genuine = genuine_bsm_distribution(alice.state, bob.state)
            attack = attack_distribution(alice, bob.state, split)
            mz_plus = alice.state.overlap(bob.state)
            rows.append(AttackReportRow(
                alice=alice, bob=bob, genuine=genuine, attack=attack,
                tv_distance=total_variation_distance(genuine.probabilities, attack.probabilities),
                mz_plus=mz_plus, mz_minus=1.0 - mz_plus,
            ))
    return AttackReport(rows=rows, guess_probability=charlie_guess_probability())
