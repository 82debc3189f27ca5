"""
Secret key rates: single-photon rate, decoy-state rate with the GLLP split,
and the trustworthiness adjustment for Alice's uncharacterized encoder.

The key is extracted from Z-basis data; the X basis only serves phase-error
estimation.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet

from .error_handler import DomainError, PointFlag
from .numerics import binary_entropy, check_probability
from .model import E0, ChannelParams, arm_transmittance, gain_qber_zz
from .decoy import (
    IntensitySet,
    SinglePhotonEstimates,
    asymptotic_estimates,
    observe,
    two_decoy_estimates,
)


logger = logging.getLogger("onesided.keyrate")


class RateMode(str, Enum):
    ASYMPTOTIC = "asymptotic"
    TWO_DECOY = "two-decoy"


@dataclass(frozen=True)
class TrustedSourceModel:
    """Probability that Alice's encoder emits the intended BB84 state."""
    eta_s: float = 1.0

    def __post_init__(self):
        check_probability("eta_s", self.eta_s)


@dataclass(frozen=True)
class KeyRatePoint:
    """One evaluated point of a key-rate curve (bits per pulse pair)."""
    distance_km: float
    mu: float
    nu: float
    eta_s: float
    mode: RateMode
    rate: float
    signed_rate: float
    flags: FrozenSet[PointFlag] = field(default_factory=frozenset)


def apply_source_trust(e: float, trust: TrustedSourceModel) -> float:
    """Mix an error rate with white noise: eta_s * e + (1 - eta_s) / 2."""
    e = check_probability("e", e)
    return trust.eta_s * e + (1.0 - trust.eta_s) * E0


def secret_key_rate(q11_zz: float, e11_xx: float, q_sig_zz: float,
                    e_sig_zz: float, f: float) -> float:
    """
    R = Q11 (1 - H(e11)) - Q f H(E), not floored.

    Raises:
        DomainError: on out-of-range probabilities or f < 1
    """
    q11_zz = check_probability("q11_zz", q11_zz)
    q_sig_zz = check_probability("q_sig_zz", q_sig_zz)
    if not f >= 1.0:
        raise DomainError(f"f must be >= 1, got {f!r}")
    return (q11_zz * (1.0 - binary_entropy(e11_xx))
            - q_sig_zz * f * binary_entropy(e_sig_zz))


def single_photon_rate(e1: float, e2: float) -> float:
    """Rate 1 - h(e1) - h(e2) of the single-photon protocol."""
    return 1.0 - binary_entropy(e1) - binary_entropy(e2)


def _single_photon_estimates(channel: ChannelParams, distance_km: float,
                             intensities: IntensitySet, mode: RateMode) -> SinglePhotonEstimates:
    if mode is RateMode.ASYMPTOTIC:
        return asymptotic_estimates(channel, distance_km, intensities.signal, intensities.signal)
    return two_decoy_estimates(observe(channel, distance_km, intensities), intensities)


def rate_at(channel: ChannelParams, distance_km: float, intensities: IntensitySet,
            trust: TrustedSourceModel, mode: RateMode = RateMode.ASYMPTOTIC) -> KeyRatePoint:
    """
    Key rate at one distance with signal intensity mu = nu = intensities.mu2.

    Error rates above 1/2 carry no secrecy, so the single-photon term uses
    min(e11', 1/2); without a certified single-photon signal it is zero.
    """
    mode = RateMode(mode)
    mu = intensities.signal
    estimates = _single_photon_estimates(channel, distance_km, intensities, mode)
    signal = gain_qber_zz(mu, mu, arm_transmittance(channel, distance_km), channel)

    flags = set(estimates.flags)
    if signal.empty:
        flags.add(PointFlag.EMPTY)

    e_sig = apply_source_trust(signal.qber, trust)
    if estimates.certified:
        e11 = min(apply_source_trust(estimates.e11, trust), E0)
        q11 = estimates.q11_zz
    else:
        e11, q11 = E0, 0.0

    signed = secret_key_rate(q11, e11, signal.gain, e_sig, channel.f)
    rate = max(signed, 0.0)
    if signed < 0.0:
        flags.add(PointFlag.FLOORED)

    return KeyRatePoint(distance_km=float(distance_km), mu=mu, nu=mu, eta_s=trust.eta_s,
                        mode=mode, rate=rate, signed_rate=signed, flags=frozenset(flags))
