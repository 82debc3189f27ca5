"""
Closed-form channel statistics without eavesdropping.

Gains and QBERs for phase-randomized weak coherent pulses sent by Alice and
Bob to a linear-optics Bell-state measurement with threshold detectors.
All expressions keep the e^{-omega/2} factors in exponential form and use
I0(x) - 1 and expm1 so that gains at small intensities carry full precision.
"""

import math
from dataclasses import dataclass
from typing import Tuple

from .error_handler import DomainError
from .numerics import bessel_i0m1, check_non_negative, check_probability


E0 = 0.5


@dataclass(frozen=True)
class ChannelParams:
    """Physical parameters of the experiment (defaults: the reference fiber setup)."""
    eta_d: float = 0.40   # detector efficiency
    e_d: float = 0.015    # misalignment error probability
    p_d: float = 3e-6     # dark count probability per detector per gate
    f: float = 1.16       # error-correction inefficiency
    alpha: float = 0.2    # fiber loss, dB/km

    def __post_init__(self):
        check_probability("eta_d", self.eta_d)
        check_probability("e_d", self.e_d)
        check_probability("p_d", self.p_d)
        if not math.isfinite(self.f) or self.f < 1.0:
            raise DomainError(f"f must be >= 1, got {self.f!r}")
        if not math.isfinite(self.alpha) or self.alpha <= 0.0:
            raise DomainError(f"alpha must be > 0, got {self.alpha!r}")


@dataclass(frozen=True)
class ArmEfficiencies:
    """Total efficiency (channel x detector) of Alice's and Bob's arms."""
    eta_a: float
    eta_b: float

    def __post_init__(self):
        check_probability("eta_a", self.eta_a)
        check_probability("eta_b", self.eta_b)


@dataclass(frozen=True)
class BasisStatistics:
    """Gain Q and QBER E of one basis at one intensity pair."""
    gain: float
    qber: float
    empty: bool = False

    def __post_init__(self):
        check_probability("gain", self.gain)
        check_probability("qber", self.qber)

    @property
    def error_gain(self) -> float:
        """E * Q, the rate of erroneous successful events."""
        return self.qber * self.gain


@dataclass(frozen=True)
class SinglePhotonTruth:
    """Single-photon yield, X-basis error and Z-basis gain of the honest model."""
    y11: float
    e11: float
    q11_zz: float


def arm_transmittance(params: ChannelParams, distance_km: float) -> ArmEfficiencies:
    """
    Symmetric arm efficiencies for a total Alice-Bob distance.

    Charlie sits at the midpoint, so each arm spans L/2 and the loss exponent
    is alpha * L / 20.
    """
    distance_km = float(distance_km)
    if not math.isfinite(distance_km) or distance_km < 0.0:
        raise DomainError(f"distance must be >= 0 km, got {distance_km!r}")
    eta = params.eta_d * 10.0 ** (-params.alpha * distance_km / 20.0)
    return ArmEfficiencies(eta_a=eta, eta_b=eta)


def _photon_numbers(mu: float, nu: float, arms: ArmEfficiencies) -> Tuple[float, float]:
    mu = check_non_negative("mu", mu)
    nu = check_non_negative("nu", nu)
    return mu * arms.eta_a, nu * arms.eta_b


def _clip_unit(value: float) -> float:
    return min(1.0, max(0.0, value))


def gain_qber_xx(mu: float, nu: float, arms: ArmEfficiencies,
                 params: ChannelParams) -> BasisStatistics:
    """
    X-basis gain and QBER.

    Q = 2y^2 (1 + 2y^2 - 4y I0(x) + I0(2x)), written as
    2y^2 (2(1-y)^2 + [I0(2x)-1] - 4y [I0(x)-1]) to avoid cancellation, and
    EQ = e0 Q - 2(e0 - e_d) y^2 (I0(2x) - 1).
    """
    a, b = _photon_numbers(mu, nu, arms)
    p = params.p_d
    omega = a + b
    two_x = math.sqrt(a * b)

    decay = math.exp(-omega / 4.0)
    y = (1.0 - p) * decay
    one_minus_y = -math.expm1(-omega / 4.0) + p * decay
    y2 = y * y

    i0m1_2x = bessel_i0m1(two_x)
    bracket = 2.0 * one_minus_y ** 2 + i0m1_2x - 4.0 * y * bessel_i0m1(0.5 * two_x)
    gain = _clip_unit(2.0 * y2 * max(0.0, bracket))
    if gain == 0.0:
        return BasisStatistics(gain=0.0, qber=E0, empty=True)

    qber = E0 - 2.0 * (E0 - params.e_d) * y2 * i0m1_2x / gain
    return BasisStatistics(gain=gain, qber=_clip_unit(qber))


def false_bsm_split(mu: float, nu: float, arms: ArmEfficiencies,
                    params: ChannelParams) -> Tuple[float, float]:
    """Z-basis gains (Q_C, Q_E) from correct and false Bell-state announcements."""
    a, b = _photon_numbers(mu, nu, arms)
    p = params.p_d
    omega = a + b
    prefactor = 2.0 * (1.0 - p) ** 2 * math.exp(-omega / 2.0)

    click_a = -math.expm1(-a / 2.0) + p * math.exp(-a / 2.0)
    click_b = -math.expm1(-b / 2.0) + p * math.exp(-b / 2.0)
    q_c = prefactor * click_a * click_b

    # I0(2x) - (1 - p) e^{-omega/2}
    coincidence = bessel_i0m1(math.sqrt(a * b)) - math.expm1(-omega / 2.0) + p * math.exp(-omega / 2.0)
    q_e = p * prefactor * coincidence
    return max(0.0, q_c), max(0.0, q_e)


def gain_qber_zz(mu: float, nu: float, arms: ArmEfficiencies,
                 params: ChannelParams) -> BasisStatistics:
    """Z-basis gain Q = Q_C + Q_E and QBER E = (e_d Q_C + (1 - e_d) Q_E) / Q."""
    q_c, q_e = false_bsm_split(mu, nu, arms, params)
    gain = _clip_unit(q_c + q_e)
    if gain == 0.0:
        return BasisStatistics(gain=0.0, qber=E0, empty=True)

    e_d = params.e_d
    qber = e_d * (q_c / gain) + (1.0 - e_d) * (q_e / gain)
    return BasisStatistics(gain=gain, qber=_clip_unit(qber))


def single_photon_truth(mu: float, nu: float, arms: ArmEfficiencies,
                        params: ChannelParams) -> SinglePhotonTruth:
    """Exact Y11, e11 (X basis) and Q11 (Z basis) of the honest channel."""
    mu = check_non_negative("mu", mu)
    nu = check_non_negative("nu", nu)
    eta_a, eta_b = arms.eta_a, arms.eta_b
    p = params.p_d
    survive = (1.0 - p) ** 2

    coincidence = eta_a * eta_b / 2.0
    y11 = survive * (coincidence
                     + (2.0 * eta_a + 2.0 * eta_b - 3.0 * eta_a * eta_b) * p
                     + 4.0 * (1.0 - eta_a) * (1.0 - eta_b) * p * p)

    if y11 > 0.0:
        # share of the yield coming from genuine two-photon coincidences
        weight = survive * coincidence / y11
        e11 = params.e_d * weight + E0 * (1.0 - weight)
    else:
        e11 = E0

    q11_zz = (mu * nu) * math.exp(-(mu + nu)) * y11
    return SinglePhotonTruth(y11=_clip_unit(y11), e11=_clip_unit(e11), q11_zz=_clip_unit(q11_zz))
