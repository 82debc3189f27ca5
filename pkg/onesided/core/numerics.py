"""
Special functions and entropy primitives.

I0 is evaluated through the exponentially scaled form e^{-|x|} I0(x)
(`scipy.special.i0e`, Chebyshev expansions on [0, 8] and [8, inf)), so there is
no hand-written asymptotic seam to keep continuous. I0(x) - 1 switches from a
direct power series to I0(x) - 1 at |x| = 2.
"""

import math
from typing import Sequence

import numpy as np
from scipy import special

from .error_handler import DomainError


BESSEL_ARG_LIMIT = 700.0
I0M1_SERIES_LIMIT = 2.0
SERIES_EPS = 1e-17
LN2 = math.log(2.0)


def check_probability(name: str, value: float) -> float:
    """Return `value` as float, or raise DomainError if it is not in [0, 1]."""
    value = float(value)
    if not math.isfinite(value) or value < 0.0 or value > 1.0:
        raise DomainError(f"{name} must be a probability in [0, 1], got {value!r}")
    return value


def check_non_negative(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0:
        raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
    return value


def _check_bessel_argument(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"Bessel argument must be finite, got {x!r}")
    if abs(x) > BESSEL_ARG_LIMIT:
        raise DomainError(f"|x| = {abs(x)} exceeds the overflow guard {BESSEL_ARG_LIMIT}")
    return x


def bessel_i0e(x: float) -> float:
    """Exponentially scaled modified Bessel function e^{-|x|} I0(x)."""
    return float(special.i0e(_check_bessel_argument(x)))


def bessel_i0(x: float) -> float:
    """
    Modified Bessel function of the first kind, order zero.

    Raises:
        DomainError: for non-finite x or |x| > 700
    """
    x = _check_bessel_argument(x)
    return float(special.i0e(x)) * math.exp(abs(x))


def bessel_i0m1(x: float) -> float:
    """
    I0(x) - 1 without cancellation for small x.

    Below |x| = I0M1_SERIES_LIMIT the power series sum_{k>=1} (x^2/4)^k / (k!)^2
    is summed directly; above it I0(x) >= 2.28 and the subtraction is exact enough.
    """
    x = _check_bessel_argument(x)
    if abs(x) > I0M1_SERIES_LIMIT:
        return bessel_i0(x) - 1.0
    quarter = 0.25 * x * x
    term = total = quarter
    k = 1
    while term > SERIES_EPS * total:
        k += 1
        term *= quarter / (k * k)
        total += term
    return total


def binary_entropy(p: float) -> float:
    """
    Binary Shannon entropy h(p) in bits, with h(0) = h(1) = 0.

    Raises:
        DomainError: if p is outside [0, 1]
    """
    p = check_probability("p", p)
    return float(special.entr(p) + special.entr(1.0 - p)) / LN2


def total_variation_distance(p: Sequence[float], q: Sequence[float]) -> float:
    """Half the L1 distance between two discrete distributions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DomainError(f"distributions have different supports: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())
