import math

import pytest

from onesided.core.error_handler import DomainError
from onesided.core.numerics import (
    bessel_i0,
    bessel_i0e,
    bessel_i0m1,
    binary_entropy,
    total_variation_distance,
)

from oracle import h, i0_series, i0m1_series


def test_bessel_i0_at_zero():
    assert bessel_i0(0.0) == 1.0


@pytest.mark.parametrize("x", [1e-3, 0.09, 0.5, 1.0, 5.0, 10.0, 15.0, 20.0, 30.0])
def test_bessel_i0_matches_series(x):
    assert bessel_i0(x) == pytest.approx(i0_series(x), rel=1e-12)


def test_bessel_i0_is_even_and_at_least_one():
    for x in [0.1, 1.0, 5.0, 42.0]:
        assert bessel_i0(-x) == bessel_i0(x)
        assert bessel_i0(x) >= 1.0


def test_bessel_i0_monotone_on_positive_axis():
    xs = [0.05 * k for k in range(0, 600)]
    values = [bessel_i0(x) for x in xs]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_bessel_i0_continuous_across_scaling_regimes():
    # i0e switches Chebyshev expansions at |x| = 8
    below, above = bessel_i0(8.0 - 1e-9), bessel_i0(8.0 + 1e-9)
    assert above == pytest.approx(below, rel=1e-8)
    assert bessel_i0(8.0) == pytest.approx(i0_series(8.0), rel=1e-12)


def test_bessel_i0e_is_scaled_i0():
    assert bessel_i0e(3.0) == pytest.approx(i0_series(3.0) * math.exp(-3.0), rel=1e-12)


@pytest.mark.parametrize("x", [math.inf, -math.inf, math.nan, 700.5, -800.0])
def test_bessel_i0_rejects_bad_arguments(x):
    with pytest.raises(DomainError):
        bessel_i0(x)


@pytest.mark.parametrize("x", [1e-6, 1e-3, 0.018, 0.5, 2.0, 7.0])
def test_bessel_i0m1_keeps_precision_for_small_arguments(x):
    assert bessel_i0m1(x) == pytest.approx(i0m1_series(x), rel=1e-12)


def test_bessel_i0m1_at_zero():
    assert bessel_i0m1(0.0) == 0.0


@pytest.mark.parametrize("x, expected", [
    (0.18, 0.0081164172697258109855),
    (0.5, 0.063483370741323519263),
    (2.0, 1.2795853023360672674),
])
def test_bessel_i0m1_reference_values(x, expected):
    assert bessel_i0m1(x) == pytest.approx(expected, rel=1e-14)
    assert bessel_i0m1(-x) == bessel_i0m1(x)


def test_bessel_i0m1_continuous_at_series_limit():
    below, above = bessel_i0m1(2.0), bessel_i0m1(math.nextafter(2.0, 3.0))
    assert above == pytest.approx(below, rel=1e-14)
    assert bessel_i0m1(2.5) == pytest.approx(bessel_i0(2.5) - 1.0, rel=1e-15)


def test_binary_entropy_endpoints_and_maximum():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0, rel=1e-15)


def test_binary_entropy_near_eleven_percent_threshold():
    value = binary_entropy(0.11)
    assert value == pytest.approx(h(0.11), rel=1e-12)
    assert 0.0 < 1.0 - 2.0 * value < 1e-3


def test_binary_entropy_matches_direct_evaluation_over_grid():
    for k in range(1, 1000):
        p = k / 1000.0
        assert binary_entropy(p) == pytest.approx(h(p), rel=1e-10)


def test_binary_entropy_symmetric_and_concave():
    grid = [k / 200.0 for k in range(201)]
    for p in grid:
        assert binary_entropy(p) == pytest.approx(binary_entropy(1.0 - p), abs=1e-15)
    for p in grid[::7]:
        for q in grid[::11]:
            mid = binary_entropy((p + q) / 2.0)
            assert mid >= (binary_entropy(p) + binary_entropy(q)) / 2.0 - 1e-15


@pytest.mark.parametrize("p", [-0.01, 1.01, math.nan])
def test_binary_entropy_rejects_non_probabilities(p):
    with pytest.raises(DomainError):
        binary_entropy(p)


def test_total_variation_distance():
    assert total_variation_distance([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert total_variation_distance([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert total_variation_distance([0.75, 0.25], [0.5, 0.5]) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        total_variation_distance([1.0], [0.5, 0.5])
