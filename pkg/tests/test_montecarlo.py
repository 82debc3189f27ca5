import dataclasses
import itertools

import numpy as np
import pytest

from onesided.core.error_handler import DomainError
from onesided.core.model import (
    BasisStatistics,
    ChannelParams,
    arm_transmittance,
    gain_qber_xx,
    gain_qber_zz,
)
from onesided.core.decoy import Basis, EstimateMode, IntensitySet, two_decoy_estimates
from onesided.core.progress_reporter import ProgressReporter, ProgressType
from onesided.core.montecarlo import (
    Announcement,
    BasisCounts,
    ClickRecord,
    Detector,
    EmpiricalStatistics,
    Encoding,
    PulseDistribution,
    PulsePairSpec,
    compare_with_model,
    cross_validate,
    estimate_statistics,
    observe_monte_carlo,
    simulate_pulse_pair,
)


TABLE = ChannelParams()
CLEAN = ChannelParams(e_d=0.0, p_d=0.0)


def test_vacuum_without_dark_counts_never_succeeds():
    rng = np.random.default_rng(1)
    arms = arm_transmittance(CLEAN, 0.0)
    for _ in range(20):
        record = simulate_pulse_pair(PulsePairSpec(0.0, 0.0), arms, CLEAN, rng)
        assert record.detectors == frozenset()
        assert record.announcement is Announcement.FAILURE
        assert not record.success


def test_announcements_follow_click_patterns():
    rng = np.random.default_rng(7)
    arms = arm_transmittance(TABLE, 0.0)
    psi_minus = [{Detector.D1, Detector.D4}, {Detector.D2, Detector.D3}]
    psi_plus = [{Detector.D1, Detector.D2}, {Detector.D3, Detector.D4}]
    for basis_a, basis_b, bit_a, bit_b in itertools.product(Encoding, Encoding, (0, 1), (0, 1)):
        spec = PulsePairSpec(1.5, 1.5, basis_a, basis_b, bit_a, bit_b)
        for _ in range(25):
            record = simulate_pulse_pair(spec, arms, TABLE, rng)
            if record.detectors in psi_minus:
                assert record.announcement is Announcement.PSI_MINUS
            elif record.detectors in psi_plus:
                assert record.announcement is Announcement.PSI_PLUS
            else:
                assert record.announcement is Announcement.FAILURE


def test_pulse_pair_spec_validation():
    with pytest.raises(DomainError):
        PulsePairSpec(-0.1, 0.2)
    with pytest.raises(DomainError):
        PulsePairSpec(0.1, 0.2, bit_a=2)
    assert PulsePairSpec(0.1, 0.2, "X", "Z").basis_a is Encoding.X


def test_sifted_error_rules():
    minus = ClickRecord(frozenset({Detector.D1, Detector.D4}), Announcement.PSI_MINUS)
    plus = ClickRecord(frozenset({Detector.D1, Detector.D2}), Announcement.PSI_PLUS)
    failure = ClickRecord(frozenset({Detector.D1}), Announcement.FAILURE)

    assert minus.sifted_error(PulsePairSpec(0.1, 0.1, "Z", "Z", 0, 0)) is True
    assert minus.sifted_error(PulsePairSpec(0.1, 0.1, "Z", "Z", 0, 1)) is False
    assert plus.sifted_error(PulsePairSpec(0.1, 0.1, "Z", "Z", 1, 1)) is True
    assert minus.sifted_error(PulsePairSpec(0.1, 0.1, "X", "X", 1, 1)) is True
    assert plus.sifted_error(PulsePairSpec(0.1, 0.1, "X", "X", 1, 1)) is False
    assert plus.sifted_error(PulsePairSpec(0.1, 0.1, "X", "X", 0, 1)) is True
    assert plus.sifted_error(PulsePairSpec(0.1, 0.1, "X", "Z", 0, 1)) is None
    assert failure.sifted_error(PulsePairSpec(0.1, 0.1, "Z", "Z", 0, 0)) is None


def test_basis_counts_invariant_and_statistics():
    with pytest.raises(DomainError):
        BasisCounts(trials=10, successes=5, errors=6)
    with pytest.raises(DomainError):
        BasisCounts(trials=4, successes=5, errors=0)

    counts = BasisCounts(trials=1000, successes=100, errors=10)
    assert counts.gain == 0.1
    assert counts.qber == 0.1
    assert counts.gain_stderr == pytest.approx((0.1 * 0.9 / 1000) ** 0.5)
    assert counts.qber_stderr == pytest.approx((0.1 * 0.9 / 100) ** 0.5)
    assert counts + counts == BasisCounts(2000, 200, 20)

    empty = BasisCounts(trials=50).to_basis_statistics()
    assert empty.empty and empty.gain == 0.0 and empty.qber == 0.5


def test_estimate_statistics_is_reproducible():
    source = PulseDistribution(0.45, 0.45)
    arms = arm_transmittance(TABLE, 0.0)
    first = estimate_statistics(source, 60_000, arms, TABLE, seed=11, block_size=16_384)
    second = estimate_statistics(source, 60_000, arms, TABLE, seed=11, block_size=16_384)
    other = estimate_statistics(source, 60_000, arms, TABLE, seed=12, block_size=16_384)
    assert first == second
    assert first != other
    assert first.total_trials == 60_000
    assert 0 < first.sifted_trials < first.total_trials


def test_worker_count_does_not_change_results():
    source = PulseDistribution(0.3, 0.3, Basis.XX)
    arms = arm_transmittance(TABLE, 25.0)
    serial = estimate_statistics(source, 50_000, arms, TABLE, seed=5, block_size=10_000)
    threaded = estimate_statistics(source, 50_000, arms, TABLE, seed=5, block_size=10_000, workers=3)
    assert serial == threaded


def test_fixed_basis_sources_only_fill_that_basis():
    arms = arm_transmittance(TABLE, 0.0)
    stats = estimate_statistics(PulseDistribution(0.45, 0.45, Basis.ZZ), 20_000, arms, TABLE, seed=3)
    assert stats[Basis.ZZ].trials == 20_000
    assert stats[Basis.XX].trials == 0


def test_random_bases_are_sifted():
    arms = arm_transmittance(TABLE, 0.0)
    stats = estimate_statistics(PulseDistribution(0.45, 0.45), 100_000, arms, TABLE, seed=9)
    # about a quarter of the pairs land in each matching basis pair
    for basis in Basis:
        assert 23_000 < stats[basis].trials < 27_000


def test_error_free_z_basis():
    arms = arm_transmittance(CLEAN, 0.0)
    stats = estimate_statistics(PulseDistribution(0.45, 0.45, Basis.ZZ), 200_000, arms, CLEAN, seed=2)
    assert stats[Basis.ZZ].successes > 0
    assert stats[Basis.ZZ].errors == 0


def test_estimate_statistics_rejects_bad_sizes():
    arms = arm_transmittance(TABLE, 0.0)
    with pytest.raises(DomainError):
        estimate_statistics(PulseDistribution(0.1, 0.1), 0, arms, TABLE, seed=1)
    with pytest.raises(DomainError):
        estimate_statistics(PulseDistribution(0.1, 0.1), 10, arms, TABLE, seed=1, block_size=0)


def test_progress_reporter_sees_every_block():
    finished = []
    reporter = ProgressReporter(ProgressType.SILENT)
    reporter.add_callback(lambda items, seconds: finished.append(items))
    arms = arm_transmittance(TABLE, 0.0)
    estimate_statistics(PulseDistribution(0.1, 0.1), 25_000, arms, TABLE, seed=1,
                        block_size=10_000, progress_reporter=reporter)
    assert finished == [3]


def test_compare_with_model():
    model = {Basis.ZZ: BasisStatistics(gain=0.1, qber=0.1)}
    exact = EmpiricalStatistics({Basis.ZZ: BasisCounts(10_000, 1_000, 100), Basis.XX: BasisCounts()})
    checks = compare_with_model(exact, model)
    assert [c.quantity for c in checks] == ["gain", "qber"]
    assert all(c.passed and c.z_score == 0.0 for c in checks)

    skewed = EmpiricalStatistics({Basis.ZZ: BasisCounts(10_000, 1_200, 100), Basis.XX: BasisCounts()})
    gain_check = compare_with_model(skewed, model)[0]
    assert not gain_check.passed
    assert gain_check.z_score == pytest.approx(200 / 10_000 / (0.1 * 0.9 / 10_000) ** 0.5)


def test_compare_with_model_tolerates_zero_observed_errors():
    model = {Basis.ZZ: BasisStatistics(gain=0.002, qber=0.015)}
    few = EmpiricalStatistics({Basis.ZZ: BasisCounts(10_000, 20, 0), Basis.XX: BasisCounts()})
    assert all(c.passed for c in compare_with_model(few, model))


@pytest.mark.parametrize("basis, closed_form", [(Basis.ZZ, gain_qber_zz), (Basis.XX, gain_qber_xx)])
def test_simulation_agrees_with_closed_form_at_zero_distance(basis, closed_form):
    arms = arm_transmittance(TABLE, 0.0)
    empirical = estimate_statistics(PulseDistribution(0.45, 0.45, basis), 1_000_000, arms, TABLE,
                                    seed=[20180116, 0, 0 if basis is Basis.ZZ else 1])
    checks = compare_with_model(empirical, {basis: closed_form(0.45, 0.45, arms, TABLE)})
    assert all(c.passed for c in checks)


def test_cross_validation_passes():
    report = cross_validate(TABLE, 0.45, 1_000_000, seed=20180116)
    assert len(report.configurations) == 6
    assert report.passed
    assert report.failures <= 1


@pytest.mark.slow
def test_cross_validation_passes_at_full_size():
    report = cross_validate(TABLE, 0.45, 10_000_000, seed=20180116, workers=4)
    assert report.passed


def test_cross_validation_detects_wrong_misalignment():
    mutated = dataclasses.replace(TABLE, e_d=0.1)
    report = cross_validate(TABLE, 0.45, 1_000_000, seed=20180116, simulator_channel=mutated)
    assert not report.passed
    assert report.failures >= 2


def test_empirical_table_feeds_the_decoy_estimator():
    intensities = IntensitySet(mu1=0.1, mu2=0.45)
    stats = observe_monte_carlo(TABLE, 0.0, intensities, 200_000, seed=4)
    arms = arm_transmittance(TABLE, 0.0)
    expected = gain_qber_zz(0.45, 0.45, arms, TABLE)
    assert stats.gain(Basis.ZZ, 2, 2) == pytest.approx(expected.gain, rel=0.1)

    estimates = two_decoy_estimates(stats, intensities)
    assert estimates.mode is EstimateMode.TWO_DECOY_BOUND
    assert 0.0 <= estimates.y11 <= 1.0
    assert 0.0 <= estimates.e11 <= 1.0
