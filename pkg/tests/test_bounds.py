import math

import numpy as np
import pytest

from dicodes import bounds
from dicodes.errors import (
    EpsOutOfRange,
    ExponentTooSmall,
    HypothesisViolated,
    Infeasible,
    NonPositiveExponent,
    NonPositiveRadius,
    OutOfRange,
)


def test_converse_rate_symmetric_values():
    assert bounds.converse_rate_symmetric(6, 0.5, 1.0, 1.0) == pytest.approx(2.0)
    assert bounds.converse_rate_symmetric(1, 8.0, 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_converse_rate_symmetric_exponent_too_small():
    with pytest.raises(ExponentTooSmall):
        bounds.converse_rate_symmetric(4, 0.5, 1.0, 1.0)


def test_converse_rate_symmetric_constant_exponent_is_n_free():
    values = {bounds.converse_rate_symmetric(2 ** k, 0.5, 1.0, 20.0) for k in range(3, 11)}
    assert len(values) == 1


def test_converse_rate_symmetric_vanishing_exponent():
    shifted = [bounds.converse_rate_symmetric(2 ** k, 3.0 / 2 ** k, 1.0, 20.0) - 0.5 * k for k in range(3, 11)]
    assert max(shifted) - min(shifted) <= 1e-12


def test_packing_radius_symmetric():
    assert bounds.packing_radius_symmetric(4, 2.0 * math.log(2.0) / 4.0, 1.0) == pytest.approx(0.0, abs=1e-7)
    assert bounds.packing_radius_symmetric(4, math.log(16.0) / 4.0, 1.0) == pytest.approx(1.177410, abs=1e-6)


def test_converse_rate_packing_never_exceeds_relaxed_bound():
    for n in (8, 32, 128):
        for E in (0.5, 1.0, 2.0):
            assert bounds.converse_rate_packing(n, E, 1.0, 10.0) <= bounds.converse_rate_symmetric(n, E, 1.0, 10.0)


def test_converse_rate_asymmetric_values():
    assert bounds.converse_rate_asymmetric(2.0 * 1.0 * 3.0, 1.0, 3.0) == pytest.approx(1.0)
    assert bounds.converse_rate_asymmetric(0.01, 1.0, 10.0) == pytest.approx(math.log2(math.sqrt(2000.0) + 1.0))
    assert bounds.converse_rate_asymmetric(0.01, 1.0, 10.0) == pytest.approx(5.5154, abs=1e-4)


def test_converse_rate_asymmetric_needs_positive_exponent():
    with pytest.raises(NonPositiveExponent):
        bounds.converse_rate_asymmetric(0.0, 1.0, 1.0)


def test_packing_radius_asymmetric():
    assert bounds.packing_radius_asymmetric(2, 1.0, 1.0) == pytest.approx(1.0)
    assert bounds.packing_radius_asymmetric(8, 0.25, 0.5) == pytest.approx(math.sqrt(8.0) / 2.0)


@pytest.mark.parametrize(
    "n, rho, expected",
    [
        (2, 1.0, math.log(math.pi)),
        (3, 1.0, math.log(4.0 * math.pi / 3.0)),
        (1, 2.0, math.log(4.0)),
    ],
)
def test_log_ball_volume(n, rho, expected):
    assert bounds.log_ball_volume(n, rho) == pytest.approx(expected)


def test_log_ball_volume_needs_positive_radius():
    with pytest.raises(NonPositiveRadius):
        bounds.log_ball_volume(2, 0.0)


def test_log2_packing_count_upper():
    assert bounds.log2_packing_count_upper(1, 1.0, 1.0) == pytest.approx(1.0)
    assert bounds.log2_packing_count_upper(3, 2.0, 2.0 * math.sqrt(6.0)) == pytest.approx(0.0, abs=1e-12)
    assert bounds.log2_packing_count_upper(8, 10.0, 1.0) == pytest.approx(8.0 * math.log2(2.0 * math.sqrt(80.0)))


def test_code_size_helpers():
    assert bounds.code_size_target(8, 0.25) == 26
    assert bounds.code_size_target(4, 0.25) == 6
    assert bounds.log2_code_size_lower(8, 0.25) == pytest.approx(8.0 * math.log2(1.5))
    assert bounds.linear_rate_ceiling(0.25) == pytest.approx(math.log2(1.5))
    with pytest.raises(EpsOutOfRange):
        bounds.linear_rate_ceiling(0.4)


@pytest.mark.parametrize(
    "n, E1, expected",
    [
        (7, 1.0, 35.0),
        (32, 0.04, 57.6),
        (5, 4.0, 85.0),
    ],
)
def test_decoder_threshold_identity_noise(make_awgn, n, E1, expected):
    _, cache = make_awgn(n)
    assert bounds.decoder_threshold(n, E1, cache) == pytest.approx(expected)


@pytest.mark.parametrize("E1", [1e-3, 0.04, 0.5, 1.0, 3.0])
def test_tight_threshold_below_standard_threshold(make_random_channel, E1):
    ch, cache = make_random_channel(6)
    tight = bounds.tight_decoder_threshold(6, E1, cache)
    assert cache.trace_sigma < tight <= bounds.decoder_threshold(6, E1, cache) * (1 + 1e-12)


@pytest.mark.parametrize("E1", [0.01, 0.04, 0.2])
def test_chernoff_bound_meets_target_at_tight_threshold(make_awgn, E1):
    n = 32
    _, cache = make_awgn(n)
    threshold = bounds.tight_decoder_threshold(n, E1, cache)
    exact = bounds.chernoff_type1_bound(threshold, cache.sigma_eigs)
    relaxed = bounds.chernoff_type1_bound(threshold, cache.sigma_eigs, relaxed=True)
    assert exact <= relaxed * (1 + 1e-6)
    assert relaxed <= math.exp(-n * E1) * (1 + 1e-6)


def test_chernoff_bound_trivial_below_mean(make_awgn):
    _, cache = make_awgn(4)
    assert bounds.chernoff_type1_bound(3.0, cache.sigma_eigs) == 1.0


def test_feasibility():
    assert bounds.feasibility(math.sqrt(0.05), 0.04, 1.0, 10.0)
    assert not bounds.feasibility(0.1, 0.04, 1.0, 10.0)
    assert not bounds.feasibility(0.25, 1.0, 1.0, 16.0)
    with pytest.raises(EpsOutOfRange):
        bounds.feasibility(0.4, 0.04, 1.0, 10.0)


def test_type2_exponent():
    assert bounds.type2_exponent(0.25, 1.0, 1.0, 16.0) == 0.0
    eps = bounds.theorem3_eps(0.01, 1.0, 1.0, 9.0)
    assert bounds.type2_exponent(eps, 0.01, 1.0, 9.0) == pytest.approx(0.002)
    with pytest.raises(Infeasible):
        bounds.type2_exponent(0.01, 0.04, 1.0, 10.0)


def test_achievable_rate_linear_value():
    rate = bounds.achievable_rate_linear(0.01, 0.1, 1.0, 10.0)
    assert rate.rate_bits == pytest.approx(math.log2(math.sqrt(10.0 / 0.44) - 0.5))
    assert rate.rate_bits == pytest.approx(2.093, abs=1e-3)
    assert rate.E2 == pytest.approx(2 * 0.01 * 0.01 / 11.0)
    assert not rate.degenerate


def test_achievable_rate_matches_packing_ceiling():
    rate = bounds.achievable_rate_linear(0.04, 0.5, 1.0, 20.0)
    assert rate.rate_bits == pytest.approx(bounds.linear_rate_ceiling(rate.eps))


def test_achievable_rate_big_exponent_variant():
    rate = bounds.achievable_rate_linear(2.0, 0.5, 1.0, 100.0)
    assert rate.E2 == pytest.approx(2 * 0.25 * 4.0 / 101.0)
    assert rate.eps == pytest.approx(math.sqrt(1.5 * 2.0 / 100.0))


@pytest.mark.parametrize(
    "E1, tau, P",
    [
        (0.0, 0.5, 10.0),
        (0.04, 0.0, 10.0),
        (1.0, 0.5, 1.0),
        (0.04, 5.0, 10.0),
        (1.0, 0.1, 1000.0),
    ],
)
def test_theorem3_hypotheses(E1, tau, P):
    with pytest.raises(HypothesisViolated):
        bounds.achievable_rate_linear(E1, tau, 1.0, P)


def test_achievable_rate_linearithmic():
    rate = bounds.achievable_rate_linearithmic(64, 0.5, 0.5, 1.0, 16.0)
    assert rate.E1 == pytest.approx(0.125)
    expected = 64 * (0.125 * 6 + 0.5 * math.log2(16.0 / 24.0))
    assert rate.log2_N_lower == pytest.approx(expected)
    with pytest.raises(OutOfRange):
        bounds.achievable_rate_linearithmic(64, 1.0, 0.5, 1.0, 16.0)


def test_linearithmic_normalized_rate_approaches_quarter_beta():
    offset = abs(0.5 * math.log2(20.0 / 24.0))
    for k in range(1, 21):
        rate = bounds.achievable_rate_linearithmic(2 ** k, 0.5, 0.5, 1.0, 20.0)
        assert abs(rate.normalized_rate - 0.125) <= offset / k + 1e-12


def test_exponent_lambda_convert():
    assert bounds.exponent_lambda_convert(1.0, 5) == 0.0
    assert bounds.exponent_lambda_convert(math.exp(-7.0), 7) == pytest.approx(1.0)
    assert bounds.exponent_lambda_convert(0.01, 10) == pytest.approx(0.460517, abs=1e-6)
    with pytest.raises(OutOfRange):
        bounds.exponent_lambda_convert(0.0, 10)


def test_nats_bits_round_trip():
    assert bounds.nats_to_bits(bounds.bits_to_nats(0.3)) == pytest.approx(0.3)
    assert bounds.bits_to_nats(1.0) == pytest.approx(math.log(2.0))


def test_error_exponents():
    exps = bounds.ErrorExponents(E1=0.1, E2=0.2, n=10)
    assert exps.lambda1 == pytest.approx(math.exp(-1.0))
    assert exps.lambda2 == pytest.approx(math.exp(-2.0))
    with pytest.raises(OutOfRange):
        bounds.ErrorExponents(E1=-0.1, E2=0.2, n=10)


def test_bound_report_symmetric(make_awgn):
    _, cache = make_awgn(6)
    report = bounds.bound_report(6, 0.5, 0.5, cache, 1.0)
    assert report.R_conv_symmetric_bits == pytest.approx(2.0)
    assert report.R_conv_asymmetric_bits == pytest.approx(bounds.converse_rate_asymmetric(0.5, 1.0, 1.0))
    assert report.notes["thm1"] == "ok"
    assert report.min_converse_bits() == pytest.approx(min(2.0, report.R_conv_asymmetric_bits))
    assert report.R_conv_packing_bits <= report.R_conv_symmetric_bits


def test_bound_report_stein_regime(make_awgn):
    _, cache = make_awgn(6)
    report = bounds.bound_report(6, None, 0.3, cache, 1.0)
    assert report.R_conv_symmetric_bits is None
    assert report.notes["thm1"] == "needs_both_exponents"
    assert report.notes["thm2_exponent"] == "E2"
    assert report.R_conv_asymmetric_bits == pytest.approx(bounds.converse_rate_asymmetric(0.3, 1.0, 1.0))


def test_bound_report_small_exponent(make_awgn):
    _, cache = make_awgn(4)
    report = bounds.bound_report(4, 0.5, 0.5, cache, 1.0)
    assert report.notes["thm1"] == "exponent_too_small"
    assert report.R_conv_symmetric_bits is None
    assert report.R_conv_asymmetric_bits is not None


def test_cross_theorem_consistency():
    checked = 0
    for ratio in (5.0, 10.0, 20.0):
        for E1 in np.logspace(-3, -1, 5):
            for tau in np.linspace(0.05, 1.0, 7):
                try:
                    rate = bounds.achievable_rate_linear(E1, tau, 1.0, ratio)
                except HypothesisViolated:
                    continue
                checked += 1
                assert rate.rate_bits <= bounds.converse_rate_asymmetric(E1, 1.0, ratio)
                E_min = min(E1, rate.E2)
                n = math.ceil(bounds.LN16 / E_min) + 1
                assert rate.rate_bits <= bounds.converse_rate_symmetric(n, E_min, 1.0, ratio)
    assert checked > 0
