import math

import numpy as np
import pytest

from dicodes import bounds, oracle
from dicodes.codebook import (
    Codebook,
    certify_packing,
    construct_from_theorem3,
    construct_greedy,
    construct_with_target,
    min_pairwise_distance,
    sample_uniform_ball,
    scale_codebook,
)
from dicodes.errors import BudgetZero, HypothesisViolated, NonPositiveRadius, SizeCapExceeded


def _codebook(codewords, r=1.0, P=100.0):
    codewords = np.atleast_2d(np.asarray(codewords, dtype=float))
    n = codewords.shape[1]
    return Codebook(n=n, codewords=codewords, r=r, eps=r / math.sqrt(n * P), P=P,
                    min_pairwise_dist=min_pairwise_distance(codewords), seed=0)


def test_sample_uniform_ball_stays_inside(rng):
    for _ in range(200):
        x = sample_uniform_ball(5, 2.0, rng)
        assert x.shape == (5,)
        assert np.linalg.norm(x) <= 2.0 * (1 + 1e-12)


def test_sample_uniform_ball_is_uniform(rng):
    draws = np.array([sample_uniform_ball(2, 1.0, rng) for _ in range(20000)])
    inner = np.mean(np.linalg.norm(draws, axis=1) <= 0.5)
    assert inner == pytest.approx(0.25, abs=0.02)


def test_sample_uniform_ball_needs_positive_radius(rng):
    with pytest.raises(NonPositiveRadius):
        sample_uniform_ball(3, 0.0, rng)


def test_min_pairwise_distance():
    assert min_pairwise_distance([[0.0, 0.0], [3.0, 4.0], [10.0, 0.0]]) == pytest.approx(5.0)
    assert min_pairwise_distance([[1.0, 2.0]]) == math.inf


def test_greedy_scalar_packing():
    cb = construct_greedy(1, 0.25, 1.0, seed=3, budget=5000)
    assert 2 <= cb.N <= 3
    assert cb.saturated
    assert certify_packing(cb).passed


def test_greedy_reaches_density_target():
    n, eps, P = 8, 0.25, 1.0
    r = eps * math.sqrt(n * P)
    target = bounds.code_size_target(n, eps)
    assert target == 26
    cb = construct_with_target(n, r, P, seed=11, target=target)
    assert cb.N >= target
    assert certify_packing(cb).passed
    assert math.log2(cb.N) <= bounds.log2_packing_count_upper(n, P, r)


def test_greedy_is_deterministic():
    first = construct_greedy(4, 0.5, 2.0, seed=5, budget=2000)
    second = construct_greedy(4, 0.5, 2.0, seed=5, budget=2000)
    np.testing.assert_array_equal(first.codewords, second.codewords)


def test_greedy_respects_max_codewords():
    cb = construct_greedy(6, 0.2, 4.0, seed=1, budget=5000, max_codewords=10)
    assert cb.N == 10
    assert not cb.saturated


def test_greedy_codewords_are_read_only():
    cb = construct_greedy(2, 0.5, 1.0, seed=2, budget=500)
    with pytest.raises(ValueError):
        cb.codewords[0, 0] = 1.0


def test_greedy_rejects_zero_budget():
    with pytest.raises(BudgetZero):
        construct_greedy(2, 0.5, 1.0, seed=0, budget=0)


@pytest.mark.parametrize("r", [0.0, -1.0, math.sqrt(2.0), 5.0])
def test_greedy_rejects_bad_radius(r):
    with pytest.raises(NonPositiveRadius):
        construct_greedy(2, r, 1.0, seed=0, budget=100)


def test_certify_packing_passes():
    cert = certify_packing(_codebook([[0.0, 0.0], [3.0, 0.0]]))
    assert cert.min_dist == pytest.approx(3.0)
    assert cert.required_min_dist == 2.0
    assert cert.passed


def test_certify_packing_flags_duplicates():
    cert = certify_packing(_codebook([[1.0, 1.0], [1.0, 1.0]]))
    assert cert.min_dist == 0.0
    assert not cert.packing_ok
    assert not cert.passed


def test_certify_packing_flags_norms():
    cert = certify_packing(_codebook([[0.0, 0.0], [20.0, 0.0]]))
    assert cert.packing_ok
    assert not cert.norms_ok


def test_certify_single_codeword():
    cert = certify_packing(_codebook([[0.5, 0.5]]))
    assert cert.N == 1
    assert cert.min_dist == math.inf
    assert cert.passed


def test_scale_codebook_preserves_packing():
    cb = construct_greedy(3, 0.4, 1.0, seed=9, budget=2000)
    scaled = scale_codebook(cb, 2.5)
    assert scaled.P == pytest.approx(cb.P * 6.25)
    assert scaled.r == pytest.approx(cb.r * 2.5)
    assert scaled.eps == cb.eps
    assert scaled.N == cb.N
    assert certify_packing(scaled).passed
    with pytest.raises(NonPositiveRadius):
        scale_codebook(cb, 0.0)


def test_theorem3_code_full_size(make_awgn):
    ch, cache = make_awgn(2, P=20.0)
    code = construct_from_theorem3(ch, cache, 0.04, 0.5, seed=4)
    assert not code.truncated
    assert code.eps == pytest.approx(math.sqrt(1.5 * 0.2 / 20.0))
    assert code.codebook.N >= bounds.code_size_target(2, code.eps)
    assert code.codebook.r == pytest.approx(code.eps * math.sqrt(40.0))
    assert code.decoder.threshold == pytest.approx(2.0 + 8.0 * 0.2)
    assert code.predicted_E2 == pytest.approx(2 * 0.25 * 0.04 / 21.0)
    assert certify_packing(code.codebook).passed


def test_theorem3_code_truncated(make_awgn):
    ch, cache = make_awgn(16, P=20.0)
    code = construct_from_theorem3(ch, cache, 0.04, 0.5, seed=4, n_cap=20, max_codewords=16)
    assert code.truncated
    assert code.predicted_log2_N > 20
    assert code.codebook.N == 16
    assert code.codebook.saturated is False
    assert certify_packing(code.codebook).passed


def test_truncated_code_keeps_close_pairs(make_awgn):
    ch, cache = make_awgn(16, P=20.0)
    code = construct_from_theorem3(ch, cache, 0.04, 0.5, seed=4, n_cap=20, max_codewords=16)
    cb = code.codebook
    assert np.max(np.linalg.norm(cb.codewords, axis=1)) <= 2.0 * cb.r * (1 + 1e-12)
    assert 2.0 * cb.r < cb.min_pairwise_dist < 3.0 * cb.r
    accept = oracle.noncentral_chi2_cdf(16, cb.min_pairwise_dist ** 2, code.decoder.threshold)
    assert accept > 1e-3


def test_construct_greedy_candidate_radius():
    cb = construct_greedy(4, 1.0, 10.0, seed=2, budget=2000, max_codewords=6, radius=2.0)
    assert np.max(np.linalg.norm(cb.codewords, axis=1)) <= 2.0 * (1 + 1e-12)
    with pytest.raises(NonPositiveRadius):
        construct_greedy(4, 1.0, 10.0, seed=2, budget=10, radius=6.0)


def test_theorem3_code_strict_size(make_awgn):
    ch, cache = make_awgn(16, P=20.0)
    with pytest.raises(SizeCapExceeded):
        construct_from_theorem3(ch, cache, 0.04, 0.5, seed=4, n_cap=20, strict_size=True)


def test_theorem3_code_hypothesis_violated(make_awgn):
    ch, cache = make_awgn(4, P=1.0)
    with pytest.raises(HypothesisViolated):
        construct_from_theorem3(ch, cache, 1.0, 0.5, seed=0)
