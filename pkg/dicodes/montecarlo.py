"""
Monte Carlo estimates of the two identification errors.

lambda1 (missed identification): message i sent, test i rejects.
lambda2 (false identification): message j sent, test i != j accepts.

Every (message, chunk) coordinate owns its own generator, so the counts do not
depend on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import ndtri

from dicodes import config
from dicodes.channel import sample_outputs
from dicodes.decoder import residual_sq
from dicodes.errors import InsufficientCodebook, OutOfRange
from dicodes.utils import derive_rng, setup_logger

logger = setup_logger(__name__)

PAIR_STRATEGIES = ("auto", "all", "nearest_k")


@dataclass(frozen=True)
class ErrorEstimate:
    p_hat: float
    trials: int
    ci_low: float
    ci_high: float
    kind: str
    worst_index: object
    errors: int
    average: float
    per_item: np.ndarray
    level: float = config.CI_LEVEL
    method: str = "wilson"
    lower_bound_estimate: bool = False

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)

    def within_bound(self, bound, sigmas=3.0):
        """
        Bound-direction check p_hat <= bound + sigmas * half-width.

        With no observed errors the Wilson upper limit stands in for p_hat.
        """
        value = self.ci_high if self.errors == 0 else self.p_hat
        return bool(value <= bound + sigmas * self.half_width)


def binomial_ci(successes, trials, level=config.CI_LEVEL):
    """
    Wilson score interval for a binomial proportion.

    Args:
        successes: Observed count, 0 <= successes <= trials
        trials: Number of trials >= 1
        level: Two-sided confidence level in (0, 1)

    Returns:
        tuple: (low, high)
    """
    if not 0.0 < level < 1.0:
        raise OutOfRange(f"confidence level must lie in (0, 1), got {level}")
    if trials < 1 or not 0 <= successes <= trials:
        raise OutOfRange(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")

    z = float(ndtri(0.5 + 0.5 * level))
    p = successes / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    centre = (p + 0.5 * z2n) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + 0.25 * z2n / trials) / denom

    low = 0.0 if successes == 0 else max(0.0, centre - half)
    high = 1.0 if successes == trials else min(1.0, centre + half)
    return low, high


def oracle_agreement(successes, trials, reference, sigmas=3.0):
    """
    Whether an observed count is within `sigmas` binomial standard errors of
    an exact reference probability.
    """
    p_hat = successes / trials
    sd = math.sqrt(max(reference * (1.0 - reference), 0.0) / trials)
    if sd == 0.0:
        return bool(p_hat == reference)
    return bool(abs(p_hat - reference) <= sigmas * sd)


def _chunks(trials):
    for index, start in enumerate(range(0, trials, config.MC_CHUNK)):
        yield index, min(config.MC_CHUNK, trials - start)


def _check_trials(trials):
    if int(trials) != trials or trials < 1:
        raise OutOfRange(f"trials must be a positive integer, got {trials}")
    return int(trials)


def _run(fn, items, threads):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, items))


def estimate_lambda1(cb, spec, ch, cache, trials_per_msg, master_seed, threads=1, level=config.CI_LEVEL):
    """
    Worst-case missed-identification probability over messages.

    Args:
        cb: Codebook
        spec: DecoderSpec
        ch: ChannelModel
        cache: SpectralCache
        trials_per_msg: Trials per message
        master_seed: Master seed (stream STREAM_LAMBDA1, counters (i, chunk))
        threads: Worker threads (speed only)
        level: Confidence level

    Returns:
        ErrorEstimate with per_item the per-message estimates
    """
    trials = _check_trials(trials_per_msg)
    codewords = np.atleast_2d(cb.codewords)
    centers = codewords @ ch.A.T

    def count_missed(i):
        missed = 0
        for chunk, size in _chunks(trials):
            rng = derive_rng(master_seed, config.STREAM_LAMBDA1, i, chunk)
            Y = sample_outputs(ch, cache, codewords[i], rng, size)
            missed += int(np.count_nonzero(residual_sq(Y, centers[i])[:, 0] > spec.threshold))
        return missed

    counts = np.array(_run(count_missed, range(len(codewords)), threads), dtype=np.int64)
    worst = int(np.argmax(counts))
    errors = int(counts[worst])
    low, high = binomial_ci(errors, trials, level)

    estimate = ErrorEstimate(
        p_hat=errors / trials,
        trials=trials,
        ci_low=low,
        ci_high=high,
        kind="missed",
        worst_index=worst,
        errors=errors,
        average=float(np.mean(counts)) / trials,
        per_item=counts / trials,
        level=level,
    )
    logger.info(f"lambda1: worst message {worst}, p_hat={estimate.p_hat:.4g} "
                f"[{low:.4g}, {high:.4g}] over {len(codewords)} messages x {trials} trials")
    return estimate


def select_pairs(centers, pair_strategy="auto", nearest_k=config.NEAREST_K):
    """
    Boolean mask of ordered pairs (i tested, j sent) to simulate.

    nearest_k keeps, for each i, the k senders with the smallest ||A(u_j - u_i)||.

    Returns:
        tuple: (mask, resolved strategy)
    """
    N = centers.shape[0]
    if pair_strategy not in PAIR_STRATEGIES:
        raise OutOfRange(f"pair_strategy must be one of {PAIR_STRATEGIES}, got '{pair_strategy}'")
    if pair_strategy == "auto":
        pair_strategy = "all" if N - 1 <= config.PAIR_ALL_MAX else "nearest_k"

    if pair_strategy == "all" or nearest_k >= N - 1:
        mask = ~np.eye(N, dtype=bool)
        return mask, pair_strategy

    if nearest_k < 1:
        raise OutOfRange(f"nearest_k must be at least 1, got {nearest_k}")
    dist = cdist(centers, centers, "sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :nearest_k]
    mask = np.zeros((N, N), dtype=bool)
    mask[np.repeat(np.arange(N), nearest_k), nearest.ravel()] = True
    return mask, pair_strategy


def estimate_lambda2(cb, spec, ch, cache, trials_per_pair, master_seed, pair_strategy="auto",
                     nearest_k=config.NEAREST_K, threads=1, level=config.CI_LEVEL):
    """
    Worst-case false-identification probability over ordered pairs.

    Outputs are drawn per sender j and shared by every test i paired with j;
    each pair still sees trials_per_pair independent outputs.

    Args:
        cb: Codebook (N >= 2)
        spec: DecoderSpec
        ch: ChannelModel
        cache: SpectralCache
        trials_per_pair: Trials per ordered pair
        master_seed: Master seed (stream STREAM_LAMBDA2, counters (j, chunk))
        pair_strategy: auto | all | nearest_k
        nearest_k: Senders kept per test under nearest_k
        threads: Worker threads (speed only)
        level: Confidence level

    Returns:
        ErrorEstimate with per_item the N x N pair matrix (row i tested,
        column j sent; NaN where not simulated) and worst_index (i, j)
    """
    codewords = np.atleast_2d(cb.codewords)
    N = codewords.shape[0]
    if N < 2:
        raise InsufficientCodebook(f"false identification needs N >= 2 codewords, got N={N}")
    trials = _check_trials(trials_per_pair)

    centers = codewords @ ch.A.T
    mask, strategy = select_pairs(centers, pair_strategy, nearest_k)

    def count_accepted(j):
        testers = np.flatnonzero(mask[:, j])
        accepted = np.zeros(len(testers), dtype=np.int64)
        if len(testers) == 0:
            return testers, accepted
        for chunk, size in _chunks(trials):
            rng = derive_rng(master_seed, config.STREAM_LAMBDA2, j, chunk)
            Y = sample_outputs(ch, cache, codewords[j], rng, size)
            accepted += np.count_nonzero(residual_sq(Y, centers[testers]) <= spec.threshold, axis=0)
        return testers, accepted

    counts = np.full((N, N), np.nan)
    for j, (testers, accepted) in enumerate(_run(count_accepted, range(N), threads)):
        counts[testers, j] = accepted

    flat = int(np.nanargmax(counts))
    worst = tuple(int(k) for k in np.unravel_index(flat, counts.shape))
    errors = int(counts[worst])
    low, high = binomial_ci(errors, trials, level)

    estimate = ErrorEstimate(
        p_hat=errors / trials,
        trials=trials,
        ci_low=low,
        ci_high=high,
        kind="false_id",
        worst_index=worst,
        errors=errors,
        average=float(np.nanmean(counts)) / trials,
        per_item=counts / trials,
        level=level,
        lower_bound_estimate=bool(not mask[~np.eye(N, dtype=bool)].all()),
    )
    logger.info(f"lambda2 ({strategy}): worst pair {worst}, p_hat={estimate.p_hat:.4g} "
                f"[{low:.4g}, {high:.4g}] over {int(mask.sum())} pairs x {trials} trials")
    return estimate


def pair_estimate(estimate, i, j) -> Optional[float]:
    """Per-pair estimate from a false-identification ErrorEstimate, None if not simulated."""
    value = float(estimate.per_item[i, j])
    return None if math.isnan(value) else value
