"""
Power-constrained packings used as DI codebooks.

Codewords are centres of disjoint radius-r balls placed inside the ball of
radius sqrt(nP) - r, so the whole packing respects ||u||^2 <= nP. Greedy
random saturation stands in for the density argument: once no candidate can be
added, the radius-2r balls cover the centre ball, which gives
N >= ((1 - eps) / (2 eps))^n with eps = r / sqrt(nP).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from dicodes import bounds, config
from dicodes.decoder import DecoderSpec, make_decoder
from dicodes.errors import (
    BudgetZero,
    HypothesisViolated,
    NonPositiveRadius,
    PackingViolation,
    SizeCapExceeded,
)
from dicodes.utils import derive_rng, derive_seed, setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class Codebook:
    n: int
    codewords: np.ndarray
    r: float
    eps: float
    P: float
    min_pairwise_dist: float
    seed: int
    saturated: bool = True

    @property
    def N(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def center_radius(self) -> float:
        """Radius sqrt(nP) - r of the ball holding the codewords."""
        return math.sqrt(self.n * self.P) - self.r


@dataclass(frozen=True)
class PackingCertificate:
    N: int
    min_dist: float
    max_norm: float
    required_min_dist: float
    norm_limit: float
    packing_ok: bool
    norms_ok: bool

    @property
    def passed(self) -> bool:
        return self.packing_ok and self.norms_ok


class Theorem3Code(NamedTuple):
    codebook: Codebook
    decoder: DecoderSpec
    predicted_E2: float
    eps: float
    predicted_log2_N: float
    truncated: bool


def sample_uniform_ball(n, rho, rng):
    """
    Draw one point uniformly from the solid n-ball of radius rho.

    Args:
        n: Dimension
        rho: Radius > 0
        rng: numpy Generator

    Returns:
        numpy array of length n
    """
    return _sample_ball_batch(n, rho, rng, 1)[0]


def _sample_ball_batch(n, rho, rng, size):
    if not rho > 0:
        raise NonPositiveRadius(f"ball radius must be positive, got rho={rho}")
    g = rng.standard_normal((size, n))
    norms = np.linalg.norm(g, axis=1)
    radii = rho * rng.random(size) ** (1.0 / n)
    return g * (radii / norms)[:, None]


def min_pairwise_distance(points):
    """Smallest distance between two rows of points; +inf for fewer than two rows."""
    points = np.atleast_2d(points)
    if points.shape[0] < 2:
        return math.inf
    dists, _ = cKDTree(points).query(points, k=2)
    return float(np.min(dists[:, 1]))


def construct_greedy(n, r, P, seed, budget, max_codewords=None, radius=None):
    """
    Greedy random saturation of the centre ball.

    Candidates are drawn uniformly from the ball of radius sqrt(nP) - r (or `radius`) and
    accepted when farther than 2r from every accepted codeword. Construction
    stops after `budget` consecutive rejections or once `max_codewords` are
    accepted.

    Args:
        n: Block length
        r: Packing radius, 0 < r < sqrt(nP)
        P: Power budget
        seed: Master seed (codebook stream)
        budget: Consecutive-rejection limit
        max_codewords: Size cap (defaults to 2**N_CAP_LOG2)
        radius: Candidate ball radius, at most sqrt(nP) - r (defaults to the whole centre ball)

    Returns:
        Codebook
    """
    if budget < 1:
        raise BudgetZero(f"rejection budget must be at least 1, got {budget}")
    power_radius = math.sqrt(n * P)
    if not 0 < r < power_radius:
        raise NonPositiveRadius(f"packing radius must lie in (0, sqrt(nP)={power_radius:.6g}), got r={r}")
    if max_codewords is None:
        max_codewords = 2 ** config.N_CAP_LOG2

    rng = derive_rng(seed, config.STREAM_CODEBOOK)
    rho = power_radius - r
    if radius is not None:
        if not 0 < radius <= rho:
            raise NonPositiveRadius(f"candidate radius must lie in (0, {rho:.6g}], got {radius}")
        rho = float(radius)
    min_sq = 4.0 * r * r

    accepted = np.empty((min(max_codewords, 1024), n))
    count = 0
    consecutive = 0
    exhausted = False

    while count < max_codewords and not exhausted:
        batch = _sample_ball_batch(n, rho, rng, config.GREEDY_BATCH)
        if count:
            clear = np.min(cdist(batch, accepted[:count], "sqeuclidean"), axis=1) > min_sq
        else:
            clear = np.ones(len(batch), dtype=bool)

        last = 0
        fresh_start = count
        for idx in np.flatnonzero(clear):
            candidate = batch[idx]
            if count > fresh_start:
                fresh = accepted[fresh_start:count]
                if np.min(np.sum((fresh - candidate) ** 2, axis=1)) <= min_sq:
                    continue
            if consecutive + (idx - last) >= budget:
                exhausted = True
                break
            if count == accepted.shape[0]:
                grown = np.empty((min(2 * count, max_codewords), n))
                grown[:count] = accepted[:count]
                accepted = grown
            accepted[count] = candidate
            count += 1
            consecutive = 0
            last = idx + 1
            if count >= max_codewords:
                break

        if not exhausted and count < max_codewords:
            consecutive += len(batch) - last
            exhausted = consecutive >= budget

    codewords = np.array(accepted[:count])
    codewords.setflags(write=False)
    eps = r / power_radius
    cb = Codebook(
        n=n,
        codewords=codewords,
        r=float(r),
        eps=float(eps),
        P=float(P),
        min_pairwise_dist=min_pairwise_distance(codewords),
        seed=int(seed),
        saturated=bool(exhausted),
    )

    _assert_packing(cb)
    logger.info(f"Greedy packing: n={n}, r={r:.6g}, N={cb.N}, saturated={cb.saturated}")
    return cb


def _assert_packing(cb):
    certificate = certify_packing(cb)
    if not certificate.passed:
        raise PackingViolation(
            f"constructed codebook fails its packing certificate: min_dist={certificate.min_dist:.6g} "
            f"(need > {certificate.required_min_dist:.6g}), max_norm={certificate.max_norm:.6g} "
            f"(limit {certificate.norm_limit:.6g})"
        )
    ceiling = bounds.log2_packing_count_upper(cb.n, cb.P, cb.r)
    if math.log2(cb.N) > ceiling:
        raise PackingViolation(f"log2 N = {math.log2(cb.N):.6g} exceeds the volumetric ceiling {ceiling:.6g}")


def construct_with_target(n, r, P, seed, target, budget=None, retries=config.CONSTRUCT_RETRIES,
                          max_codewords=None):
    """
    Run greedy saturation until the packing reaches `target` codewords.

    Each retry derives a fresh seed from `seed`.

    Returns:
        Codebook with N >= target

    Raises:
        PackingViolation: if every attempt stops short of the target
    """
    if budget is None:
        budget = config.BUDGET_FACTOR * n * max(int(target), 1)

    cb = None
    for attempt in range(retries + 1):
        attempt_seed = seed if attempt == 0 else derive_seed(seed, attempt)
        cb = construct_greedy(n, r, P, attempt_seed, budget, max_codewords=max_codewords)
        if cb.N >= target:
            return cb
        logger.warning(f"Greedy packing reached N={cb.N} < target {target} (attempt {attempt + 1}), retrying")

    raise PackingViolation(f"greedy saturation stopped at N={cb.N} below target {target} after {retries + 1} attempts")


def certify_packing(cb):
    """
    Recompute the packing invariants of a codebook from its codewords.

    Returns:
        PackingCertificate (failures are reported, never raised)
    """
    codewords = np.atleast_2d(cb.codewords)
    min_dist = min_pairwise_distance(codewords)
    max_norm = float(np.max(np.linalg.norm(codewords, axis=1))) if len(codewords) else 0.0
    norm_limit = math.sqrt(cb.n * cb.P) - cb.r

    return PackingCertificate(
        N=int(codewords.shape[0]),
        min_dist=min_dist,
        max_norm=max_norm,
        required_min_dist=2.0 * cb.r,
        norm_limit=norm_limit,
        packing_ok=bool(min_dist > 2.0 * cb.r),
        norms_ok=bool(max_norm <= norm_limit * (1.0 + 1e-12)),
    )


def scale_codebook(cb, c):
    """Scale codewords, r and sqrt(P) by c > 0; packing validity is preserved."""
    if not c > 0:
        raise NonPositiveRadius(f"scale factor must be positive, got c={c}")
    codewords = np.array(cb.codewords) * c
    codewords.setflags(write=False)
    return Codebook(
        n=cb.n,
        codewords=codewords,
        r=cb.r * c,
        eps=cb.eps,
        P=cb.P * c * c,
        min_pairwise_dist=cb.min_pairwise_dist * c,
        seed=cb.seed,
        saturated=cb.saturated,
    )


def construct_from_theorem3(ch, cache, E1, tau, seed, n_cap=config.N_CAP_LOG2,
                            max_codewords=config.MAX_CODEWORDS, strict_size=False, variant="standard"):
    """
    Build the linear-rate distance-decoding code for target exponent E1.

    Picks eps^2 = (1 + tau) nu_M sqrt(E1) / P, packs radius r = eps sqrt(nP)
    and pairs the packing with the distance decoder. When the predicted size
    exceeds 2^n_cap the packing is truncated at max_codewords, unless
    strict_size is set.

    Args:
        ch: ChannelModel
        cache: SpectralCache
        E1: Target type-I exponent (nats)
        tau: Margin parameter
        seed: Master seed
        n_cap: log2 of the largest codebook that is built in full
        max_codewords: Size of a truncated sub-packing
        strict_size: Raise SizeCapExceeded instead of truncating
        variant: Decoder threshold variant ("standard" or "chernoff")

    Returns:
        Theorem3Code
    """
    eps = bounds.check_theorem3(E1, tau, cache.nu_M, ch.P)
    if not bounds.feasibility(eps, E1, cache.nu_M, ch.P):
        raise HypothesisViolated(f"P eps^2 > nu_M sqrt(E1) fails at eps={eps:.6g}")

    n = ch.n
    r = eps * ch.power_radius
    predicted_log2_N = bounds.log2_code_size_lower(n, eps)
    predicted_E2 = bounds.type2_exponent(eps, E1, cache.nu_M, ch.P)

    if cache.a_sv_min < 1.0:
        logger.warning(
            f"Transform contracts distances (smallest singular value {cache.a_sv_min:.4g} < 1); "
            f"the predicted type-II exponent is not guaranteed"
        )

    truncated = predicted_log2_N > n_cap
    if truncated:
        if strict_size:
            raise SizeCapExceeded(
                f"predicted log2 N = {predicted_log2_N:.4g} exceeds the cap {n_cap}; "
                f"only formula results are available"
            )
        logger.warning(
            f"Predicted log2 N = {predicted_log2_N:.4g} exceeds cap {n_cap}; "
            f"building a {max_codewords}-codeword sub-packing around the origin"
        )
        # sub-ball of radius 2r keeps the closest pairs near the 2r packing distance
        budget = config.BUDGET_FACTOR * n * max_codewords
        radius = min(config.TRUNCATED_BALL_FACTOR * r, ch.power_radius - r)
        cb = construct_greedy(n, r, ch.P, seed, budget, max_codewords=max_codewords, radius=radius)
        cb = dataclasses.replace(cb, saturated=False)
    else:
        target = bounds.code_size_target(n, eps)
        cb = construct_with_target(n, r, ch.P, seed, target, max_codewords=2 ** int(n_cap))

    spec = make_decoder(n, E1, cache, variant=variant)
    logger.info(
        f"Distance-decoding code: n={n}, eps={eps:.4g}, r={r:.4g}, N={cb.N}, "
        f"threshold={spec.threshold:.6g}, predicted E2={predicted_E2:.4g}"
    )
    return Theorem3Code(
        codebook=cb,
        decoder=spec,
        predicted_E2=predicted_E2,
        eps=eps,
        predicted_log2_N=predicted_log2_N,
        truncated=truncated,
    )
