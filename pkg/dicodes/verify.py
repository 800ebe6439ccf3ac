"""
Oracle and property suite behind the verify subcommand.

Each check returns a CheckResult; the suite never raises on a failed
comparison, only on broken inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dicodes import bounds, config, divergences, oracle
from dicodes.channel import preset, spectral_cache, validate_channel
from dicodes.codebook import Codebook, certify_packing, construct_from_theorem3, construct_with_target
from dicodes.data_manager import format_csv
from dicodes.decoder import make_decoder, residual_sq_in_basis
from dicodes.errors import HypothesisViolated
from dicodes.experiment import parse_config
from dicodes.montecarlo import estimate_lambda1, estimate_lambda2, oracle_agreement
from dicodes.sweep import run_grid
from dicodes.utils import derive_rng, derive_seed, setup_logger

logger = setup_logger(__name__)

ALPHAS = (1.5, 2.0, 4.0)
DH_ALPHAS = (1.5, 2.0, 4.0, 10.0)
DH_LEVELS = (0.01, 0.1, 0.5)
MIN_PAIR_ACCEPTANCE = 1e-3
PACKING_GRID = ((4, 0.25), (8, 0.25), (8, 0.30), (16, 0.30))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_channel(n, rng, P=1.0):
    """Well-conditioned random channel: A = I + 0.3 G, Sigma = B B^T + 0.5 I."""
    A = np.eye(n) + 0.3 * rng.standard_normal((n, n))
    B = rng.standard_normal((n, n))
    return validate_channel(n, A, B @ B.T + 0.5 * np.eye(n), P)


def _instances(seed, count):
    rng = derive_rng(seed, config.STREAM_VERIFY, 1)
    for k in range(count):
        n = 1 + k % 2
        ch = random_channel(n, rng)
        yield ch, spectral_cache(ch), 0.7 * rng.standard_normal(n), 0.7 * rng.standard_normal(n)


def check_closed_forms(seed, instances=20):
    """Fidelity and Renyi closed forms against quadrature; TV inside its fidelity sandwich."""
    worst_f = worst_d = 0.0
    tv_ok = True
    for ch, cache, x, x2 in _instances(seed, instances):
        geom = divergences.pair_geometry(x, x2, cache)
        F = divergences.fidelity(geom)
        worst_f = max(worst_f, abs(F - oracle.fidelity_quadrature(ch, x, x2)))
        for alpha in ALPHAS:
            closed = divergences.renyi(geom, alpha)
            numeric = oracle.renyi_quadrature(ch, x, x2, alpha)
            worst_d = max(worst_d, abs(closed - numeric) / max(abs(closed), 1e-12))
        low, high = divergences.tv_sandwich(F)
        tv = oracle.tv_quadrature(ch, x, x2)
        tv_ok = tv_ok and low - 1e-8 <= tv <= high + 1e-8

    return [
        CheckResult("closed forms: fidelity", worst_f <= 1e-6, f"max |error| {worst_f:.3g}"),
        CheckResult("closed forms: renyi", worst_d <= 1e-6, f"max relative error {worst_d:.3g}"),
        CheckResult("tv sandwich", tv_ok, f"{instances} instances"),
    ]


def check_dh_chain(seed, instances=20):
    """D_h <= D_alpha + alpha/(alpha-1) ln(1/(1-eps)), and the n = 1 threshold sweep."""
    chain_ok = True
    worst = 0.0
    rng = derive_rng(seed, config.STREAM_VERIFY, 2)
    for ch, cache, x, x2 in _instances(seed, instances):
        geom = divergences.pair_geometry(x, x2, cache)
        for alpha in DH_ALPHAS:
            for eps in DH_LEVELS:
                bound = divergences.renyi(geom, alpha) + divergences.renyi_dh_correction(alpha, eps)
                chain_ok = chain_ok and divergences.dh_exact(geom, eps) <= bound + 1e-9
        if ch.n == 1:
            eps = float(rng.uniform(0.01, 0.5))
            worst = max(worst, abs(divergences.dh_exact(geom, eps) - oracle.dh_small_n_check(geom, eps)))

    return [
        CheckResult("dh below renyi", chain_ok, f"alphas {DH_ALPHAS}, levels {DH_LEVELS}"),
        CheckResult("dh threshold sweep", worst <= 1e-5, f"max |error| {worst:.3g}"),
    ]


def check_whitening(seed, instances=20):
    """Decoder statistic unchanged by the orthogonal change of basis to the eigenvectors of Sigma."""
    rng = derive_rng(seed, config.STREAM_VERIFY, 3)
    worst = 0.0
    for k in range(instances):
        n = 1 + k % 8
        ch = random_channel(n, rng)
        cache = spectral_cache(ch)
        u = rng.standard_normal(n)
        y = ch.A @ u + rng.standard_normal(n)
        direct = float(np.sum((y - ch.A @ u) ** 2))
        rotated = residual_sq_in_basis(y, u, ch.A, cache.sigma_eigvecs)
        worst = max(worst, abs(rotated - direct) / max(direct, 1e-300))
    return [CheckResult("whitening identity", worst <= 1e-9, f"max relative error {worst:.3g}")]


def check_packings(seed, P=10.0):
    results = []
    for index, (n, eps) in enumerate(PACKING_GRID):
        r = eps * math.sqrt(n * P)
        target = bounds.code_size_target(n, eps)
        cb = construct_with_target(n, r, P, derive_seed(seed, index), target)
        cert = certify_packing(cb)
        ceiling = bounds.log2_packing_count_upper(n, P, r)
        passed = cb.N >= target and cert.passed and math.log2(cb.N) <= ceiling
        results.append(CheckResult(
            f"packing n={n} eps={eps}", passed,
            f"N={cb.N} (target {target}), min dist {cert.min_dist:.4g} > {2 * r:.4g}, log2 N <= {ceiling:.4g}",
        ))
    return results


def check_type1_oracle(seed, trials=100000):
    """AWGN n = 32, E1 = 0.04: missed identification against the chi-square tail."""
    n, E1 = 32, 0.04
    ch = preset("awgn", {"n": n, "sigma2": 1.0, "P": 1.0})
    cache = spectral_cache(ch)
    spec = make_decoder(n, E1, cache)
    cb = Codebook(n=n, codewords=np.zeros((1, n)), r=0.5, eps=0.5 / math.sqrt(n), P=1.0,
                  min_pairwise_dist=math.inf, seed=seed)
    estimate = estimate_lambda1(cb, spec, ch, cache, trials, seed)
    reference = oracle.chi2_tail(n, spec.threshold)
    bound = bounds.lambda_from_exponent(E1, n)
    return [
        CheckResult("type-I chi-square oracle", oracle_agreement(estimate.errors, trials, reference),
                    f"p_hat {estimate.p_hat:.5g} vs {reference:.5g}"),
        CheckResult("type-I below exp(-n E1)", estimate.within_bound(bound),
                    f"p_hat {estimate.p_hat:.5g} <= {bound:.5g}"),
    ]


def check_theorem3_end_to_end(seed, trials=100000):
    """AWGN n = 16, P = 20, tau = 0.5, E1 = 0.04: construct, simulate, compare."""
    n, P, tau, E1 = 16, 20.0, 0.5, 0.04
    ch = preset("awgn", {"n": n, "sigma2": 1.0, "P": P})
    cache = spectral_cache(ch)
    code = construct_from_theorem3(ch, cache, E1, tau, seed)
    cb = code.codebook

    lam1 = estimate_lambda1(cb, code.decoder, ch, cache, trials, seed)
    lam2 = estimate_lambda2(cb, code.decoder, ch, cache, trials, seed)
    bound1 = bounds.lambda_from_exponent(E1, n)
    bound2 = bounds.lambda_from_exponent(code.predicted_E2, n)

    # closest pair, chosen from geometry rather than from the estimates
    centers = np.asarray(cb.codewords) @ ch.A.T
    dist = np.sum((centers[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(dist, np.inf)
    i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
    reference = oracle.noncentral_chi2_cdf(n, float(dist[i, j]), code.decoder.threshold)
    accepted = int(round(lam2.per_item[i, j] * trials))
    # only a pair the decoder actually confuses exercises the type-II tail
    informative = reference > MIN_PAIR_ACCEPTANCE

    return [
        CheckResult("end-to-end type-I bound", lam1.within_bound(bound1), f"{lam1.p_hat:.4g} <= {bound1:.4g}"),
        CheckResult("end-to-end type-II bound", lam2.within_bound(bound2), f"{lam2.p_hat:.4g} <= {bound2:.4g}"),
        CheckResult("type-II noncentral chi-square oracle",
                    informative and oracle_agreement(accepted, trials, reference),
                    f"pair ({i}, {j}): {accepted / trials:.5g} vs {reference:.5g}"),
    ]


def check_regimes(nu_max=1.0, P=20.0, beta=0.5, tau=0.5):
    ns = [2 ** k for k in range(3, 11)]
    constant = [bounds.converse_rate_symmetric(n, 0.5, nu_max, P) for n in ns]
    shifted = [bounds.converse_rate_symmetric(n, 3.0 / n, nu_max, P) - 0.5 * math.log2(n) for n in ns]

    offset = abs(0.5 * math.log2(P / (16.0 * (1.0 + tau) * nu_max)))
    normalized_ok = True
    for k in range(1, 21):
        n = 2 ** k
        rate = bounds.achievable_rate_linearithmic(n, beta, tau, nu_max, P)
        normalized_ok = normalized_ok and abs(rate.normalized_rate - beta / 4.0) <= offset / k + 1e-12

    return [
        CheckResult("constant exponent: n-free converse", len(set(constant)) == 1, f"{constant[0]:.6g} bits"),
        CheckResult("exponent c/n: converse - log2(n)/2 constant", max(shifted) - min(shifted) <= 1e-12,
                    f"spread {max(shifted) - min(shifted):.3g}"),
        CheckResult("linearithmic normalized rate", normalized_ok, f"beta/4 = {beta / 4}"),
    ]


def check_cross_theorem():
    """
    Achievable linear rate below both converses over a grid of (E1, tau, P/nu_M).

    The symmetric converse does not depend on n once n E >= ln 16, so each
    cell takes a block length just above that threshold.
    """
    checked = violations = 0
    for ratio in (5.0, 10.0, 20.0):
        for E1 in np.logspace(-3, -1, 5):
            for tau in np.linspace(0.05, 1.0, 7):
                try:
                    achievable = bounds.achievable_rate_linear(E1, tau, 1.0, ratio)
                except HypothesisViolated:
                    continue
                checked += 1
                if achievable.rate_bits > bounds.converse_rate_asymmetric(E1, 1.0, ratio):
                    violations += 1
                E_min = min(E1, achievable.E2)
                n = math.ceil(bounds.LN16 / E_min) + 1
                if achievable.rate_bits > bounds.converse_rate_symmetric(n, E_min, 1.0, ratio):
                    violations += 1
    return [CheckResult("achievable below converse", violations == 0 and checked > 0,
                        f"{checked} feasible cells, {violations} violation(s)")]


def check_reproducibility(seed, trials=2000):
    cfg = parse_config({
        "channel": {"preset": "awgn", "P": 20.0, "sigma2": 1.0},
        "n": [8, 12], "E1": [0.02, 0.04], "tau": [0.5],
        "trials": trials, "seed": seed, "n_cap": 4, "max_codewords": 8,
    })
    texts = [format_csv("sweep", cfg.config_hash(), cfg.seed, run_grid(cfg, threads=threads))
             for threads in (1, 4)]
    return [CheckResult("sweep reproducible across threads", texts[0] == texts[1], f"{len(cfg.grid())} cells")]


def run_suite(seed=config.DEFAULT_SEED, trials=100000, instances=20):
    """
    Run every check.

    Returns:
        list of CheckResult
    """
    results = []
    for check in (
        lambda: check_closed_forms(seed, instances),
        lambda: check_dh_chain(seed, instances),
        lambda: check_whitening(seed, instances),
        lambda: check_packings(seed),
        lambda: check_type1_oracle(seed, trials),
        lambda: check_theorem3_end_to_end(seed, trials),
        check_regimes,
        check_cross_theorem,
        lambda: check_reproducibility(seed),
    ):
        batch = check()
        for result in batch:
            logger.info(f"{'PASS' if result.passed else 'FAIL'} {result.name}: {result.detail}")
        results.extend(batch)
    return results


def format_table(results):
    width = max(len(result.name) for result in results)
    lines = [f"{'check'.ljust(width)}  result  detail"]
    for result in results:
        lines.append(f"{result.name.ljust(width)}  {'PASS' if result.passed else 'FAIL':6}  {result.detail}")
    passed = sum(result.passed for result in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines)
