"""
Per-cell pipeline and grid orchestration.

A cell always gets its converse and achievability formulas; the code is
constructed and simulated only when asked and when the parameters allow it.
Library errors become status tokens on the row, never aborted sweeps.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

from dicodes import bounds
from dicodes.channel import spectral_cache
from dicodes.codebook import construct_from_theorem3
from dicodes.errors import HypothesisViolated, InfeasibleParameters, NumericalFailure, SizeCapExceeded
from dicodes.montecarlo import estimate_lambda1, estimate_lambda2
from dicodes.utils import derive_seed, setup_logger

logger = setup_logger(__name__)

# Tokens that mean the row did not run cleanly
PROBLEM_TOKENS = ("bounds_only", "infeasible", "size_cap", "degenerate_rate", "bound_violation",
                  "numerical_failure")


def cell_seed(cfg, cell):
    return derive_seed(cfg.seed, cell.index)


def _converse_columns(row, report):
    row["conv_thm1_bits"] = report.R_conv_symmetric_bits
    row["conv_thm2_bits"] = report.R_conv_asymmetric_bits


def _finish(row, tokens):
    if not any(token in PROBLEM_TOKENS for token in tokens):
        tokens.insert(0, "ok")
    row["status"] = "|".join(tokens)
    return row


def run_cell(cfg, cell, simulate=True, strict_size=False, threads=1):
    """
    Evaluate one grid cell.

    Args:
        cfg: ExperimentConfig
        cell: GridCell (exponents in nats)
        simulate: Construct the code and estimate both errors
        strict_size: Raise SizeCapExceeded instead of recording it
        threads: Monte Carlo worker threads (speed only)

    Returns:
        dict: Row keyed by data_manager.CSV_COLUMNS
    """
    ch = cfg.channel_for(cell.n)
    cache = spectral_cache(ch)
    seed = cell_seed(cfg, cell)
    n = ch.n
    tokens = ["from_bits"] if cfg.exponent_base == "bits" else []

    E1 = cell.E1
    E2 = cell.E2 if cell.E2 is not None else E1
    row = {"n": n, "E1_nats": E1, "E2_nats": E2, "tau": cell.tau, "seed": seed}

    report = bounds.bound_report(n, E1, E2, cache, ch.P)
    _converse_columns(row, report)

    if E1 is None or E1 <= 0:
        tokens.append("bounds_only")
        return _finish(row, tokens)

    try:
        achievable = bounds.achievable_rate_linear(E1, cell.tau, cache.nu_M, ch.P)
    except HypothesisViolated as e:
        logger.warning(f"Cell {cell.index}: construction hypotheses fail ({str(e)})")
        tokens.append("infeasible")
        return _finish(row, tokens)

    eps = achievable.eps
    log2_N = bounds.log2_code_size_lower(n, eps)
    row.update({
        "eps": eps,
        "r": eps * ch.power_radius,
        "ach_thm3_bits": achievable.rate_bits,
        "log2_N": log2_N,
    })
    if achievable.degenerate:
        tokens.append("degenerate_rate")

    # the constructed code has type-II exponent achievable.E2, whatever the cell asked for
    achieved = bounds.bound_report(n, E1, achievable.E2, cache, ch.P)
    if simulate:
        row["E2_nats"] = achievable.E2
        _converse_columns(row, achieved)

    converse = achieved.min_converse_bits()
    if converse is not None and achievable.rate_bits > converse:
        logger.warning(f"Cell {cell.index}: achievable rate {achievable.rate_bits:.6g} exceeds converse {converse:.6g}")
        tokens.append("bound_violation")

    if simulate:
        try:
            _simulate(cfg, ch, cache, E1, cell.tau, seed, strict_size, threads, row, tokens)
        except SizeCapExceeded as e:
            if strict_size:
                raise
            logger.warning(f"Cell {cell.index}: {str(e)}")
            tokens.append("size_cap")
        except NumericalFailure as e:
            logger.error(f"Cell {cell.index}: numerical failure: {str(e)}")
            tokens.append("numerical_failure")
        except InfeasibleParameters as e:
            logger.warning(f"Cell {cell.index}: infeasible: {str(e)}")
            tokens.append("infeasible")
    else:
        tokens.append("bounds_only")

    log2_N = row["log2_N"]
    row["rate_bits"] = log2_N / n
    if n >= 2:
        row["rate_per_log2n"] = log2_N / (n * math.log2(n))
    return _finish(row, tokens)


def _simulate(cfg, ch, cache, E1, tau, seed, strict_size, threads, row, tokens):
    code = construct_from_theorem3(ch, cache, E1, tau, seed, n_cap=cfg.n_cap, max_codewords=cfg.max_codewords,
                                   strict_size=strict_size, variant=cfg.decoder)
    cb = code.codebook
    row["N"] = cb.N
    if code.truncated:
        tokens.append("truncated")
    else:
        row["log2_N"] = math.log2(cb.N)

    lam1 = estimate_lambda1(cb, code.decoder, ch, cache, cfg.trials, seed, threads=threads, level=cfg.ci_level)
    row["lambda1_hat"] = lam1.p_hat
    row["lambda1_ci_high"] = lam1.ci_high
    row["lambda1_bound"] = bounds.lambda_from_exponent(E1, ch.n)
    violated = not lam1.within_bound(row["lambda1_bound"])

    if cb.N >= 2:
        lam2 = estimate_lambda2(cb, code.decoder, ch, cache, cfg.trials, seed, pair_strategy=cfg.pair_strategy,
                                nearest_k=cfg.nearest_k, threads=threads, level=cfg.ci_level)
        row["lambda2_hat"] = lam2.p_hat
        row["lambda2_ci_high"] = lam2.ci_high
        row["lambda2_bound"] = bounds.lambda_from_exponent(code.predicted_E2, ch.n)
        violated = violated or not lam2.within_bound(row["lambda2_bound"])

    if violated and "bound_violation" not in tokens:
        logger.warning(f"Empirical error above its analytic bound at n={ch.n}, E1={E1}, tau={tau}")
        tokens.append("bound_violation")


def run_grid(cfg, simulate=True, threads=1, strict_size=False):
    """
    Run every grid cell; rows come back in grid order whatever the thread count.

    Args:
        cfg: ExperimentConfig
        simulate: Construct and simulate where possible
        threads: Worker threads over cells
        strict_size: Propagate SizeCapExceeded

    Returns:
        list of row dicts
    """
    cells = cfg.grid()
    logger.info(f"Running {len(cells)} cell(s) with {threads} thread(s), simulate={simulate}")

    def run(cell):
        return run_cell(cfg, cell, simulate=simulate, strict_size=strict_size)

    if threads <= 1:
        rows = [run(cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            rows = list(executor.map(run, cells))

    failed = sum(1 for row in rows if not row["status"].startswith("ok"))
    logger.info(f"Grid finished: {len(rows)} row(s), {failed} with problem status")
    return rows
