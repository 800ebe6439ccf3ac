#!/usr/bin/env python3
"""
DI codes over linear Gaussian channels - batch experiment driver.

Subcommands: bounds, construct, simulate, sweep, verify.
Exit codes: 0 success, 1 config error, 2 infeasible parameters, 3 numerical failure.
"""

import argparse
import dataclasses
import math
import sys

from dicodes import bounds, config
from dicodes.channel import spectral_cache
from dicodes.codebook import construct_from_theorem3
from dicodes.data_manager import (
    load_codebook,
    load_config,
    output_path,
    save_certificate,
    save_codebook,
    save_csv,
    save_plot_script,
)
from dicodes.decoder import make_decoder
from dicodes.errors import (
    ConfigError,
    DICodeError,
    DimensionMismatch,
    InfeasibleParameters,
    InvalidAlpha,
    InvalidChannel,
    NumericalFailure,
    OutOfRange,
)
from dicodes.experiment import parse_config
from dicodes.montecarlo import estimate_lambda1, estimate_lambda2
from dicodes.sweep import run_grid
from dicodes.utils import setup_logger
from dicodes.verify import format_table, run_suite

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3


class OutputError(DICodeError):
    pass


def build_parser():
    parser = argparse.ArgumentParser(prog="dicodes", description="Deterministic identification codes over "
                                                                 "linear Gaussian channels")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("bounds", "evaluate converse and achievability formulas over the grid"),
        ("construct", "build the distance-decoding code of the first grid cell"),
        ("simulate", "estimate both error probabilities of a saved codebook"),
        ("sweep", "full pipeline over the grid, CSV plus plot script"),
        ("verify", "run the oracle suite and print a pass/fail table"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=name != "verify", help="JSON experiment config")
        cmd.add_argument("--out", help="output directory (overrides config)")
        cmd.add_argument("--seed", type=int, help="master seed (overrides config)")
        cmd.add_argument("--threads", type=int, default=config.DEFAULT_THREADS,
                         help="worker threads; never changes results")
        if name in ("construct", "sweep"):
            cmd.add_argument("--strict-size", action="store_true",
                             help="fail instead of truncating codebooks above the size cap")
        if name == "simulate":
            cmd.add_argument("--codebook", required=True, help="codebook file written by construct")
        if name == "verify":
            cmd.add_argument("--trials", type=int, help="Monte Carlo trials per message/pair")

    return parser


def effective_config(args):
    """Load the config and apply --seed and --out."""
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = parse_config({"channel": {"preset": "awgn", "P": 1.0, "sigma2": 1.0}, "n": [1], "E1": [1.0]})
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out:
        cfg = dataclasses.replace(cfg, output={**cfg.output, "dir": args.out})
    return cfg


def _first_cell(cfg):
    cell = cfg.grid()[0]
    if cell.E1 is None or cell.E1 <= 0:
        raise ConfigError("construct and simulate need a positive E1 in the config")
    return cell


def _save(saved, path):
    if not saved:
        raise OutputError(f"could not write {path}")


def cmd_bounds(cfg, args):
    rows = run_grid(cfg, simulate=False, threads=args.threads)
    path = output_path(cfg, "bounds.csv")
    _save(save_csv(path, "bounds", cfg.config_hash(), cfg.seed, rows), path)
    print(f"{len(rows)} row(s) written to {path}")
    return EXIT_OK


def cmd_construct(cfg, args):
    cell = _first_cell(cfg)
    ch = cfg.channel_for(cell.n)
    cache = spectral_cache(ch)
    code = construct_from_theorem3(ch, cache, cell.E1, cell.tau, cfg.seed, n_cap=cfg.n_cap,
                                   max_codewords=cfg.max_codewords, strict_size=args.strict_size,
                                   variant=cfg.decoder)

    codebook_path = output_path(cfg, "codebook.json")
    certificate_path = output_path(cfg, "codebook.cert.txt")
    _save(save_codebook(code.codebook, codebook_path), codebook_path)
    _save(save_certificate(code, cache, certificate_path), certificate_path)

    print(f"Codebook: N={code.codebook.N}, n={ch.n}, eps={code.eps:.6g}, r={code.codebook.r:.6g}")
    print(f"Written: {codebook_path}")
    print(f"Written: {certificate_path}")
    return EXIT_OK


def cmd_simulate(cfg, args):
    cb = load_codebook(args.codebook)
    cell = _first_cell(cfg)
    ch = cfg.channel_for(cb.n)
    if not math.isclose(cb.P, ch.P):
        logger.warning(f"Codebook power {cb.P} differs from channel power {ch.P}")
    cache = spectral_cache(ch)
    spec = make_decoder(ch.n, cell.E1, cache, variant=cfg.decoder)

    row = {"n": ch.n, "E1_nats": cell.E1, "tau": cell.tau, "eps": cb.eps, "r": cb.r, "N": cb.N,
           "log2_N": math.log2(cb.N), "rate_bits": math.log2(cb.N) / ch.n, "seed": cfg.seed}
    if ch.n >= 2:
        row["rate_per_log2n"] = row["log2_N"] / (ch.n * math.log2(ch.n))
    tokens = []

    lam1 = estimate_lambda1(cb, spec, ch, cache, cfg.trials, cfg.seed, threads=args.threads, level=cfg.ci_level)
    row.update(lambda1_hat=lam1.p_hat, lambda1_ci_high=lam1.ci_high,
               lambda1_bound=bounds.lambda_from_exponent(cell.E1, ch.n))
    passed = lam1.within_bound(row["lambda1_bound"])

    if cb.N >= 2:
        lam2 = estimate_lambda2(cb, spec, ch, cache, cfg.trials, cfg.seed, pair_strategy=cfg.pair_strategy,
                                nearest_k=cfg.nearest_k, threads=args.threads, level=cfg.ci_level)
        row.update(lambda2_hat=lam2.p_hat, lambda2_ci_high=lam2.ci_high)
        try:
            E2 = bounds.type2_exponent(cb.eps, cell.E1, cache.nu_M, ch.P)
            row.update(E2_nats=E2, lambda2_bound=bounds.lambda_from_exponent(E2, ch.n))
            passed = passed and lam2.within_bound(row["lambda2_bound"])
        except InfeasibleParameters as e:
            logger.warning(f"No type-II guarantee for this codebook: {str(e)}")

    tokens.append("ok" if passed else "bound_violation")
    if cb.saturated is False:
        tokens.append("truncated")
    row["status"] = "|".join(tokens)

    path = output_path(cfg, "simulate.csv")
    _save(save_csv(path, "simulate", cfg.config_hash(), cfg.seed, [row]), path)
    print(f"lambda1 = {lam1.p_hat:.6g} (bound {row['lambda1_bound']:.6g})")
    if "lambda2_hat" in row:
        print(f"lambda2 = {row['lambda2_hat']:.6g} (bound {row.get('lambda2_bound', float('nan')):.6g})")
    print(f"Written: {path}")
    return EXIT_OK


def cmd_sweep(cfg, args):
    rows = run_grid(cfg, simulate=True, threads=args.threads, strict_size=args.strict_size)
    csv_path = output_path(cfg, "sweep.csv")
    script_path = output_path(cfg, "sweep_plot.py")
    _save(save_csv(csv_path, "sweep", cfg.config_hash(), cfg.seed, rows), csv_path)
    _save(save_plot_script(script_path, csv_path), script_path)

    problems = [row for row in rows if not row["status"].startswith("ok")]
    print(f"{len(rows)} row(s) written to {csv_path} ({len(problems)} with problem status)")
    print(f"Plot script: {script_path}")
    return EXIT_OK


def cmd_verify(cfg, args):
    trials = args.trials if args.trials else config.DEFAULT_TRIALS
    results = run_suite(seed=cfg.seed, trials=trials)
    print(format_table(results))
    return EXIT_OK if all(result.passed for result in results) else EXIT_NUMERICAL


COMMANDS = {
    "bounds": cmd_bounds,
    "construct": cmd_construct,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None):
    """
    Main entry point.

    Args:
        argv: Argument list (defaults to sys.argv[1:])

    Returns:
        int: Exit code
    """
    args = build_parser().parse_args(argv)

    print("=" * 60)
    print(f"dicodes {args.command}")
    print("=" * 60)

    try:
        cfg = effective_config(args)
        logger.info(f"Running {args.command}: seed={cfg.seed}, config_sha256={cfg.config_hash()}")
        return COMMANDS[args.command](cfg, args)

    except ConfigError as e:
        logger.error(f"Configuration error: {str(e)}")
        print(f"\nERROR: {str(e)}")
        return EXIT_CONFIG
    except OutputError as e:
        logger.error(str(e))
        print(f"\nERROR: {str(e)}")
        return EXIT_CONFIG
    except NumericalFailure as e:
        logger.error(f"Numerical failure: {str(e)}")
        print(f"\nERROR: {str(e)}")
        return EXIT_NUMERICAL
    except (InfeasibleParameters, InvalidChannel, DimensionMismatch, InvalidAlpha, OutOfRange) as e:
        logger.error(f"Infeasible parameters: {str(e)}")
        print(f"\nERROR: {str(e)}")
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
