import csv
import io
import json
import math
import os

import numpy as np

from dicodes import bounds
from dicodes.codebook import Codebook, certify_packing
from dicodes.errors import ConfigError
from dicodes.experiment import parse_config
from dicodes.utils import atomic_write_text, format_number, setup_logger

logger = setup_logger(__name__)

CODEBOOK_FORMAT = "dicodes-codebook"
CODEBOOK_VERSION = 1

CSV_COLUMNS = [
    "n", "E1_nats", "E2_nats", "tau", "eps", "r", "N", "log2_N", "rate_bits", "rate_per_log2n",
    "conv_thm1_bits", "conv_thm2_bits", "ach_thm3_bits",
    "lambda1_hat", "lambda1_ci_high", "lambda1_bound",
    "lambda2_hat", "lambda2_ci_high", "lambda2_bound",
    "seed", "status",
]


def output_path(cfg, suffix):
    """
    Path of an output file inside the configured results directory.

    Args:
        cfg: ExperimentConfig
        suffix: File name suffix, e.g. "bounds.csv"

    Returns:
        str: Path
    """
    return os.path.join(cfg.output["dir"], f"{cfg.output['prefix']}_{suffix}")


def load_config(config_path):
    """
    Load and validate an experiment config file.

    Args:
        config_path: Path to JSON config

    Returns:
        ExperimentConfig
    """
    try:
        with open(config_path, 'r') as f:
            doc = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {config_path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {config_path} is not valid JSON: {str(e)}") from e
    except OSError as e:
        raise ConfigError(f"cannot read config file {config_path}: {str(e)}") from e

    cfg = parse_config(doc)
    logger.info(f"Loaded config {config_path}: {len(cfg.grid())} grid cell(s)")
    return cfg


def codebook_to_dict(cb):
    """
    Serializable form of a codebook. Floats keep repr precision through json.

    Args:
        cb: Codebook

    Returns:
        dict
    """
    return {
        "format": CODEBOOK_FORMAT,
        "version": CODEBOOK_VERSION,
        "n": cb.n,
        "N": cb.N,
        "r": cb.r,
        "eps": cb.eps,
        "P": cb.P,
        "seed": cb.seed,
        "min_pairwise_dist": None if math.isinf(cb.min_pairwise_dist) else cb.min_pairwise_dist,
        "saturated": cb.saturated,
        "codewords": np.asarray(cb.codewords).tolist(),
    }


def save_codebook(cb, path):
    """
    Save a codebook with atomic write.

    Args:
        cb: Codebook
        path: Destination JSON file

    Returns:
        bool: True if successful
    """
    text = json.dumps(codebook_to_dict(cb), indent=1)
    saved = atomic_write_text(path, text + "\n")
    if saved:
        logger.info(f"Codebook saved: {path} (N={cb.N}, n={cb.n})")
    return saved


def load_codebook(path):
    """
    Load a codebook file and check its header against the payload.

    Args:
        path: Codebook JSON file

    Returns:
        Codebook
    """
    try:
        with open(path, 'r') as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read codebook {path}: {str(e)}") from e

    if doc.get("format") != CODEBOOK_FORMAT or doc.get("version") != CODEBOOK_VERSION:
        raise ConfigError(f"{path} is not a {CODEBOOK_FORMAT} v{CODEBOOK_VERSION} file")

    try:
        codewords = np.array(doc["codewords"], dtype=float).reshape(int(doc["N"]), int(doc["n"]))
        min_dist = doc["min_pairwise_dist"]
        cb = Codebook(
            n=int(doc["n"]),
            codewords=codewords,
            r=float(doc["r"]),
            eps=float(doc["eps"]),
            P=float(doc["P"]),
            min_pairwise_dist=math.inf if min_dist is None else float(min_dist),
            seed=int(doc["seed"]),
            saturated=bool(doc["saturated"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"malformed codebook {path}: {str(e)}") from e

    codewords.setflags(write=False)
    logger.info(f"Loaded codebook {path}: N={cb.N}, n={cb.n}")
    return cb


def format_certificate(code, cache):
    """
    Human-readable certificate of a constructed distance-decoding code.

    Args:
        code: Theorem3Code
        cache: SpectralCache of the channel

    Returns:
        str
    """
    cb = code.codebook
    cert = certify_packing(cb)
    target = bounds.code_size_target(cb.n, cb.eps)
    ceiling = bounds.log2_packing_count_upper(cb.n, cb.P, cb.r)

    lines = [
        "dicodes packing certificate",
        f"n                      {cb.n}",
        f"N                      {cb.N}",
        f"log2 N                 {math.log2(cb.N):.6f}",
        f"P                      {cb.P!r}",
        f"eps                    {cb.eps!r}",
        f"r                      {cb.r!r}",
        f"seed                   {cb.seed}",
        f"min pairwise distance  {cert.min_dist!r} (need > {cert.required_min_dist!r})",
        f"max codeword norm      {cert.max_norm!r} (limit {cert.norm_limit!r})",
        f"packing                {'PASS' if cert.packing_ok else 'FAIL'}",
        f"power                  {'PASS' if cert.norms_ok else 'FAIL'}",
        f"size target            {target} ({'met' if cb.N >= target else 'not met'})",
        f"log2 N upper bound     {ceiling:.6f}",
        f"saturated              {cb.saturated}",
        f"truncated              {code.truncated} (predicted log2 N {code.predicted_log2_N:.6f})",
        f"decoder                {code.decoder.regime}, threshold {code.decoder.threshold!r}",
        f"predicted E2 (nats)    {code.predicted_E2!r}",
    ]
    if cache.a_sv_min < 1.0:
        lines.append(
            f"warning                A contracts distances (smallest singular value {cache.a_sv_min:.6g}); "
            f"predicted E2 is not guaranteed"
        )
    return "\n".join(lines) + "\n"


def save_certificate(code, cache, path):
    saved = atomic_write_text(path, format_certificate(code, cache))
    if saved:
        logger.info(f"Certificate saved: {path}")
    return saved


def format_csv(command, config_hash, master_seed, rows, columns=CSV_COLUMNS):
    """
    Render result rows as CSV text with the provenance comment line first.

    Args:
        command: Subcommand name
        config_hash: SHA-256 of the effective config
        master_seed: Master seed
        rows: list of dicts keyed by column name (missing keys are empty cells)
        columns: Column order

    Returns:
        str
    """
    buffer = io.StringIO()
    buffer.write(f"# dicodes {command} config_sha256={config_hash} master_seed={master_seed}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([
            row.get(column, "") if column == "status" else format_number(row.get(column))
            for column in columns
        ])
    return buffer.getvalue()


def save_csv(path, command, config_hash, master_seed, rows, columns=CSV_COLUMNS):
    """
    Save result rows with atomic write.

    Returns:
        bool: True if successful
    """
    saved = atomic_write_text(path, format_csv(command, config_hash, master_seed, rows, columns))
    if saved:
        logger.info(f"Wrote {len(rows)} row(s) to {path}")
    return saved


def read_csv(path):
    """
    Read a results CSV back, skipping comment lines.

    Returns:
        list of dicts with string values
    """
    with open(path, 'r', newline="") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


PLOT_SCRIPT = '''#!/usr/bin/env python3
"""Plot rate against reliability and normalized rate against block length from {csv_name}."""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
CSV_PATH = os.path.join(HERE, "{csv_name}")


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(line for line in f if not line.startswith("#")))


def column(rows, key):
    return [float(row[key]) if row[key] not in ("", None) else float("nan") for row in rows]


def main():
    rows = read_rows(CSV_PATH)
    rows = [row for row in rows if row["E1_nats"] != ""]
    rows.sort(key=lambda row: (int(row["n"]), float(row["E1_nats"])))

    fig, (ax_rate, ax_norm) = plt.subplots(1, 2, figsize=(11, 4.5))
    for n in sorted({{int(row["n"]) for row in rows}}):
        subset = [row for row in rows if int(row["n"]) == n]
        E1 = column(subset, "E1_nats")
        ax_rate.plot(E1, column(subset, "conv_thm1_bits"), "--", label=f"symmetric converse, n={{n}}")
        ax_rate.plot(E1, column(subset, "conv_thm2_bits"), ":", label=f"asymmetric converse, n={{n}}")
        ax_rate.plot(E1, column(subset, "ach_thm3_bits"), "-", label=f"achievable, n={{n}}")
    ax_rate.set_xscale("log")
    ax_rate.set_xlabel("E1 (nats)")
    ax_rate.set_ylabel("rate (bits / symbol)")
    ax_rate.legend(fontsize=7)

    by_n = {{}}
    for row in rows:
        if row["rate_per_log2n"] != "":
            by_n.setdefault(int(row["n"]), []).append(float(row["rate_per_log2n"]))
    ns = sorted(by_n)
    ax_norm.plot(ns, [max(by_n[n]) for n in ns], "o-")
    ax_norm.set_xscale("log", base=2)
    ax_norm.set_xlabel("n")
    ax_norm.set_ylabel("log2 N / (n log2 n)")

    fig.tight_layout()
    out = os.path.splitext(CSV_PATH)[0] + ".png"
    fig.savefig(out, dpi=150)
    print(f"saved {{out}}")


if __name__ == "__main__":
    main()
'''


def save_plot_script(path, csv_path):
    """
    Write a standalone plotting script for a sweep CSV in the same directory.

    Returns:
        bool: True if successful
    """
    script = PLOT_SCRIPT.format(csv_name=os.path.basename(csv_path))
    saved = atomic_write_text(path, script)
    if saved:
        logger.info(f"Plot script saved: {path}")
    return saved
