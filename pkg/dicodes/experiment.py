"""
Experiment configuration: parsing, validation and grid expansion.

A config is one JSON document. Exponents may be declared in bits
(lambda = 2^{-nE}); they are converted to nats once, here.
"""
from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import List, Optional

from dicodes import config
from dicodes.bounds import bits_to_nats
from dicodes.channel import PRESET_KINDS, preset
from dicodes.errors import ConfigError, DimensionMismatch, InvalidChannel
from dicodes.montecarlo import PAIR_STRATEGIES
from dicodes.utils import canonical_hash, setup_logger

logger = setup_logger(__name__)

CHANNEL_KEYS = ("preset", "P", "sigma2", "g", "gains", "taps", "rho", "A", "Sigma")
EXPONENT_BASES = ("nats", "bits")
DECODER_VARIANTS = ("standard", "chernoff")
FIXED_N_PRESETS = ("diag_fading", "explicit")


@dataclass(frozen=True)
class GridCell:
    index: int
    n: int
    E1: Optional[float]
    E2: Optional[float]
    tau: float


@dataclass(frozen=True)
class ExperimentConfig:
    channel: dict
    n: List[int]
    E1: Optional[List[float]] = None
    E2: Optional[List[float]] = None
    exponent_base: str = "nats"
    tau: List[float] = field(default_factory=lambda: [0.5])
    trials: int = config.DEFAULT_TRIALS
    seed: int = config.DEFAULT_SEED
    pair_strategy: str = "auto"
    nearest_k: int = config.NEAREST_K
    n_cap: int = config.N_CAP_LOG2
    max_codewords: int = config.MAX_CODEWORDS
    ci_level: float = config.CI_LEVEL
    decoder: str = "standard"
    output: dict = field(default_factory=lambda: {"dir": config.RESULTS_PATH, "prefix": "dicodes"})

    @classmethod
    def from_dict(cls, doc):
        return parse_config(doc)

    def to_dict(self):
        """Plain JSON-ready document; parse_config(to_dict()) reproduces the config."""
        doc = dataclasses.asdict(self)
        doc["channel"] = dict(self.channel)
        doc["output"] = dict(self.output)
        return doc

    def with_seed(self, seed):
        return dataclasses.replace(self, seed=int(seed))

    def config_hash(self):
        """Hash of everything that shapes results; the output location is left out."""
        doc = self.to_dict()
        doc.pop("output")
        return canonical_hash(doc)

    def to_nats(self, value):
        if value is None:
            return None
        return bits_to_nats(value) if self.exponent_base == "bits" else float(value)

    def grid(self):
        """
        Expand the (n, E1, E2, tau) grid in lexicographic order.

        Returns:
            list of GridCell, exponents in nats
        """
        e1_values = self.E1 if self.E1 is not None else [None]
        e2_values = self.E2 if self.E2 is not None else [None]
        cells = []
        for index, (n, E1, E2, tau) in enumerate(itertools.product(self.n, e1_values, e2_values, self.tau)):
            cells.append(GridCell(index=index, n=n, E1=self.to_nats(E1), E2=self.to_nats(E2), tau=tau))
        return cells

    def channel_for(self, n):
        """
        Build the configured channel at block length n.

        Raises:
            ConfigError: for any invalid channel description
        """
        params = {key: value for key, value in self.channel.items() if key != "preset"}
        params["n"] = n
        try:
            return preset(self.channel["preset"], params)
        except (InvalidChannel, DimensionMismatch) as e:
            raise ConfigError(f"invalid channel at n={n}: {str(e)}") from e


def _number_list(doc, key, kind=float, required=True):
    value = doc.get(key)
    if value is None:
        if required:
            raise ConfigError(f"config key '{key}' is required")
        return None
    if not isinstance(value, list):
        value = [value]
    if not value:
        raise ConfigError(f"config key '{key}' must be a nonempty list")
    try:
        items = [kind(v) for v in value]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"config key '{key}' must hold numbers: {str(e)}") from e
    if kind is int and any(int(v) != v for v in value):
        raise ConfigError(f"config key '{key}' must hold integers, got {value}")
    return items


def _choice(doc, key, choices, default):
    value = doc.get(key, default)
    if value not in choices:
        raise ConfigError(f"config key '{key}' must be one of {choices}, got '{value}'")
    return value


def _positive_int(doc, key, default):
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"config key '{key}' must be a positive integer, got {value!r}")
    return value


def _channel(doc):
    channel = doc.get("channel")
    if not isinstance(channel, dict):
        raise ConfigError("config key 'channel' must be an object")
    unknown = sorted(set(channel) - set(CHANNEL_KEYS))
    if unknown:
        raise ConfigError(f"unknown channel key(s): {', '.join(unknown)}")
    if channel.get("preset") not in PRESET_KINDS:
        raise ConfigError(f"channel preset must be one of {PRESET_KINDS}, got '{channel.get('preset')}'")
    if channel.get("P") is None:
        raise ConfigError("channel key 'P' is required")
    return dict(channel)


def parse_config(doc):
    """
    Validate a config document.

    Args:
        doc: dict decoded from JSON

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: naming the offending key
    """
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    n_values = _number_list(doc, "n", kind=int)
    if any(n < 1 for n in n_values):
        raise ConfigError(f"block lengths must be positive, got {n_values}")

    E1 = _number_list(doc, "E1", required=False)
    E2 = _number_list(doc, "E2", required=False)
    if E1 is None and E2 is None:
        raise ConfigError("at least one of 'E1' and 'E2' must be given")
    for name, values in (("E1", E1), ("E2", E2)):
        if values is not None and any(v < 0 for v in values):
            raise ConfigError(f"exponents must be nonnegative, got {name}={values}")

    tau = _number_list(doc, "tau", required=False) or [0.5]
    ci_level = doc.get("ci_level", config.CI_LEVEL)
    if not isinstance(ci_level, (int, float)) or not 0.0 < ci_level < 1.0:
        raise ConfigError(f"config key 'ci_level' must lie in (0, 1), got {ci_level!r}")

    seed = doc.get("seed", config.DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"config key 'seed' must be a nonnegative integer, got {seed!r}")

    output = doc.get("output", {})
    if not isinstance(output, dict) or set(output) - {"dir", "prefix"}:
        raise ConfigError("config key 'output' must be an object with optional 'dir' and 'prefix'")
    output = {"dir": output.get("dir", config.RESULTS_PATH), "prefix": output.get("prefix", "dicodes")}

    cfg = ExperimentConfig(
        channel=_channel(doc),
        n=n_values,
        E1=E1,
        E2=E2,
        exponent_base=_choice(doc, "exponent_base", EXPONENT_BASES, "nats"),
        tau=tau,
        trials=_positive_int(doc, "trials", config.DEFAULT_TRIALS),
        seed=seed,
        pair_strategy=_choice(doc, "pair_strategy", PAIR_STRATEGIES, "auto"),
        nearest_k=_positive_int(doc, "nearest_k", config.NEAREST_K),
        n_cap=_positive_int(doc, "n_cap", config.N_CAP_LOG2),
        max_codewords=_positive_int(doc, "max_codewords", config.MAX_CODEWORDS),
        ci_level=float(ci_level),
        decoder=_choice(doc, "decoder", DECODER_VARIANTS, "standard"),
        output=output,
    )

    if cfg.channel["preset"] in FIXED_N_PRESETS:
        for n in cfg.n:
            cfg.channel_for(n)

    logger.debug(f"Parsed config: {len(cfg.grid())} grid cells, seed={cfg.seed}")
    return cfg
