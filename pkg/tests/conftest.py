import numpy as np
import pytest

from dicodes.channel import preset, spectral_cache
from dicodes.verify import random_channel


@pytest.fixture
def rng():
    """Seeded generator for test-local randomness."""
    return np.random.default_rng(12345)


@pytest.fixture
def make_awgn():
    """Factory for AWGN channels and their spectral caches."""
    def _make(n, sigma2=1.0, P=1.0):
        ch = preset("awgn", {"n": n, "sigma2": sigma2, "P": P})
        return ch, spectral_cache(ch)
    return _make


@pytest.fixture
def make_random_channel(rng):
    """Factory for well-conditioned random channels with SPD noise and invertible A."""
    def _make(n, P=1.0):
        ch = random_channel(n, rng, P=P)
        return ch, spectral_cache(ch)
    return _make


@pytest.fixture
def sweep_config_doc():
    """Small AWGN grid that constructs truncated codebooks quickly."""
    return {
        "channel": {"preset": "awgn", "P": 20.0, "sigma2": 1.0},
        "n": [8, 12],
        "E1": [0.02, 0.04],
        "tau": [0.5],
        "trials": 500,
        "seed": 7,
        "n_cap": 4,
        "max_codewords": 8,
    }
