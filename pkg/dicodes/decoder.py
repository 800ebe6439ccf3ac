"""Distance decoder: accept message i iff ||y - A u_i||^2 <= threshold."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from dicodes import bounds
from dicodes.errors import DimensionMismatch, OutOfRange
from dicodes.utils import setup_logger

logger = setup_logger(__name__)

REGIMES = ("sqrt", "linear", "chernoff", "fixed")


@dataclass(frozen=True)
class DecoderSpec:
    threshold: float
    E1: float
    regime: str

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise OutOfRange(f"decoder regime must be one of {REGIMES}, got '{self.regime}'")
        if not self.threshold > 0:
            raise OutOfRange(f"decoder threshold must be positive, got {self.threshold}")
        if self.regime == "sqrt" and not self.E1 <= 1.0:
            raise OutOfRange(f"sqrt regime needs E1 <= 1, got E1={self.E1}")
        if self.regime == "linear" and not self.E1 > 1.0:
            raise OutOfRange(f"linear regime needs E1 > 1, got E1={self.E1}")

    @classmethod
    def fixed(cls, threshold):
        """Decoder with an arbitrary threshold, not tied to a target exponent."""
        return cls(threshold=float(threshold), E1=math.nan, regime="fixed")


def make_decoder(n, E1, cache, variant="standard"):
    """
    Build the decoder for a target type-I exponent.

    Args:
        n: Block length
        E1: Target type-I exponent (nats)
        cache: SpectralCache
        variant: "standard" (threshold of the construction) or "chernoff" (tight threshold)

    Returns:
        DecoderSpec
    """
    if variant == "standard":
        threshold = bounds.decoder_threshold(n, E1, cache)
        regime = "sqrt" if E1 <= 1.0 else "linear"
    elif variant == "chernoff":
        threshold = bounds.tight_decoder_threshold(n, E1, cache)
        regime = "chernoff"
    else:
        raise OutOfRange(f"unknown decoder variant '{variant}'")

    if not threshold > cache.trace_sigma:
        raise OutOfRange(f"threshold {threshold:.6g} must exceed Tr Sigma = {cache.trace_sigma:.6g}")
    return DecoderSpec(threshold=threshold, E1=float(E1), regime=regime)


def _as_vector(v, n, name):
    v = np.asarray(v, dtype=float).ravel()
    if v.shape != (n,):
        raise DimensionMismatch(f"{name} must have length {n}, got {v.shape[0]}")
    return v


def identify(y, u, A, spec):
    """
    Decide whether the tested message u was sent given output y.

    Ties accept, matching the closed decoding region.

    Args:
        y: Channel output
        u: Codeword of the tested message
        A: Channel transform
        spec: DecoderSpec

    Returns:
        bool
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    y = _as_vector(y, n, "output")
    u = _as_vector(u, n, "codeword")
    residual = y - A @ u
    return bool(float(residual @ residual) <= spec.threshold)


def pairwise_margin(u_i, u_j, A):
    """d = A (u_j - u_i), the mean shift of the output of j seen by the test of i."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    u_i = _as_vector(u_i, n, "u_i")
    u_j = _as_vector(u_j, n, "u_j")
    return A @ (u_j - u_i)


def residual_sq(Y, centers):
    """
    Squared distances between a batch of outputs and a set of expected outputs.

    Args:
        Y: (T, n) outputs
        centers: (K, n) expected outputs A u_k

    Returns:
        (T, K) array of ||Y_t - centers_k||^2
    """
    return cdist(np.atleast_2d(Y), np.atleast_2d(centers), "sqeuclidean")


def residual_sq_in_basis(y, u, A, basis):
    """
    ||U^T (y - A u)||^2 for an orthogonal basis U.

    With U the eigenvectors of Sigma this is the coordinate system in which
    the noise has independent components; the value equals ||y - A u||^2.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    basis = np.asarray(basis, dtype=float)
    if basis.shape != (n, n):
        raise DimensionMismatch(f"basis must be {n} x {n}, got {basis.shape}")
    rotated = basis.T @ (_as_vector(y, n, "output") - A @ _as_vector(u, n, "codeword"))
    return float(rotated @ rotated)
