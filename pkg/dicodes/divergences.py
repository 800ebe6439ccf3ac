"""
Closed-form distances between the output laws N(Ax, Sigma) and N(Ax', Sigma).

Everything here is in nats. Every quantity depends on the pair only through
the Mahalanobis distance ||x - x'||_M^2 with M = A^T Sigma^{-1} A.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtri

from dicodes.errors import DimensionMismatch, InvalidAlpha, OutOfRange

# exp(-x) underflows to 0.0 beyond this
_EXP_UNDERFLOW = -math.log(np.finfo(float).tiny)


@dataclass(frozen=True)
class PairGeometry:
    delta: np.ndarray
    mah_sq: float
    euc_sq: float


def pair_geometry(x, x2, cache):
    """
    Mahalanobis and Euclidean squared distances between two inputs.

    Args:
        x: First input (length n)
        x2: Second input (length n)
        cache: SpectralCache holding M

    Returns:
        PairGeometry
    """
    x = np.asarray(x, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    n = cache.M.shape[0]
    if x.shape != (n,) or x2.shape != (n,):
        raise DimensionMismatch(f"inputs must have length {n}, got {x.shape[0]} and {x2.shape[0]}")

    delta = x - x2
    euc_sq = float(delta @ delta)
    if euc_sq == 0.0:
        mah_sq = 0.0
    else:
        mah_sq = max(float(delta @ cache.M @ delta), 0.0)
    return PairGeometry(delta=delta, mah_sq=mah_sq, euc_sq=euc_sq)


def log_fidelity(geom):
    """ln F = -||x - x'||_M^2 / 8."""
    return -geom.mah_sq / 8.0


def fidelity(geom):
    """
    Bhattacharyya coefficient of the two output laws, exp(-mah_sq / 8).

    Returns 0.0 once the exponent leaves the floating-point range; use
    log_fidelity for the exact value in that case.
    """
    exponent = geom.mah_sq / 8.0
    if exponent > _EXP_UNDERFLOW:
        return 0.0
    return math.exp(-exponent)


def renyi(geom, alpha):
    """
    Renyi divergence of order alpha between the two output laws.

    Args:
        geom: PairGeometry
        alpha: Order, alpha > 0 and alpha != 1

    Returns:
        float: alpha * mah_sq / 2 (nats)
    """
    alpha = float(alpha)
    if not alpha > 0 or alpha == 1.0 or not math.isfinite(alpha):
        raise InvalidAlpha(f"Renyi order must lie in (0, inf) minus {{1}}, got alpha={alpha}")
    return alpha * geom.mah_sq / 2.0


def tv_sandwich(F):
    """
    Fuchs-van de Graaf bounds on total variation from fidelity.

    Args:
        F: Fidelity in (0, 1]

    Returns:
        tuple: (1 - F, sqrt(1 - F^2))
    """
    F = float(F)
    if not 0.0 < F <= 1.0:
        raise OutOfRange(f"fidelity must lie in (0, 1], got F={F}")
    return 1.0 - F, math.sqrt(max(0.0, 1.0 - F * F))


def purified_distance(F):
    """The metric sqrt(1 - F^2) on output laws."""
    F = float(F)
    if not 0.0 <= F <= 1.0:
        raise OutOfRange(f"fidelity must lie in [0, 1], got F={F}")
    return math.sqrt(1.0 - F * F)


def dh_exact(geom, eps):
    """
    Hypothesis-testing relative entropy D_h^eps between the two output laws.

    With a shared covariance the log-likelihood ratio is a linear statistic
    with variance mah_sq under both hypotheses, so the Neyman-Pearson test is
    a half-space and the optimum is -ln Phi(Phi^{-1}(1 - eps) - s), s = sqrt(mah_sq).

    Args:
        geom: PairGeometry
        eps: Type-I level in (0, 1)

    Returns:
        float: nats
    """
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise OutOfRange(f"type-I level must lie in (0, 1), got eps={eps}")
    s = math.sqrt(geom.mah_sq)
    return float(-log_ndtr(ndtri(1.0 - eps) - s))


def renyi_dh_correction(alpha, eps):
    """
    Additive term in D_h^eps <= D_alpha + alpha/(alpha-1) * ln(1/(1-eps)), alpha > 1.
    """
    alpha = float(alpha)
    if not alpha > 1.0:
        raise InvalidAlpha(f"the D_h to D_alpha bound needs alpha > 1, got alpha={alpha}")
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise OutOfRange(f"type-I level must lie in (0, 1), got eps={eps}")
    return alpha / (alpha - 1.0) * math.log(1.0 / (1.0 - eps))
