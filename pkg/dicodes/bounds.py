"""
Rate-reliability formulas for DI codes over linear Gaussian channels.

Exponents are in nats per symbol (lambda = exp(-nE)); rates are in bits per
symbol. Converse bounds: the symmetric-regime bound driven by min(E1, E2) and
the asymmetric (Stein/Sanov) bound. Achievability: the distance-decoding
construction at constant and polynomially vanishing exponents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from dicodes.errors import (
    EpsOutOfRange,
    ExponentTooSmall,
    HypothesisViolated,
    Infeasible,
    NonPositiveExponent,
    NonPositiveRadius,
    OutOfRange,
)
from dicodes.utils import setup_logger

logger = setup_logger(__name__)

LN2 = math.log(2.0)
LN16 = math.log(16.0)
EPS_MAX = 1.0 / 3.0


class AchievableRate(NamedTuple):
    rate_bits: float
    E2: float
    eps: float
    degenerate: bool


class LinearithmicRate(NamedTuple):
    log2_N_lower: float
    E1: float
    E2: float
    normalized_rate: float


@dataclass(frozen=True)
class ErrorExponents:
    E1: float
    E2: float
    n: int

    def __post_init__(self):
        for name in ("E1", "E2"):
            value = getattr(self, name)
            if not value >= 0 or not math.isfinite(value):
                raise OutOfRange(f"{name} must be a finite nonnegative exponent, got {value}")
        if self.n < 1:
            raise OutOfRange(f"block length must be positive, got n={self.n}")

    @property
    def lambda1(self) -> float:
        return math.exp(-self.n * self.E1)

    @property
    def lambda2(self) -> float:
        return math.exp(-self.n * self.E2)


@dataclass(frozen=True)
class BoundReport:
    n: int
    E1: Optional[float]
    E2: Optional[float]
    E_min: Optional[float]
    R_conv_symmetric_bits: Optional[float]
    R_conv_asymmetric_bits: Optional[float]
    R_conv_packing_bits: Optional[float]
    r_symmetric: Optional[float]
    r_asymmetric: Optional[float]
    log2_N_upper: Optional[float]
    notes: dict = field(default_factory=dict)

    def min_converse_bits(self):
        """Smallest applicable converse rate, or None when no converse applies."""
        values = [v for v in (self.R_conv_symmetric_bits, self.R_conv_asymmetric_bits) if v is not None]
        return min(values) if values else None


def nats_to_bits(value):
    return value / LN2


def bits_to_nats(value):
    """Exponent given against base 2 (lambda = 2^{-nE}) expressed against base e."""
    return value * LN2


def _positive_exponent(E, name="E"):
    E = float(E)
    if not E > 0 or not math.isfinite(E):
        raise NonPositiveExponent(f"{name} must be a positive finite exponent, got {name}={E}")
    return E


def _reliability_term(E1):
    """sqrt(E1) for E1 <= 1, E1 beyond (big-exponent variant of the construction)."""
    return math.sqrt(E1) if E1 <= 1.0 else E1


# Converse: symmetric regime

def converse_rate_symmetric(n, E, nu_max, P):
    """
    Upper bound on the DI rate when both errors decay at least as exp(-nE).

    Args:
        n: Block length
        E: Smaller of the two exponents (nats)
        nu_max: Largest eigenvalue of M = A^T Sigma^{-1} A
        P: Power budget

    Returns:
        float: (1/2) log2(8 nu_max P / E) bits per symbol

    Raises:
        ExponentTooSmall: when nE < ln 16
    """
    E = _positive_exponent(E)
    if n * E < LN16:
        raise ExponentTooSmall(f"symmetric converse needs nE >= ln 16, got nE={n * E:.6g}")
    return 0.5 * math.log2(8.0 * nu_max * P / E)


def packing_radius_symmetric(n, E, nu_max):
    """
    Radius r such that codewords of any DI code with both exponents >= E are
    pairwise farther apart than 2r.

    Returns:
        float: sqrt((nE - 2 ln 2) / nu_max)
    """
    E = float(E)
    slack = n * E - 2.0 * LN2
    if slack < 0:
        raise ExponentTooSmall(f"packing radius needs nE >= 2 ln 2, got nE={n * E:.6g}")
    return math.sqrt(slack / nu_max)


def converse_rate_packing(n, E, nu_max, P):
    """
    Symmetric converse before the final relaxation: log2 of the volumetric
    packing count at the forced radius, per symbol. Never exceeds
    converse_rate_symmetric.
    """
    E = _positive_exponent(E)
    if n * E < LN16:
        raise ExponentTooSmall(f"symmetric converse needs nE >= ln 16, got nE={n * E:.6g}")
    r = packing_radius_symmetric(n, E, nu_max)
    return log2_packing_count_upper(n, P, r) / n


# Converse: asymmetric (Stein / Sanov) regimes

def converse_rate_asymmetric(E, nu_max, P):
    """
    Rate upper bound when one error decays as exp(-nE) and the other only stays below 1.

    Returns:
        float: log2(sqrt(2 nu_max P / E) + 1) bits per symbol
    """
    E = _positive_exponent(E)
    return math.log2(math.sqrt(2.0 * nu_max * P / E) + 1.0)


def packing_radius_asymmetric(n, E, nu_max):
    """Forced packing radius in the asymmetric regimes: (1/2) sqrt(2nE / nu_max)."""
    E = _positive_exponent(E)
    return 0.5 * math.sqrt(2.0 * n * E / nu_max)


# Volumes and packing counts

def log_ball_volume(n, rho):
    """
    Natural log of the volume of the n-ball of radius rho.

    Args:
        n: Dimension
        rho: Radius > 0

    Returns:
        float: (n/2) ln(pi) - ln Gamma(n/2 + 1) + n ln(rho)
    """
    if not rho > 0:
        raise NonPositiveRadius(f"ball radius must be positive, got rho={rho}")
    return 0.5 * n * math.log(math.pi) - float(gammaln(0.5 * n + 1.0)) + n * math.log(rho)


def log2_packing_count_upper(n, P, r):
    """
    Volumetric upper bound on log2 N for disjoint radius-r balls centred in
    the power ball of radius sqrt(nP).

    Returns:
        float: n log2(2 sqrt(nP) / r)
    """
    if not r > 0:
        raise NonPositiveRadius(f"packing radius must be positive, got r={r}")
    return n * math.log2(2.0 * math.sqrt(n * P) / r)


def _check_eps(eps):
    eps = float(eps)
    if not 0.0 < eps < EPS_MAX:
        raise EpsOutOfRange(f"relative packing radius must lie in (0, 1/3), got eps={eps}")
    return eps


def linear_rate_ceiling(eps):
    """Per-symbol rate log2((1 - eps) / (2 eps)) of a saturated packing at relative radius eps."""
    eps = _check_eps(eps)
    return math.log2((1.0 - eps) / (2.0 * eps))


def log2_code_size_lower(n, eps):
    """Saturated-packing guarantee log2 N >= n log2((1 - eps) / (2 eps))."""
    return n * linear_rate_ceiling(eps)


def code_size_target(n, eps):
    """Smallest integer N guaranteed by a saturated packing: ceil(((1 - eps)/(2 eps))^n)."""
    eps = _check_eps(eps)
    return int(math.ceil(((1.0 - eps) / (2.0 * eps)) ** n))


# Achievability: distance decoder

def decoder_threshold(n, E1, cache):
    """
    Acceptance threshold of the distance decoder.

    Args:
        n: Block length
        E1: Target type-I exponent (nats)
        cache: SpectralCache of the channel

    Returns:
        float: Tr Sigma + 4 nu_M n sqrt(E1) for E1 <= 1, Tr Sigma + 4 nu_M n E1 beyond
    """
    E1 = _positive_exponent(E1, "E1")
    return cache.trace_sigma + 4.0 * cache.nu_M * n * _reliability_term(E1)


def tight_decoder_threshold(n, E1, cache):
    """
    Chernoff-optimal threshold Tr Sigma + 2 sqrt(n E1 Tr Sigma^2) + 2 n nu_M E1.

    Still guarantees a type-I error below exp(-n E1) for every E1 > 0 and never
    exceeds decoder_threshold.
    """
    E1 = _positive_exponent(E1, "E1")
    margin = 2.0 * math.sqrt(n * E1 * cache.trace_sigma_sq) + 2.0 * n * cache.nu_M * E1
    return cache.trace_sigma + margin


def chernoff_type1_bound(threshold, sigma_eigs, relaxed=False):
    """
    Chernoff bound on P(||Z||^2 > threshold) for Z ~ N(0, Sigma).

    The exact form minimizes -s T - (1/2) sum ln(1 - 2 s nu_i) over
    0 < s < 1/(2 nu_M); the relaxed form replaces the log-MGF by
    s mu + s^2 v / (1 - 2 s nu_M).

    Args:
        threshold: T
        sigma_eigs: Eigenvalues of Sigma
        relaxed: Use the relaxed moment bound

    Returns:
        float: Bound in [0, 1]
    """
    nu = np.asarray(sigma_eigs, dtype=float)
    mu = float(np.sum(nu))
    v = float(np.sum(nu * nu))
    nu_M = float(np.max(nu))
    if threshold <= mu:
        return 1.0

    def log_bound(s):
        if relaxed:
            return -s * (threshold - mu) + s * s * v / (1.0 - 2.0 * s * nu_M)
        return -s * threshold - 0.5 * float(np.sum(np.log1p(-2.0 * s * nu)))

    upper = 0.5 / nu_M
    result = minimize_scalar(log_bound, bounds=(0.0, upper * (1.0 - 1e-12)), method="bounded",
                             options={"xatol": 1e-12 * upper})
    return float(min(1.0, math.exp(min(0.0, result.fun))))


def feasibility(eps, E1, nu_M, P):
    """
    Non-trivial type-II margin condition P eps^2 > nu_M sqrt(E1).

    Returns:
        bool
    """
    eps = _check_eps(eps)
    E1 = _positive_exponent(E1, "E1")
    return P * eps * eps > nu_M * _reliability_term(E1)


def type2_exponent(eps, E1, nu_M, P):
    """
    Type-II exponent guaranteed by the distance decoder at relative radius eps.

    Returns:
        float: 2 (eps^2 P - nu_M sqrt(E1))^2 / (nu_M (nu_M + P)); zero at zero margin

    Raises:
        Infeasible: when the margin eps^2 P - nu_M sqrt(E1) is negative
    """
    E1 = _positive_exponent(E1, "E1")
    margin = float(eps) ** 2 * P - nu_M * _reliability_term(E1)
    if margin < 0:
        raise Infeasible(f"type-II margin eps^2 P - nu_M sqrt(E1) = {margin:.6g} is negative")
    return 2.0 * margin * margin / (nu_M * (nu_M + P))


def theorem3_eps(E1, tau, nu_M, P):
    """Relative radius eps = sqrt((1 + tau) nu_M sqrt(E1) / P) of the linear-rate construction."""
    return math.sqrt((1.0 + tau) * nu_M * _reliability_term(E1) / P)


def check_theorem3(E1, tau, nu_M, P):
    """
    Validate the hypotheses of the linear-rate construction.

    Raises:
        HypothesisViolated: naming the failed inequality
    """
    if not tau > 0:
        raise HypothesisViolated(f"tau > 0 required, got tau={tau}")
    if not E1 > 0 or not math.isfinite(E1):
        raise HypothesisViolated(f"E1 > 0 required, got E1={E1}")

    if E1 == 1.0:
        raise HypothesisViolated("E1 = 1 lies outside both sqrt(E1) < 1 and the big-exponent range E1 > 1")

    term = _reliability_term(E1)
    ceiling = P / (9.0 * tau * nu_M)
    if E1 < 1.0:
        if not term < ceiling:
            raise HypothesisViolated(f"sqrt(E1) < P/(9 tau nu_M) required, got {term:.6g} >= {ceiling:.6g}")
    elif not term < ceiling:
        raise HypothesisViolated(f"E1 < P/(9 tau nu_M) required, got {term:.6g} >= {ceiling:.6g}")

    eps = theorem3_eps(E1, tau, nu_M, P)
    if not eps < EPS_MAX:
        raise HypothesisViolated(f"eps < 1/3 required, got eps={eps:.6g}")
    return eps


def achievable_rate_linear(E1, tau, nu_M, P):
    """
    Linear rate of the distance-decoding construction at constant E1.

    Args:
        E1: Type-I exponent (nats)
        tau: Margin parameter > 0
        nu_M: Largest eigenvalue of Sigma
        P: Power budget

    Returns:
        AchievableRate(rate_bits, E2, eps, degenerate); degenerate rates are reported as 0
    """
    eps = check_theorem3(E1, tau, nu_M, P)
    term = _reliability_term(E1)

    argument = math.sqrt(P / (4.0 * nu_M * (1.0 + tau) * term)) - 0.5
    degenerate = argument <= 1.0
    rate = 0.0 if degenerate else math.log2(argument)
    if degenerate:
        logger.debug(f"Degenerate linear rate at E1={E1}, tau={tau}: log argument {argument:.6g}")

    E2 = 2.0 * tau * tau * term * term / (1.0 + P / nu_M)
    return AchievableRate(rate_bits=rate, E2=E2, eps=eps, degenerate=degenerate)


def achievable_rate_linearithmic(n, beta, tau, nu_M, P):
    """
    Code size of the construction with polynomially vanishing exponent E1 = n^(-beta).

    Returns:
        LinearithmicRate(log2_N_lower, E1, E2, normalized_rate)
    """
    if not 0.0 < beta < 1.0:
        raise OutOfRange(f"beta must lie in (0, 1), got beta={beta}")
    if not tau > 0:
        raise OutOfRange(f"tau must be positive, got tau={tau}")
    if n < 2:
        raise OutOfRange(f"normalized rate needs n >= 2, got n={n}")

    E1 = float(n) ** (-beta)
    E2 = 2.0 * tau * tau * E1 / (1.0 + P / nu_M)
    per_symbol = (beta / 4.0) * math.log2(n) + 0.5 * math.log2(P / (16.0 * (1.0 + tau) * nu_M))
    log2_N = n * per_symbol
    return LinearithmicRate(log2_N_lower=log2_N, E1=E1, E2=E2, normalized_rate=log2_N / (n * math.log2(n)))


def exponent_lambda_convert(lam, n):
    """E = -ln(lambda) / n for lambda in (0, 1]."""
    lam = float(lam)
    if not 0.0 < lam <= 1.0:
        raise OutOfRange(f"error probability must lie in (0, 1], got lambda={lam}")
    return -math.log(lam) / n


def lambda_from_exponent(E, n):
    """lambda = exp(-nE)."""
    return math.exp(-n * E)


def bound_report(n, E1, E2, cache, P):
    """
    Evaluate every applicable converse at (n, E1, E2).

    The symmetric bound uses min(E1, E2) and needs both exponents positive;
    the asymmetric bound uses the larger positive exponent. Inapplicable
    bounds are None with the reason in notes.

    Args:
        n: Block length
        E1: Type-I exponent in nats, or None
        E2: Type-II exponent in nats, or None
        cache: SpectralCache
        P: Power budget

    Returns:
        BoundReport
    """
    notes = {}
    E1 = float(E1) if E1 is not None else None
    E2 = float(E2) if E2 is not None else None
    positive = [e for e in (E1, E2) if e is not None and e > 0]

    E_min = R_sym = R_pack = r_sym = None
    if E1 is not None and E2 is not None and E1 > 0 and E2 > 0:
        E_min = min(E1, E2)
        try:
            R_sym = converse_rate_symmetric(n, E_min, cache.nu_max, P)
            R_pack = converse_rate_packing(n, E_min, cache.nu_max, P)
            notes["thm1"] = "ok"
        except ExponentTooSmall:
            notes["thm1"] = "exponent_too_small"
        if n * E_min > 2.0 * LN2:
            r_sym = packing_radius_symmetric(n, E_min, cache.nu_max)
    else:
        notes["thm1"] = "needs_both_exponents"

    R_asym = r_asym = None
    if positive:
        E_asym = max(positive)
        notes["thm2"] = "ok"
        notes["thm2_exponent"] = "E1" if E_asym == E1 else "E2"
        R_asym = converse_rate_asymmetric(E_asym, cache.nu_max, P)
        r_asym = packing_radius_asymmetric(n, E_asym, cache.nu_max)
    else:
        notes["thm2"] = "no_positive_exponent"

    counts = [log2_packing_count_upper(n, P, r) for r in (r_sym, r_asym) if r is not None and r > 0]
    log2_N_upper = min(counts) if counts else None

    for key in ("thm1", "thm2"):
        if notes[key] != "ok":
            logger.debug(f"Converse {key} inapplicable at n={n}, E1={E1}, E2={E2}: {notes[key]}")

    return BoundReport(
        n=n,
        E1=E1,
        E2=E2,
        E_min=E_min,
        R_conv_symmetric_bits=R_sym,
        R_conv_asymmetric_bits=R_asym,
        R_conv_packing_bits=R_pack,
        r_symmetric=r_sym,
        r_asymmetric=r_asym,
        log2_N_upper=log2_N_upper,
        notes=notes,
    )
