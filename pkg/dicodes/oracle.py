"""
Independent numerical references.

Quadrature of the defining integrals at n <= 2, incomplete-gamma chi-square
tails for AWGN error probabilities, and a threshold sweep for the hypothesis
testing relative entropy at n = 1. Nothing here calls the closed forms of
dicodes.divergences.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gammainc, gammaincc, gammaln
from scipy.stats import multivariate_normal, norm

from dicodes import config
from dicodes.errors import InvalidAlpha, OutOfRange, QuadratureNonConvergence, SeriesNonConvergence
from dicodes.utils import setup_logger

logger = setup_logger(__name__)


def _output_laws(ch, x, x2):
    if ch.n not in (1, 2):
        raise OutOfRange(f"quadrature oracles support n in {{1, 2}}, got n={ch.n}")
    mean_p = ch.A @ np.asarray(x, dtype=float).ravel()
    mean_q = ch.A @ np.asarray(x2, dtype=float).ravel()
    p = multivariate_normal(mean=mean_p, cov=ch.Sigma)
    q = multivariate_normal(mean=mean_q, cov=ch.Sigma)
    return mean_p, mean_q, p, q


def _quad(f, a, b, points=None):
    inside = None
    if points is not None:
        inside = [t for t in points if a < t < b] or None
    result = quad(f, a, b, points=inside, epsabs=config.QUAD_TOL, epsrel=config.QUAD_TOL,
                  limit=200, full_output=1)
    if len(result) > 3:
        raise QuadratureNonConvergence(f"quad on [{a:.6g}, {b:.6g}] did not converge: {result[3]}")
    return result[0]


def _integrate(integrand, center, half_width, points_1d=None, inner_points=None):
    """
    Integrate over the box center +/- half_width (n = 1 or 2).

    inner_points(y1) lists kinks of the inner integrand at fixed y1.
    """
    if len(center) == 1:
        return _quad(lambda t: integrand(np.array([t])), center[0] - half_width[0],
                     center[0] + half_width[0], points=points_1d)

    lo2, hi2 = center[1] - half_width[1], center[1] + half_width[1]

    def inner(y1):
        points = inner_points(y1) if inner_points is not None else None
        return _quad(lambda y2: integrand(np.array([y1, y2])), lo2, hi2, points=points)

    return _quad(inner, center[0] - half_width[0], center[0] + half_width[0])


def _box(ch, center, spread):
    sd = np.sqrt(np.diag(ch.Sigma))
    return np.asarray(center, dtype=float), np.abs(spread) + config.QUAD_BOX_SIGMAS * sd


def fidelity_quadrature(ch, x, x2):
    """
    Integral of sqrt(p q) over a +/-12 sd box around the midpoint of the two means.

    Args:
        ch: ChannelModel with n in {1, 2}
        x: First input
        x2: Second input

    Returns:
        float
    """
    mean_p, mean_q, p, q = _output_laws(ch, x, x2)
    center, half = _box(ch, 0.5 * (mean_p + mean_q), 0.5 * (mean_p - mean_q))
    return _integrate(lambda y: math.exp(0.5 * p.logpdf(y) + 0.5 * q.logpdf(y)), center, half,
                      points_1d=[float(mean_p[0]), float(mean_q[0])] if ch.n == 1 else None)


def renyi_quadrature(ch, x, x2, alpha):
    """
    D_alpha = ln(integral of p^alpha q^(1-alpha)) / (alpha - 1).

    p^alpha q^(1-alpha) is a Gaussian bump centred at alpha m_p + (1 - alpha) m_q,
    so the box is centred there and the integrand is scaled by its peak value.
    """
    alpha = float(alpha)
    if not alpha > 0 or alpha == 1.0 or not math.isfinite(alpha):
        raise InvalidAlpha(f"Renyi order must lie in (0, inf) minus {{1}}, got alpha={alpha}")

    mean_p, mean_q, p, q = _output_laws(ch, x, x2)
    peak = alpha * mean_p + (1.0 - alpha) * mean_q
    shift = alpha * p.logpdf(peak) + (1.0 - alpha) * q.logpdf(peak)
    center, half = _box(ch, peak, np.zeros_like(peak))

    def integrand(y):
        return math.exp(alpha * p.logpdf(y) + (1.0 - alpha) * q.logpdf(y) - shift)

    integral = _integrate(integrand, center, half, points_1d=[float(peak[0])] if ch.n == 1 else None)
    return (math.log(integral) + shift) / (alpha - 1.0)


def tv_quadrature(ch, x, x2):
    """Total variation 1/2 integral of |p - q|, with breakpoints on the set p = q."""
    mean_p, mean_q, p, q = _output_laws(ch, x, x2)
    mid = 0.5 * (mean_p + mean_q)
    center, half = _box(ch, mid, 0.5 * (mean_p - mean_q))

    # p = q on the hyperplane w . (y - mid) = 0, w = Sigma^{-1} (m_p - m_q)
    w = np.linalg.solve(ch.Sigma, mean_p - mean_q)

    def inner_points(y1):
        if ch.n != 2 or w[1] == 0.0:
            return None
        return [float(mid[1] - w[0] * (y1 - mid[0]) / w[1])]

    integral = _integrate(lambda y: abs(p.pdf(y) - q.pdf(y)), center, half,
                          points_1d=[float(mid[0])] if ch.n == 1 else None, inner_points=inner_points)
    return 0.5 * integral


def chi2_tail(k, t):
    """
    P(chi^2_k > t) via the regularized upper incomplete gamma function.

    Args:
        k: Degrees of freedom >= 1
        t: Threshold

    Returns:
        float
    """
    if int(k) != k or k < 1:
        raise OutOfRange(f"degrees of freedom must be a positive integer, got k={k}")
    if t <= 0:
        return 1.0
    return float(gammaincc(0.5 * k, 0.5 * t))


def noncentral_chi2_cdf(k, ncp, t):
    """
    P(chi'^2_k(ncp) <= t) as a Poisson(ncp/2) mixture of central CDFs.

    The series stops once the unsummed Poisson mass drops below SERIES_TOL,
    which bounds the truncation error.

    Raises:
        SeriesNonConvergence: when SERIES_MAX_TERMS terms do not suffice
    """
    if int(k) != k or k < 1:
        raise OutOfRange(f"degrees of freedom must be a positive integer, got k={k}")
    if ncp < 0:
        raise OutOfRange(f"noncentrality must be nonnegative, got ncp={ncp}")
    if t <= 0:
        return 0.0
    if ncp == 0:
        return float(gammainc(0.5 * k, 0.5 * t))

    lam = 0.5 * ncp
    log_lam = math.log(lam)
    total = 0.0
    mass = 0.0
    for j in range(config.SERIES_MAX_TERMS):
        weight = math.exp(-lam + j * log_lam - gammaln(j + 1.0))
        total += weight * float(gammainc(0.5 * k + j, 0.5 * t))
        mass += weight
        if j > lam and 1.0 - mass < config.SERIES_TOL:
            return min(1.0, total)

    raise SeriesNonConvergence(
        f"noncentral chi-square series did not converge in {config.SERIES_MAX_TERMS} terms (ncp={ncp}, t={t})"
    )


def dh_small_n_check(geom, eps, grid_size=20001):
    """
    Brute-force D_h^eps between the two output laws at n = 1.

    In whitened units the laws are N(0, 1) and N(s, 1) with s^2 the Mahalanobis
    distance. Likelihood ratios are monotone, so half-line tests are optimal:
    both orientations are swept on a dense grid and the constraint boundary
    refined with brentq.

    Args:
        geom: PairGeometry of a 1-dimensional pair
        eps: Type-I level in (0, 1)

    Returns:
        float: -ln of the smallest feasible Q(L) (nats)
    """
    if np.asarray(geom.delta).size != 1:
        raise OutOfRange(f"the threshold sweep needs n = 1, got n={np.asarray(geom.delta).size}")
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise OutOfRange(f"type-I level must lie in (0, 1), got eps={eps}")

    s = math.sqrt(geom.mah_sq)
    grid = np.linspace(-15.0, s + 15.0, grid_size)

    # L = {y <= t}: P(L^c) = sf(t) decreasing in t, Q(L) = cdf(t - s) increasing
    feasible = norm.sf(grid) <= eps
    first = int(np.argmax(feasible))
    t_low = grid[first]
    if first > 0:
        t_low = brentq(lambda t: norm.sf(t) - eps, grid[first - 1], grid[first], xtol=1e-14)
    log_q_low = float(norm.logcdf(t_low - s))

    # L = {y >= t}: P(L^c) = cdf(t) increasing in t, Q(L) = sf(t - s) decreasing
    feasible = norm.cdf(grid) <= eps
    last = len(grid) - 1 - int(np.argmax(feasible[::-1]))
    t_high = grid[last]
    if last < len(grid) - 1:
        t_high = brentq(lambda t: norm.cdf(t) - eps, grid[last], grid[last + 1], xtol=1e-14)
    log_q_high = float(norm.logsf(t_high - s))

    return -min(log_q_low, log_q_high)
