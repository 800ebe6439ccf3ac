"""
Linear Gaussian channel Y = A x + Z, Z ~ N(0, Sigma), with per-block power budget
||x||^2 <= nP.

Validation, the classical presets, the derived spectral quantities every other
module consumes, and output sampling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular, toeplitz

from dicodes import config
from dicodes.errors import (
    ConfigError,
    DimensionMismatch,
    InvalidChannel,
    NonPositivePower,
    NonSymmetricCovariance,
    NotPositiveDefinite,
    NumericalFailure,
    SingularTransform,
)
from dicodes.utils import setup_logger

logger = setup_logger(__name__)

PRESET_KINDS = ("awgn", "scalar_fading", "diag_fading", "toeplitz_isi", "colored_noise", "explicit")


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ChannelModel:
    n: int
    A: np.ndarray
    Sigma: np.ndarray
    P: float

    @property
    def power_radius(self) -> float:
        """Radius sqrt(nP) of the input ball allowed by the power constraint."""
        return float(np.sqrt(self.n * self.P))


@dataclass(frozen=True)
class SpectralCache:
    M: np.ndarray
    nu_max: float
    nu_min: float
    sigma_eigs: np.ndarray
    nu_M: float
    trace_sigma: float
    trace_sigma_sq: float
    chol: np.ndarray
    sigma_eigvecs: np.ndarray
    a_sv_min: float


def validate_channel(n, A, Sigma, P):
    """
    Check a channel triple against the model invariants.

    Args:
        n: Block length
        A: n x n deterministic transform
        Sigma: n x n noise covariance
        P: Per-block power budget (||x||^2 <= nP)

    Returns:
        ChannelModel with a symmetrized covariance

    Raises:
        DimensionMismatch, NonPositivePower, NonSymmetricCovariance,
        NotPositiveDefinite, SingularTransform
    """
    if int(n) != n or n < 1:
        raise DimensionMismatch(f"block length must be a positive integer, got n={n}")
    n = int(n)

    A = np.atleast_2d(np.asarray(A, dtype=float))
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    if A.shape != (n, n):
        raise DimensionMismatch(f"A must be {n}x{n}, got {A.shape}")
    if Sigma.shape != (n, n):
        raise DimensionMismatch(f"Sigma must be {n}x{n}, got {Sigma.shape}")

    P = float(P)
    if not np.isfinite(P) or P <= 0:
        raise NonPositivePower(f"power budget must satisfy P > 0, got P={P}")

    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(Sigma))):
        raise InvalidChannel("A and Sigma must have finite entries")

    norm = np.linalg.norm(Sigma, "fro")
    if norm == 0:
        raise NotPositiveDefinite("Sigma must be positive definite, got the zero matrix")
    asymmetry = np.linalg.norm(Sigma - Sigma.T, "fro")
    if asymmetry > config.TOL_SYM * norm:
        raise NonSymmetricCovariance(
            f"Sigma must be symmetric: relative asymmetry {asymmetry / norm:.3e} > {config.TOL_SYM}"
        )
    Sigma = 0.5 * (Sigma + Sigma.T)

    eigs = np.linalg.eigvalsh(Sigma)
    scale = np.max(np.abs(eigs))
    if eigs[0] <= config.TOL_PD * scale:
        raise NotPositiveDefinite(
            f"Sigma must be positive definite: smallest eigenvalue {eigs[0]:.6g} (largest {eigs[-1]:.6g})"
        )

    singular_values = np.linalg.svd(A, compute_uv=False)
    if singular_values[0] == 0 or singular_values[-1] <= config.TOL_RANK * singular_values[0]:
        raise SingularTransform(
            f"A must be invertible: smallest singular value {singular_values[-1]:.6g} "
            f"(largest {singular_values[0]:.6g})"
        )

    return ChannelModel(n=n, A=_frozen(A), Sigma=_frozen(Sigma), P=P)


def spectral_cache(ch):
    """
    Derive M = A^T Sigma^{-1} A and the spectral symbols of Sigma.

    M is formed as W^T W with W = L^{-1} A (L the Cholesky factor of Sigma),
    which keeps it exactly symmetric.

    Args:
        ch: Validated ChannelModel

    Returns:
        SpectralCache

    Raises:
        NumericalFailure: if a decomposition does not converge
    """
    try:
        chol = np.linalg.cholesky(ch.Sigma)
        sigma_eigs, sigma_eigvecs = np.linalg.eigh(ch.Sigma)
        W = solve_triangular(chol, ch.A, lower=True)
        M = W.T @ W
        M = 0.5 * (M + M.T)
        nu = np.linalg.eigvalsh(M)
        a_sv = np.linalg.svd(ch.A, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"spectral decomposition failed: {str(e)}") from e

    return SpectralCache(
        M=_frozen(M),
        nu_max=float(nu[-1]),
        nu_min=float(nu[0]),
        sigma_eigs=_frozen(sigma_eigs),
        nu_M=float(sigma_eigs[-1]),
        trace_sigma=float(np.trace(ch.Sigma)),
        trace_sigma_sq=float(np.sum(ch.Sigma * ch.Sigma)),
        chol=_frozen(chol),
        sigma_eigvecs=_frozen(sigma_eigvecs),
        a_sv_min=float(a_sv[-1]),
    )


def _require(params, *keys):
    missing = [key for key in keys if key not in params or params[key] is None]
    if missing:
        raise ConfigError(f"preset '{params.get('preset', '?')}' is missing parameter(s): {', '.join(missing)}")


def preset(kind, params):
    """
    Build one of the classical channels the linear Gaussian model subsumes.

    Args:
        kind: awgn | scalar_fading | diag_fading | toeplitz_isi | colored_noise | explicit
        params: dict of preset parameters (n, P, sigma2, g, gains, taps, rho, A, Sigma)

    Returns:
        Validated ChannelModel
    """
    if kind not in PRESET_KINDS:
        raise ConfigError(f"unknown channel preset '{kind}' (expected one of {', '.join(PRESET_KINDS)})")
    params = dict(params)
    params.setdefault("preset", kind)
    _require(params, "P")

    if kind == "awgn":
        _require(params, "n", "sigma2")
        n = int(params["n"])
        A = np.eye(n)
        Sigma = float(params["sigma2"]) * np.eye(n)

    elif kind == "scalar_fading":
        _require(params, "n", "g", "sigma2")
        n = int(params["n"])
        A = float(params["g"]) * np.eye(n)
        Sigma = float(params["sigma2"]) * np.eye(n)

    elif kind == "diag_fading":
        _require(params, "gains", "sigma2")
        gains = np.asarray(params["gains"], dtype=float).ravel()
        n = len(gains)
        if params.get("n") is not None and int(params["n"]) != n:
            raise ConfigError(f"diag_fading has {n} gains but n={params['n']}")
        A = np.diag(gains)
        Sigma = float(params["sigma2"]) * np.eye(n)

    elif kind == "toeplitz_isi":
        _require(params, "n", "taps", "sigma2")
        n = int(params["n"])
        taps = np.asarray(params["taps"], dtype=float).ravel()
        column = np.zeros(n)
        column[: min(n, len(taps))] = taps[:n]
        A = toeplitz(column, np.r_[column[0], np.zeros(n - 1)])
        Sigma = float(params["sigma2"]) * np.eye(n)

    elif kind == "colored_noise":
        _require(params, "n", "rho", "sigma2")
        n = int(params["n"])
        rho = float(params["rho"])
        A = np.eye(n)
        Sigma = float(params["sigma2"]) * toeplitz(rho ** np.arange(n))

    elif kind == "explicit":
        _require(params, "A", "Sigma")
        A = np.asarray(params["A"], dtype=float)
        n = A.shape[0] if A.ndim == 2 else 1
        if params.get("n") is not None and int(params["n"]) != n:
            raise ConfigError(f"explicit channel is {n}-dimensional but n={params['n']}")
        Sigma = params["Sigma"]

    ch = validate_channel(n, A, Sigma, params["P"])
    logger.debug(f"Built {kind} channel: n={ch.n}, P={ch.P}")
    return ch


def _check_input(ch, x):
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (ch.n,):
        raise DimensionMismatch(f"input must have length {ch.n}, got {x.shape[0]}")
    energy = float(x @ x)
    if energy > ch.n * ch.P * (1 + 1e-12):
        logger.warning(f"Input energy {energy:.6g} exceeds power budget nP={ch.n * ch.P:.6g}")
    return x


def sample_output(ch, cache, x, rng):
    """
    Draw one channel output y = A x + L g, with L the Cholesky factor of Sigma.

    Args:
        ch: ChannelModel
        cache: SpectralCache of ch
        x: Input vector of length n
        rng: numpy Generator owned by the caller

    Returns:
        numpy array of length n
    """
    x = _check_input(ch, x)
    g = rng.standard_normal(ch.n)
    return ch.A @ x + cache.chol @ g


def sample_outputs(ch, cache, x, rng, size):
    """Vectorized sample_output: returns a (size, n) array of independent outputs for input x."""
    x = _check_input(ch, x)
    g = rng.standard_normal((int(size), ch.n))
    return (ch.A @ x)[None, :] + g @ cache.chol.T


def sample_noise(cache, rng, size):
    """Draw `size` noise vectors Z ~ N(0, Sigma) as a (size, n) array."""
    n = cache.chol.shape[0]
    return rng.standard_normal((int(size), n)) @ cache.chol.T
