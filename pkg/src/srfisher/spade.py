"""Photon counting in a finite bank of Hermite-Gaussian modes.

For two displaced thermal sources on a Gaussian PSF the mode-q photocurrent
has mean

    mu_q = 2 eta N_s f_q + N_n + D,      f_q = e^{-Q} Q^q / q!,  Q = s^2/(16 sigma^2),

derivative d(mu_q)/ds = (eta N_s s / 4 sigma^2)(f_{q-1} - f_q), and covariance

    C_qq   = 4 (eta N_s)^2 f_q^2 + 4 eta N_s N_n f_q + 2 eta N_s f_q
             + N_n^2 + N_n + D,
    C_qq'  = 4 (eta N_s)^2 f_q f_q'   (q - q' even),   0 (q - q' odd).

D models detector dark counts as an independent per-mode Poisson rate: it
shifts every mean and every diagonal variance, and leaves the derivative
untouched.  The information carried by the counts is bounded below by the
moment form F >= mudot^T C^{-1} mudot, evaluated here with a Cholesky solve of
the diagonally equilibrated covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .errors import IllConditionedError
from .qfi import SceneParams

DEFAULT_MODE_COUNT = 15
CONDITION_GUARD = 1e12


def poisson_argument(p: SceneParams) -> float:
    """Q = s^2 / (16 sigma^2), the Poisson argument of the mode weights."""
    return p.s * p.s / (16.0 * p.sigma * p.sigma)


def mode_weights(p: SceneParams, mode_count: int) -> np.ndarray:
    """f_q = e^{-Q} Q^q / q! for q = 0..mode_count-1, evaluated in log space."""
    if mode_count < 1:
        raise ValueError("mode_count must be at least 1")
    q_arg = poisson_argument(p)
    q = np.arange(mode_count)
    if q_arg == 0.0:
        f = np.zeros(mode_count)
        f[0] = 1.0
        return f
    log_f = -q_arg + q * math.log(q_arg) - gammaln(q + 1)
    return np.exp(log_f)


def spade_mean(p: SceneParams, q: int) -> float:
    """Mean photocount in mode q: 2 eta N_s f_q + N_n + D."""
    if q < 0:
        raise ValueError("mode index must be non-negative")
    f_q = mode_weights(p, q + 1)[q]
    return 2.0 * p.signal * f_q + p.n_n + p.dark


def spade_mean_deriv(p: SceneParams, q: int) -> float:
    """d(mu_q)/ds = (eta N_s s / 4 sigma^2) (f_{q-1} - f_q), with f_{-1} = 0."""
    if q < 0:
        raise ValueError("mode index must be non-negative")
    f = mode_weights(p, q + 1)
    f_prev = f[q - 1] if q >= 1 else 0.0
    return p.signal * p.s / (4.0 * p.sigma**2) * (f_prev - f[q])


def _mean_vector(p: SceneParams, f: np.ndarray) -> np.ndarray:
    return 2.0 * p.signal * f + p.n_n + p.dark


def _mean_deriv_vector(p: SceneParams, f: np.ndarray) -> np.ndarray:
    f_prev = np.concatenate(([0.0], f[:-1]))
    return p.signal * p.s / (4.0 * p.sigma**2) * (f_prev - f)


def spade_covariance(p: SceneParams, mode_count: int) -> np.ndarray:
    """Covariance matrix of the first mode_count photocurrents."""
    f = mode_weights(p, mode_count)
    ens = p.signal
    c = 4.0 * ens * ens * np.outer(f, f)
    q = np.arange(mode_count)
    odd = (q[:, None] - q[None, :]) % 2 == 1
    c[odd] = 0.0
    diag = (4.0 * ens * ens * f * f + 4.0 * ens * p.n_n * f + 2.0 * ens * f
            + p.n_n**2 + p.n_n + p.dark)
    np.fill_diagonal(c, diag)
    return c


def spade_cfi_bound(p: SceneParams, mode_count: int = DEFAULT_MODE_COUNT) -> float:
    """Moment lower bound F = mudot^T C^{-1} mudot on the counting information.

    C is solved by Cholesky after Jacobi equilibration; the condition guard
    applies to the equilibrated matrix, because in the noiseless small-s
    regime C is merely badly scaled (diagonals spanning many decades), not
    close to singular, and refusing it would be wrong.
    """
    f = mode_weights(p, mode_count)
    mudot = _mean_deriv_vector(p, f)
    c = spade_covariance(p, mode_count)
    diag = np.diag(c).copy()
    if np.any(diag <= 0.0):
        keep = diag > 0.0
        if np.any(mudot[~keep] != 0.0):
            # a zero-variance mode with nonzero derivative would carry
            # unbounded information; does not occur in this model
            raise IllConditionedError("zero-variance mode with nonzero derivative", math.inf)
        c = c[np.ix_(keep, keep)]
        mudot = mudot[keep]
        diag = diag[keep]
        if c.size == 0:
            return 0.0
    scale = np.sqrt(diag)
    c_hat = c / scale[:, None] / scale[None, :]
    cond = float(np.linalg.cond(c_hat))
    if not np.isfinite(cond) or cond > CONDITION_GUARD:
        raise IllConditionedError("equilibrated covariance beyond the condition guard", cond)
    try:
        cho = scipy.linalg.cho_factor(c_hat, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise IllConditionedError(f"covariance not positive definite: {exc}", cond) from exc
    rhs = mudot / scale
    return float(rhs @ scipy.linalg.cho_solve(cho, rhs))


def spade_mode_convergence(p: SceneParams, q_from: int, q_to: int) -> float:
    """Relative change |F(q_to) - F(q_from)| / F(q_from) of the bound with mode count."""
    if not q_to > q_from >= 1:
        raise ValueError("require q_to > q_from >= 1")
    f_from = spade_cfi_bound(p, q_from)
    if f_from == 0.0:
        raise ZeroDivisionError("information bound vanishes at q_from; ratio undefined")
    return abs(spade_cfi_bound(p, q_to) - f_from) / f_from


@dataclass
class SpadeStats:
    """Bundle of everything the mode-counting model produces at one scene."""

    mode_count: int
    poisson_arg: float
    f: np.ndarray
    mu: np.ndarray
    mu_dot: np.ndarray
    c: np.ndarray
    fisher_bound: float


def spade_stats(p: SceneParams, mode_count: int = DEFAULT_MODE_COUNT) -> SpadeStats:
    f = mode_weights(p, mode_count)
    return SpadeStats(
        mode_count=mode_count,
        poisson_arg=poisson_argument(p),
        f=f,
        mu=_mean_vector(p, f),
        mu_dot=_mean_deriv_vector(p, f),
        c=spade_covariance(p, mode_count),
        fisher_bound=spade_cfi_bound(p, mode_count),
    )

