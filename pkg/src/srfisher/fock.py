"""Brute-force information oracle in a truncated two-mode Fock space.

Independent of the Gaussian-state machinery: the thermal-source family is
built as an explicit density matrix, differentiated by central finite
differences, and the information is assembled from the spectral form of the
symmetric logarithmic derivative,

    H = sum_{i,j: p_i + p_j > eps} 2 |<i| drho |j>|^2 / (p_i + p_j).

Each +/- block carries occupation eta N_s (1 +/- delta(s)) + N_n on the
principal mode and N_n on the derivative mode; a change of separation by h
retunes the occupation to its value at s + h and rotates the pair by the
beam-splitter angle B(s) * h in the fixed basis at s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConsistencyError, CutoffError
from .overlap import OverlapCalculus, PsfSpec, delta
from .qfi import SceneParams

DEFAULT_TAIL_BOUND = 1e-10
# Cutoffs are auto-sized against this bound inside the oracle; the missing
# geometric tail enters H at the same order, far below the finite-difference
# floor, so it is looser than the standalone thermal-state default.
ORACLE_TAIL_BOUND = 1e-7
SPECTRAL_FLOOR = 1e-11


@dataclass
class TruncatedState:
    cutoff: int
    rho: np.ndarray
    tail_mass: float


def thermal_fock(n_mean: float, cutoff: int, tail_bound: float = DEFAULT_TAIL_BOUND) -> TruncatedState:
    """Truncated, renormalized thermal state diag(p_k), p_k = n^k/(n+1)^(k+1)."""
    if n_mean < 0:
        raise ValueError("mean photon number must be non-negative")
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    k = np.arange(cutoff)
    if n_mean == 0.0:
        p = np.zeros(cutoff)
        p[0] = 1.0
    else:
        ratio = n_mean / (n_mean + 1.0)
        p = ratio**k / (n_mean + 1.0)
    total = float(p.sum())
    tail = 1.0 - total
    if tail > tail_bound:
        raise CutoffError(
            f"cutoff {cutoff} too small for mean occupation {n_mean}", tail, tail_bound
        )
    return TruncatedState(cutoff, np.diag(p / total), tail)


def thermal_probabilities(n_mean: float, cutoff: int, tail_bound: float = DEFAULT_TAIL_BOUND) -> tuple[np.ndarray, float]:
    """Diagonal of thermal_fock as a vector, plus the tail mass."""
    state = thermal_fock(n_mean, cutoff, tail_bound)
    return np.diag(state.rho).copy(), state.tail_mass


def beam_splitter_fock(angle: float, cutoff: int) -> np.ndarray:
    """Two-mode unitary exp(angle (a b^dag - a^dag b)) on the d^2 truncated space.

    Built blockwise over total photon number n = n_a + n_b, so it is exactly
    block-diagonal; blocks that fit inside the truncation (n < cutoff) are
    exactly unitary, higher blocks are truncated.
    """
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    d = cutoff
    u = np.zeros((d * d, d * d))

    def idx(na, nb):
        return na * d + nb

    for n in range(0, 2 * d - 1):
        ks = np.arange(max(0, n - d + 1), min(n, d - 1) + 1)
        m = len(ks)
        gen = np.zeros((m, m))
        # generator: (a b^dag - a^dag b)|k, n-k> = sqrt(k (n-k+1)) |k-1, n-k+1>
        #                                          - sqrt((k+1)(n-k)) |k+1, n-k-1>
        for row, k in enumerate(ks):
            if row > 0:
                gen[row - 1, row] = math.sqrt(k * (n - k + 1))
            if row < m - 1:
                gen[row + 1, row] = -math.sqrt((k + 1) * (n - k))
        block = scipy.linalg.expm(angle * gen)
        for col, kc in enumerate(ks):
            for row, kr in enumerate(ks):
                u[idx(kr, n - kr), idx(kc, n - kc)] = block[row, col]
    return u


@dataclass
class OracleQfi:
    h_plus: float
    h_minus: float
    h_total: float
    cutoff: int
    tail_mass: float
    fd_residual: float


def _auto_cutoff(n_max: float, tail_bound: float) -> int:
    if n_max == 0.0:
        return 4
    ratio = n_max / (n_max + 1.0)
    return max(4, int(math.ceil(math.log(tail_bound) / math.log(ratio))) + 1)


def _block_qfi(occupation_at, coupling: float, nn: float, cutoff: int,
               fd_step: float, tail_bound: float, floor: float) -> tuple[float, float, float]:
    """H for one mode pair via central differences with Richardson extrapolation."""
    p_a, tail_a = thermal_probabilities(occupation_at(0.0), cutoff, tail_bound)
    p_b, tail_b = thermal_probabilities(nn, cutoff, tail_bound)
    p0 = np.kron(p_a, p_b)

    def displaced_rho(h):
        pa, _ = thermal_probabilities(occupation_at(h), cutoff, tail_bound)
        rho = np.diag(np.kron(pa, p_b))
        u = beam_splitter_fock(coupling * h, cutoff)
        return u @ rho @ u.T

    def h_from_step(h):
        drho = (displaced_rho(h) - displaced_rho(-h)) / (2.0 * h)
        psum = p0[:, None] + p0[None, :]
        mask = psum > floor
        return float(np.sum(2.0 * drho[mask] ** 2 / psum[mask]))

    h1 = h_from_step(fd_step)
    h2 = h_from_step(fd_step / 2.0)
    richardson = (4.0 * h2 - h1) / 3.0
    residual = abs(h2 - h1) / max(abs(richardson), 1e-300)
    return richardson, max(tail_a, tail_b), residual


def oracle_qfi(p: SceneParams, oc: OverlapCalculus, cutoff: int | None = None,
               fd_step: float | None = None, psf: PsfSpec | None = None,
               tail_bound: float = ORACLE_TAIL_BOUND,
               spectral_floor: float = SPECTRAL_FLOOR,
               fd_residual_tol: float = 1e-3) -> OracleQfi:
    """Finite-difference spectral information for both mode pairs.

    The one-parameter family holds the basis and the couplings B(s) fixed
    while the occupation follows delta(s + h) and the pair rotates by
    B(s) * h; fd_step defaults to 1e-4 sigma with a half-step Richardson
    stage whose relative spread is reported (and must stay below
    fd_residual_tol).
    """
    if psf is None:
        psf = PsfSpec(sigma=p.sigma)
    if fd_step is None:
        fd_step = 1e-4 * p.sigma
    if not 0 < fd_step < max(p.s, p.sigma):
        raise ValueError("fd_step must be positive and small against the separation")

    ens = p.signal
    if ens == 0.0:
        return OracleQfi(0.0, 0.0, 0.0, cutoff or 4, 0.0, 0.0)

    n_max = ens * (1.0 + oc.delta) + p.n_n
    if cutoff is None:
        cutoff = _auto_cutoff(n_max, tail_bound)

    results = {}
    for label, sign, coupling in (("plus", +1.0, oc.b_plus), ("minus", -1.0, oc.b_minus)):
        def occupation(h, sign=sign):
            d = delta(psf, p.s + h)
            return ens * (1.0 + sign * d) + p.n_n

        results[label] = _block_qfi(
            occupation, coupling, p.n_n, cutoff, fd_step, tail_bound, spectral_floor
        )

    h_plus, tail_p, res_p = results["plus"]
    h_minus, tail_m, res_m = results["minus"]
    residual = max(res_p, res_m)
    if residual > fd_residual_tol:
        raise ConsistencyError(
            f"finite-difference stages disagree (relative spread {residual:.3e} "
            f"> {fd_residual_tol:.1e}); reduce fd_step or raise the cutoff"
        )
    return OracleQfi(h_plus, h_minus, h_plus + h_minus, cutoff,
                     max(tail_p, tail_m), residual)


def sld_from_derivative(p0: np.ndarray, drho: np.ndarray, floor: float = SPECTRAL_FLOOR) -> np.ndarray:
    """Symmetric logarithmic derivative on the retained spectral pairs.

    For a diagonal reference state, L_ij = 2 drho_ij / (p_i + p_j) wherever
    p_i + p_j exceeds the floor, zero elsewhere; (rho L + L rho)/2 then equals
    drho entrywise on the retained pairs.
    """
    psum = p0[:, None] + p0[None, :]
    l = np.zeros_like(drho)
    mask = psum > floor
    l[mask] = 2.0 * drho[mask] / psum[mask]
    return l
