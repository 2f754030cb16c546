"""Quantum Fisher information for two identical thermal sources in thermal noise.

The physical model: each source feeds a thermal state of mean photon number
N_s through attenuation eta onto the image plane; symmetric/antisymmetric mode
combinations then carry thermal occupations eta N_s (1 +/- delta(s)), each
accompanied by a derivative mode, and a thermal background of N_n photons sits
on all four modes.  The information about the separation s is computed three
independent ways:

* ``qfi_closed_form`` evaluates the closed-form per-block expression (in a
  cancellation-free rearrangement that is algebraically identical to it),
* ``qfi_general`` builds the 4x4 covariance blocks, solves the Gaussian-state
  information equation 4 V G V + Omega G Omega + 2 dV/ds = 0 for G and returns
  H = -Tr[G dV/ds] together with the optimal measurement data,
* ``qfi_asymptotic``/``s_star`` give the regime approximations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import RegimeError, SingularSystemError
from .overlap import GAUSSIAN_ANALYTIC, OverlapCalculus, PsfSpec, calculus_at

SYMMETRIC = "plus"
ANTISYMMETRIC = "minus"

LARGE_SNR_SMALL_S = "large-snr-small-s"
SUB_SSTAR = "sub-sstar"
SMALL_SNR = "small-snr"
LARGE_S = "large-s"
REGIMES = (LARGE_SNR_SMALL_S, SUB_SSTAR, SMALL_SNR, LARGE_S)

# Deterministic stand-ins for the informal regime conditions: "SNR >> 1" means
# snr >= 10, "SNR << 1" means snr <= 0.1, "s << s*" means s <= s*/3,
# "s >> sigma" means s >= 5 sigma, "s << sigma-scale" means s <= sigma/2.
SNR_LARGE = 10.0
SNR_SMALL = 0.1
SSTAR_FRACTION = 1.0 / 3.0
LARGE_S_FACTOR = 5.0
SMALL_S_FACTOR = 0.5

_OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class SceneParams:
    """Physical scenario: separation, PSF width, attenuation, photon budgets.

    dark is the per-detector Poisson dark-count rate; only the mode-counting
    statistics consume it.
    """

    s: float
    sigma: float = 1.0
    eta: float = 0.5
    n_s: float = 1.0
    n_n: float = 0.0
    dark: float = 0.0

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("separation s must be non-negative")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.eta <= 0.5:
            raise ValueError("eta must lie in (0, 1/2]")
        for name in ("n_s", "n_n", "dark"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def signal(self) -> float:
        """Mean detected signal photons eta * N_s."""
        return self.eta * self.n_s

    @property
    def snr(self) -> float:
        if self.n_n <= 0:
            raise ValueError("SNR is defined only for N_n > 0")
        return self.signal / self.n_n


def scene_calculus(p: SceneParams, psf: PsfSpec | None = None) -> OverlapCalculus:
    """Overlap calculus at the scene's geometry (Gaussian PSF by default)."""
    if psf is None:
        psf = PsfSpec(sigma=p.sigma)
    return calculus_at(psf, p.s, p.eta)


@dataclass
class CovBlock:
    """One +/- mode pair: covariance, its s-derivative, and exact occupations.

    v is diag(v1, v1, v2, v2) in (x1, p1, x2, p2) ordering with vacuum 1/2 on
    the diagonal; dv carries the occupation drift on the principal mode and
    the beam-splitter coupling -(v2 - v1)|B| on the off-diagonal mode block.
    n1 and n2 duplicate v1 - 1/2 and v2 - 1/2 but are formed without the
    cancellation, which is what keeps the solver accurate when v -> 1/2.
    """

    label: str
    v: np.ndarray
    dv: np.ndarray
    omega: np.ndarray
    n1: float | None = None
    n2: float | None = None


@dataclass
class BlockG:
    g: np.ndarray
    g11: float
    g12: float
    g22: float
    angle: float
    eigenvalues: tuple
    degenerate: bool


@dataclass
class GaussianQfiResult:
    h_plus: float
    h_minus: float
    h_total: float
    g_plus: np.ndarray | None = None
    g_minus: np.ndarray | None = None
    g_entries: dict | None = None
    measurement_angles: dict | None = None
    g_eigs: tuple | None = None


# -- closed form -----------------------------------------------------------------


def qfi_closed_form(p: SceneParams, oc: OverlapCalculus) -> GaussianQfiResult:
    """Per-block information from the closed-form expression.

    Each block contributes

        ens^2 gamma^2 / [(n1 + 1) n1]  +  2 ens^2 (1 +/- delta) eps^2 / den,
        n1 = ens (1 +/- delta) + N_n,
        den = (2 N_n + 1)(2 ens (1 +/- delta) + 2 N_n + 1) - 1,

    where the second term is the occupation-weighted mode-excitation piece;
    den is expanded to 2[ens (1 +/- delta)(2 N_n + 1) + 2 N_n (N_n + 1)] so it
    never forms a small difference.  G-matrix fields stay empty here.
    """
    ens = p.signal
    if ens == 0.0:
        return GaussianQfiResult(0.0, 0.0, 0.0)
    nn = p.n_n
    if nn == 0.0 and oc.one_minus_delta == 0.0:
        raise ValueError(
            "H is indeterminate at s = 0 with N_n = 0; use the small-separation "
            "limits (noiseless plateau eta N_s / (2 sigma^2)) or qfi_asymptotic"
        )
    gamma2 = oc.gamma * oc.gamma

    def block(occ_factor: float, eps2: float) -> float:
        n1 = ens * occ_factor + nn
        first = ens * ens * gamma2 / ((n1 + 1.0) * n1)
        den = 2.0 * (ens * occ_factor * (2.0 * nn + 1.0) + 2.0 * nn * (nn + 1.0))
        second = 2.0 * ens * ens * occ_factor * eps2 / den
        return first + second

    h_plus = block(1.0 + oc.delta, oc.eps_plus2)
    h_minus = block(oc.one_minus_delta, oc.eps_minus2)
    return GaussianQfiResult(h_plus, h_minus, h_plus + h_minus)


# -- covariance construction and the G equation -----------------------------------


def make_cov_blocks(p: SceneParams, oc: OverlapCalculus) -> tuple[CovBlock, CovBlock]:
    ens = p.signal
    nn = p.n_n
    omega = np.kron(np.eye(2), _OMEGA1)

    def build(label, occ_factor, dv1_sign, coupling):
        n1 = ens * occ_factor + nn
        v = np.kron(np.diag([n1 + 0.5, nn + 0.5]), np.eye(2))
        dv1 = dv1_sign * ens * oc.gamma
        off = ens * occ_factor * coupling  # (v1 - v2) |B|, formed from occupations
        dv = np.kron(np.array([[dv1, off], [off, 0.0]]), np.eye(2))
        return CovBlock(label, v, dv, omega, n1=n1, n2=nn)

    plus = build(SYMMETRIC, 1.0 + oc.delta, +1.0, -oc.b_plus)
    minus = build(ANTISYMMETRIC, oc.one_minus_delta, -1.0, -oc.b_minus)
    return plus, minus


def _check_g_residual(v, dv, omega, g):
    residual = 4.0 * v @ g @ v + omega @ g @ omega + 2.0 * dv
    res = float(np.max(np.abs(residual)))
    norm_dv = float(np.max(np.abs(dv)))
    norm_v = float(np.max(np.abs(v)))
    norm_g = float(np.max(np.abs(g))) if g.size else 0.0
    # second term budgets the float-evaluation noise of the residual itself
    # when G is large (near-singular occupations)
    tol = 1e-10 * max(norm_dv, 1e-300) + 64.0 * np.finfo(float).eps * norm_v**2 * norm_g
    if res > tol:
        raise SingularSystemError("information-matrix equation residual too large", res)
    return res


def solve_g(block: CovBlock) -> np.ndarray:
    """Solve 4 V G V + Omega G Omega + 2 dV = 0 for the symmetric matrix G.

    With exact occupations on the block the equation decouples, per mode pair
    (i, j) and quadrature component, into scalar equations with denominators
    4 v_i v_j -/+ 1 = 2 (2 n_i n_j + n_i + n_j (+1)); forming those from the
    occupations instead of from V keeps full relative accuracy when v -> 1/2,
    which a dense factorization of the 16x16 vectorized system cannot do.
    Exactly singular components (vacuum mode pairs, N_n = 0) take the
    minimum-norm value 0 provided the matching right-hand side vanishes.
    """
    if block.n1 is None or block.n2 is None:
        return solve_g_dense(block.v, block.dv, block.omega)

    occ = (block.n1, block.n2)
    dv = block.dv
    norm_dv = float(np.max(np.abs(dv)))
    g = np.zeros((4, 4))
    for i in range(2):
        for j in range(i, 2):
            d = dv[2 * i:2 * i + 2, 2 * j:2 * j + 2]
            d0 = 0.5 * (d[0, 0] + d[1, 1])
            dx = 0.5 * (d[0, 1] + d[1, 0])
            dz = 0.5 * (d[0, 0] - d[1, 1])
            dw = 0.5 * (d[0, 1] - d[1, 0])
            lam_minus = 2.0 * (2.0 * occ[i] * occ[j] + occ[i] + occ[j])
            lam_plus = lam_minus + 2.0
            g0 = _component(d0, lam_minus, norm_dv)
            gw = _component(dw, lam_minus, norm_dv)
            gx = -2.0 * dx / lam_plus
            gz = -2.0 * dz / lam_plus
            gblock = g0 * np.eye(2) + gx * _SIGMA_X + gz * np.diag([1.0, -1.0]) + gw * _OMEGA1
            g[2 * i:2 * i + 2, 2 * j:2 * j + 2] = gblock
            if i != j:
                g[2 * j:2 * j + 2, 2 * i:2 * i + 2] = gblock.T
    g = 0.5 * (g + g.T)
    _check_g_residual(block.v, dv, block.omega, g)
    return g


def _component(rhs: float, lam: float, norm_dv: float) -> float:
    if lam == 0.0:
        if abs(rhs) <= 1e-14 * max(norm_dv, 1e-300):
            return 0.0  # minimum-norm choice on the singular direction
        raise SingularSystemError(
            "singular component with incompatible right-hand side", abs(rhs)
        )
    return -2.0 * rhs / lam


def solve_g_dense(v: np.ndarray, dv: np.ndarray, omega: np.ndarray | None = None) -> np.ndarray:
    """Dense route: vectorize to a 16x16 system and LU-solve it.

    Falls back to the SVD minimum-norm solution when the factorization reports
    singularity (N_n = 0 makes the derivative-mode directions exactly
    singular).  Retained for generic inputs and as a cross-check of the
    structured path; its forward accuracy degrades with the conditioning.
    """
    if omega is None:
        omega = np.kron(np.eye(2), _OMEGA1)
    a = 4.0 * np.kron(v, v) - np.kron(omega, omega)
    b = -2.0 * dv.reshape(-1)
    try:
        gvec = scipy.linalg.solve(a, b)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError):
        gvec = np.linalg.lstsq(a, b, rcond=None)[0]
    g = gvec.reshape(4, 4)
    g = 0.5 * (g + g.T)
    _check_g_residual(v, dv, omega, g)
    return g


def _analyze_block(g: np.ndarray) -> BlockG:
    g11 = float(g[0, 0])
    g12 = float(g[0, 2])
    g22 = float(g[2, 2])
    degenerate = g11 == 0.0 and g12 == 0.0
    if g12 == 0.0:
        angle = 0.0
    else:
        angle = 0.5 * math.atan2(2.0 * g12, g11 - g22)
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, s], [-s, c]])
    m = np.array([[g11, g12], [g12, g22]])
    diag = rot @ m @ rot.T
    return BlockG(g, g11, g12, g22, angle, (float(diag[0, 0]), float(diag[1, 1])), degenerate)


def qfi_general(p: SceneParams, oc: OverlapCalculus) -> GaussianQfiResult:
    """Information from the covariance-equation route: H = -Tr[G dV/ds] per block."""
    plus, minus = make_cov_blocks(p, oc)
    g_p = solve_g(plus)
    g_m = solve_g(minus)
    h_plus = -float(np.trace(g_p @ plus.dv))
    h_minus = -float(np.trace(g_m @ minus.dv))
    bp = _analyze_block(g_p)
    bm = _analyze_block(g_m)
    return GaussianQfiResult(
        h_plus=h_plus,
        h_minus=h_minus,
        h_total=h_plus + h_minus,
        g_plus=g_p,
        g_minus=g_m,
        g_entries={
            SYMMETRIC: {"g11": bp.g11, "g12": bp.g12, "g22": bp.g22},
            ANTISYMMETRIC: {"g11": bm.g11, "g12": bm.g12, "g22": bm.g22},
        },
        measurement_angles={SYMMETRIC: bp.angle, ANTISYMMETRIC: bm.angle},
        g_eigs=bp.eigenvalues + bm.eigenvalues,
    )


# -- asymptotic regimes ------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticQfi:
    value: float
    valid: bool
    regime: str


def qfi_asymptotic(p: SceneParams, regime: str, psf: PsfSpec | None = None) -> AsymptoticQfi:
    """Closed-form regime approximation (Gaussian PSF only) with a validity flag.

    The caller owns regime selection; the flag reports whether the scene sits
    inside the deterministic thresholds documented at module top.
    """
    if psf is not None and psf.kind != GAUSSIAN_ANALYTIC:
        raise RegimeError("asymptotic approximations are available for the Gaussian PSF only")
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; choose one of {REGIMES}")
    ens = p.signal
    nn = p.n_n
    s, sigma = p.s, p.sigma
    if ens == 0.0:
        return AsymptoticQfi(0.0, False, regime)

    if regime == LARGE_S:
        value = 2.0 * ens * ens * (0.25 / sigma**2) / (
            2.0 * nn * nn + ens + 2.0 * nn * (ens + 1.0)
        )
        return AsymptoticQfi(value, s >= LARGE_S_FACTOR * sigma, regime)

    if nn == 0.0:
        raise RegimeError(f"regime {regime!r} requires N_n > 0")
    snr = ens / nn

    if regime == LARGE_SNR_SMALL_S:
        value = 4.0 * ens * ens * s * s / (
            ens * ens * s**4 + 8.0 * ens * s * s * sigma**2
            + 64.0 * nn * (nn + 1.0) * sigma**4
        )
        return AsymptoticQfi(value, snr >= SNR_LARGE and s <= SMALL_S_FACTOR * sigma, regime)

    if regime == SUB_SSTAR:
        value = ens * ens * s * s / (16.0 * nn * (nn + 1.0) * sigma**4)
        sstar = s_star(p).s_star
        return AsymptoticQfi(value, snr >= SNR_LARGE and s <= SSTAR_FRACTION * sstar, regime)

    # SMALL_SNR: 3 dk^4 + delta4_0 = 3/(8 sigma^4) for the Gaussian profile
    value = ens * ens / (2.0 * nn * (nn + 1.0)) * (3.0 / (8.0 * sigma**4)) * s * s
    return AsymptoticQfi(value, snr <= SNR_SMALL and s <= SMALL_S_FACTOR * sigma, regime)


@dataclass(frozen=True)
class SStarResult:
    s_star: float
    h_at_s_star: float
    valid: bool


def s_star(p: SceneParams) -> SStarResult:
    """Location and height of the high-SNR local information maximum."""
    ens = p.signal
    nn = p.n_n
    if nn <= 0.0:
        raise RegimeError("no local maximum without noise photons (N_n = 0)")
    if ens <= 0.0:
        raise RegimeError("s* requires signal photons (eta N_s > 0)")
    root = math.sqrt(nn * nn + nn)
    sstar = 2.0 * math.sqrt(2.0) * (nn * nn + nn) ** 0.25 * p.sigma / math.sqrt(ens)
    h_at = (ens / (2.0 * p.sigma**2)) * root / ((nn + root) * (root + nn + 1.0))
    return SStarResult(sstar, h_at, ens / nn >= SNR_LARGE)


# -- optimal measurement ------------------------------------------------------------


@dataclass(frozen=True)
class MeasurementBlock:
    angle: float
    eigenvalues: tuple
    degenerate: bool


def optimal_measurement(result: GaussianQfiResult) -> dict:
    """Beam-splitter angles that decouple each mode pair's G block.

    The angle is theta = arctan2(2 g12, g11 - g22) / 2; rotating by
    R = [[cos, sin], [-sin, cos]] diagonalizes the 2x2 block as R g R^T
    (equivalently R^T on the transposed convention) with off-diagonals below
    1e-10.  A block with g11 = g12 = 0 has no preferred angle and is flagged
    degenerate with angle 0.
    """
    if result.g_entries is None:
        raise ValueError("result carries no G matrices; compute it with qfi_general")
    out = {}
    for label in (SYMMETRIC, ANTISYMMETRIC):
        e = result.g_entries[label]
        block = _analyze_block(_embed_entries(e))
        out[label] = MeasurementBlock(block.angle, block.eigenvalues, block.degenerate)
    return out


def _embed_entries(entries: dict) -> np.ndarray:
    g = np.zeros((4, 4))
    g[0, 0] = g[1, 1] = entries["g11"]
    g[2, 2] = g[3, 3] = entries["g22"]
    g[0, 2] = g[2, 0] = g[1, 3] = g[3, 1] = entries["g12"]
    return g
