"""Overlap calculus for two laterally displaced copies of a point-spread function.

Everything downstream (Gaussian-state information, Fock oracle, mode-counting
statistics) consumes scalars derived from the overlap

    delta(s) = integral psi(x + s/2) psi(x - s/2) dx

and its s-derivatives: gamma = delta', beta = -delta'', the momentum variance
dk2 = beta(0), the mode-excitation rates eps_plus/eps_minus and the
beam-splitter couplings b_plus/b_minus built from them.

Two PSF kinds are supported.  The Gaussian-analytic kind evaluates closed
forms (with series fallbacks where naive evaluation cancels catastrophically);
the numeric-sampled kind integrates spline-interpolated samples of an
arbitrary real profile on a uniform grid.  Derivatives of the numeric overlap
are taken by differentiating the profile under the integral, never by
finite-differencing delta itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import InterpolatedUnivariateSpline
from scipy.special import binom, eval_hermite

from .errors import ConsistencyError, NormalizationError, QuadratureError

GAUSSIAN_ANALYTIC = "gaussian-analytic"
NUMERIC_SAMPLED = "numeric-sampled"

# eps^2 values in (-EPS2_CLAMP, 0) are roundoff from the small-s cancellation
# and are clamped to zero; anything more negative is a real inconsistency.
EPS2_CLAMP = 1e-12

# Taylor coefficients (order k, coefficient) of the antisymmetric-mode bracket
#   fm(u) = 1 + (1 - 2u) e^{-u} - 2u e^{-2u} / (1 - e^{-u}),
# the u = s^2/(8 sigma^2) profile of eps_minus^2 = fm(u) / (4 sigma^2).
# Truncation error is below 2e-16 relative for u <= 0.5; the closed form is
# used above that, where the leading-order cancellation no longer bites.
_FM_SERIES = (
    (2, 1.0 / 3.0),
    (3, -1.0 / 6.0),
    (4, 2.0 / 45.0),
    (5, -1.0 / 120.0),
    (6, 1.0 / 756.0),
    (7, -1.0 / 5040.0),
    (8, 1.0 / 37800.0),
    (9, -1.0 / 362880.0),
    (10, 1.0 / 4276800.0),
    (11, -1.0 / 39916800.0),
    (12, 257.0 / 81729648000.0),
    (13, -1.0 / 6227020800.0),
    (14, -1.0 / 65383718400.0),
    (15, -1.0 / 1307674368000.0),
)
_FM_SERIES_SWITCH = 0.5


@dataclass
class QuadratureSettings:
    """Uniform-grid quadrature used by the numeric-sampled kind.

    node_count nodes span [-domain_halfwidth, domain_halfwidth]; convergence
    is judged by comparing against the half-resolution grid.
    """

    node_count: int = 2001
    domain_halfwidth: float | None = None  # defaults to 12 sigma
    abs_tolerance: float = 1e-12

    def resolved_halfwidth(self, sigma: float) -> float:
        return 12.0 * sigma if self.domain_halfwidth is None else float(self.domain_halfwidth)


def gaussian_profile(sigma: float):
    """Unit-normalized real Gaussian amplitude profile of width sigma."""
    norm = (2.0 * math.pi * sigma**2) ** -0.25

    def psi(x):
        return norm * np.exp(-np.asarray(x) ** 2 / (4.0 * sigma**2))

    return psi


@dataclass
class PsfSpec:
    """Point-spread-function description.

    kind is either "gaussian-analytic" (closed forms, profile ignored) or
    "numeric-sampled" (profile sampled on the quadrature grid; defaults to the
    Gaussian of width sigma so the two kinds can cross-validate each other).
    """

    kind: str = GAUSSIAN_ANALYTIC
    sigma: float = 1.0
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    profile: object = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in (GAUSSIAN_ANALYTIC, NUMERIC_SAMPLED):
            raise ValueError(f"unknown PSF kind {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.quadrature.node_count < 9:
            raise ValueError("node_count too small for a meaningful quadrature")

    # -- numeric-kind plumbing -------------------------------------------------

    def _grid(self) -> np.ndarray:
        half = self.quadrature.resolved_halfwidth(self.sigma)
        return np.linspace(-half, half, self.quadrature.node_count)

    def _spline(self) -> InterpolatedUnivariateSpline:
        """Quintic spline of the profile samples; evaluates to 0 outside the grid."""
        if "spline" not in self._cache:
            x = self._grid()
            psi = self.profile if self.profile is not None else gaussian_profile(self.sigma)
            y = np.asarray(psi(x), dtype=float)
            spline = InterpolatedUnivariateSpline(x, y, k=5, ext="zeros")
            self._cache["spline"] = spline
            self._cache["grid"] = x
        return self._cache["spline"]

    def psi_derivative(self, order: int):
        """Callable giving the order-th spline derivative of the profile (order 0..4)."""
        spline = self._spline()
        return spline if order == 0 else spline.derivative(order)

    def validate_normalization(self) -> float:
        """Check integral psi^2 dx = 1 on the grid; returns the computed norm."""
        if self.kind == GAUSSIAN_ANALYTIC:
            return 1.0
        if "norm" not in self._cache:
            spline = self._spline()
            x = self._cache["grid"]
            norm = _trapezoid_with_check(spline(x) ** 2, x, self.quadrature.abs_tolerance,
                                         "profile normalization integral")
            tol = max(self.quadrature.abs_tolerance, 1e-9)
            if abs(norm - 1.0) > tol:
                raise NormalizationError(norm, tol)
            self._cache["norm"] = norm
        return self._cache["norm"]


@dataclass
class OverlapCalculus:
    """All overlap-derived scalars at a given separation s and attenuation eta.

    one_minus_delta duplicates 1 - delta but is computed without cancellation;
    downstream code must prefer it whenever delta is close to 1.
    """

    s: float
    delta: float
    one_minus_delta: float
    gamma: float            # delta'(s)
    beta: float             # -delta''(s)
    dk2: float              # beta(0)
    delta4_0: float         # delta^(4)(0)
    delta6_0: float         # delta^(6)(0)
    eps_plus2: float
    eps_minus2: float
    b_plus: float           # -sqrt(eps_plus2) / (2 sqrt(1 + delta)) <= 0
    b_minus: float
    eta_plus: float         # (1 + delta) eta
    eta_minus: float
    theta_plus: float       # arccos(sqrt(eta_plus))
    theta_minus: float


# -- quadrature ----------------------------------------------------------------


def _trapezoid_with_check(values: np.ndarray, x: np.ndarray, tol: float, what: str) -> float:
    """Trapezoid integral with a half-grid convergence check.

    The half-grid uses every other node (odd node counts keep the endpoints),
    so |full - half| conservatively estimates the discretization residual.
    The tolerance is absolute for integrands of unit mass and scales with the
    L1 mass above that, so derivative integrands with large magnitudes are not
    rejected for failing a unit-scale bound.
    """
    full = np.trapezoid(values, x)
    half = np.trapezoid(values[::2], x[::2])
    residual = abs(full - half)
    scale = max(1.0, np.trapezoid(np.abs(values), x))
    if residual > tol * scale:
        raise QuadratureError(f"{what} did not converge", residual, tol * scale)
    return float(full)


# Convergence of spline-derivative integrands degrades by roughly an order of
# magnitude per derivative order; the check budgets for that.
def _derivative_tolerance(base_tol: float, k: int, l: int) -> float:
    return base_tol * 10.0 ** (k + l)


# -- Gaussian closed forms -----------------------------------------------------


def _gauss_delta(sigma: float, s: float) -> float:
    return math.exp(-s * s / (8.0 * sigma * sigma))


def _gauss_delta_derivative(sigma: float, s: float, order: int) -> float:
    # d^n/ds^n exp(-a s^2) = (-1)^n a^(n/2) H_n(sqrt(a) s) exp(-a s^2)
    a = 1.0 / (8.0 * sigma * sigma)
    t = math.sqrt(a) * s
    return (-1.0) ** order * a ** (order / 2.0) * float(eval_hermite(order, t)) * math.exp(-t * t)


def _fm_bracket(u: float) -> float:
    """Stable evaluation of the antisymmetric-mode bracket fm(u) (see module doc)."""
    if u <= _FM_SERIES_SWITCH:
        return sum(c * u**k for k, c in _FM_SERIES)
    return 1.0 + (1.0 - 2.0 * u) * math.exp(-u) - 2.0 * u * math.exp(-2.0 * u) / (-math.expm1(-u))


def _fp_bracket(u: float) -> float:
    """Symmetric-mode bracket fp(u) = -expm1(-u) + 2u e^{-u}/(1 + e^{-u}); no cancellation."""
    emu = math.exp(-u)
    return -math.expm1(-u) + 2.0 * u * emu / (1.0 + emu)


# -- numeric overlap and derivatives -------------------------------------------

# delta^(n)(s) reduces, after integrating by parts to balance the derivative
# orders, to (-1)^(n+m) integral psi^(m)(x + s/2) psi^(n-m)(x - s/2) dx with
# m = ceil(n/2); only profile derivatives up to order 3 are ever needed.


def _numeric_overlap_integral(psf: PsfSpec, s: float, k: int, l: int) -> float:
    x = psf._grid()
    fk = psf.psi_derivative(k)
    fl = psf.psi_derivative(l)
    values = fk(x + s / 2.0) * fl(x - s / 2.0)
    tol = _derivative_tolerance(psf.quadrature.abs_tolerance, k, l)
    return _trapezoid_with_check(values, x, tol, f"overlap integral (orders {k},{l})")


def _numeric_delta_derivative(psf: PsfSpec, s: float, order: int) -> float:
    m = (order + 1) // 2
    return (-1.0) ** (order + m) * _numeric_overlap_integral(psf, s, m, order - m)


def _numeric_one_minus_delta(psf: PsfSpec, s: float) -> float:
    # 1 - delta = ||psi(. + s/2) - psi(. - s/2)||^2 / 2, exact for unit norm;
    # avoids the catastrophic 1 - delta subtraction at small s.
    x = psf._grid()
    spline = psf._spline()
    diff = spline(x + s / 2.0) - spline(x - s / 2.0)
    return 0.5 * _trapezoid_with_check(diff**2, x, psf.quadrature.abs_tolerance,
                                       "displaced-profile difference norm")


# -- public operations ---------------------------------------------------------


def delta(psf: PsfSpec, s: float) -> float:
    """Overlap of the two displaced PSF copies at separation s >= 0."""
    if s < 0:
        raise ValueError("separation s must be non-negative")
    if psf.kind == GAUSSIAN_ANALYTIC:
        return _gauss_delta(psf.sigma, s)
    psf.validate_normalization()
    return _numeric_overlap_integral(psf, s, 0, 0)


def delta_derivative(psf: PsfSpec, s: float, order: int) -> float:
    """order-th s-derivative of the overlap, order in 1..6."""
    if order not in (1, 2, 3, 4, 5, 6):
        raise ValueError("derivative order must be in 1..6")
    if s < 0:
        raise ValueError("separation s must be non-negative")
    if psf.kind == GAUSSIAN_ANALYTIC:
        return _gauss_delta_derivative(psf.sigma, s, order)
    psf.validate_normalization()
    return _numeric_delta_derivative(psf, s, order)


def calculus_at(psf: PsfSpec, s: float, eta: float) -> OverlapCalculus:
    """Populate every overlap-derived scalar at separation s.

    Requires s > 0 (at s = 0 the antisymmetric mode degenerates: eta_minus = 0
    and 1 - delta = 0; callers must use the small-s limits instead) and
    eta in (0, 1/2] so that eta_plus = (1 + delta) eta stays within [0, 1].
    """
    if not s > 0:
        raise ValueError(
            "calculus_at requires s > 0: at s = 0 the antisymmetric mode is "
            "degenerate; use the small-separation limits"
        )
    if not 0 < eta <= 0.5:
        raise ValueError("eta must lie in (0, 1/2]")

    sigma = psf.sigma
    if psf.kind == GAUSSIAN_ANALYTIC:
        a = 1.0 / (8.0 * sigma * sigma)
        u = a * s * s
        d = math.exp(-u)
        omd = -math.expm1(-u)
        gam = -2.0 * a * s * d
        beta = -(-2.0 * a + 4.0 * a * a * s * s) * d
        dk2 = 2.0 * a
        delta4_0 = 12.0 * a * a
        delta6_0 = -120.0 * a**3
        eps_plus2 = 2.0 * a * _fp_bracket(u)
        eps_minus2 = 2.0 * a * _fm_bracket(u)
    else:
        psf.validate_normalization()
        d = _numeric_overlap_integral(psf, s, 0, 0)
        omd = _numeric_one_minus_delta(psf, s)
        gam = _numeric_delta_derivative(psf, s, 1)
        beta = -_numeric_delta_derivative(psf, s, 2)
        dk2 = -_numeric_delta_derivative(psf, 0.0, 2)
        delta4_0 = _numeric_delta_derivative(psf, 0.0, 4)
        delta6_0 = _numeric_delta_derivative(psf, 0.0, 6)
        eps_plus2 = dk2 - beta - gam * gam / (1.0 + d)
        eps_minus2 = dk2 + beta - gam * gam / omd

    eps_plus2 = _clamp_eps2(eps_plus2, "eps_plus^2")
    eps_minus2 = _clamp_eps2(eps_minus2, "eps_minus^2")

    b_plus = -math.sqrt(eps_plus2) / (2.0 * math.sqrt(1.0 + d))
    b_minus = -math.sqrt(eps_minus2) / (2.0 * math.sqrt(omd))
    eta_plus = (1.0 + d) * eta
    eta_minus = omd * eta
    theta_plus = math.acos(min(1.0, math.sqrt(eta_plus)))
    theta_minus = math.acos(min(1.0, math.sqrt(eta_minus)))

    return OverlapCalculus(
        s=s, delta=d, one_minus_delta=omd, gamma=gam, beta=beta, dk2=dk2,
        delta4_0=delta4_0, delta6_0=delta6_0,
        eps_plus2=eps_plus2, eps_minus2=eps_minus2,
        b_plus=b_plus, b_minus=b_minus,
        eta_plus=eta_plus, eta_minus=eta_minus,
        theta_plus=theta_plus, theta_minus=theta_minus,
    )


def _clamp_eps2(value: float, name: str) -> float:
    if value < -EPS2_CLAMP:
        raise ConsistencyError(
            f"{name} = {value!r} is negative beyond the roundoff clamp {-EPS2_CLAMP}"
        )
    return max(value, 0.0)


def b_small_s_expansion(psf: PsfSpec) -> dict:
    """Linear-in-s coefficients of the beam-splitter couplings near s = 0.

    Returns {"b_plus_slope", "b_minus_slope"} with

        b_plus_slope  = -(1/4) sqrt(delta4_0 - delta''(0)^2)
        b_minus_slope = -sqrt( (1/(12 delta''(0))) (delta6_0/5 - delta4_0^2/(3 delta''(0))) )

    Caution: for the Gaussian profile the b_minus radicand is identically zero
    while the direct limit of b_minus(s)/s is -1/(8 sqrt(6) sigma^2); the two
    characterize different expansion orders of the same quantity and only
    eps_minus^2 (not this slope) feeds the information formulas.
    """
    d2 = delta_derivative(psf, 0.0, 2)
    d4 = delta_derivative(psf, 0.0, 4)
    d6 = delta_derivative(psf, 0.0, 6)

    plus_radicand = d4 - d2 * d2
    minus_radicand = (d6 / 5.0 - d4 * d4 / (3.0 * d2)) / (12.0 * d2)

    scale = max(abs(d4), d2 * d2, abs(d6 / 5.0), 1e-300)
    plus_radicand = _clamp_radicand(plus_radicand, scale, "b_plus slope")
    minus_radicand = _clamp_radicand(minus_radicand, scale, "b_minus slope")

    return {
        "b_plus_slope": -0.25 * math.sqrt(plus_radicand),
        "b_minus_slope": -math.sqrt(minus_radicand),
    }


def _clamp_radicand(value: float, scale: float, what: str) -> float:
    if abs(value) <= 1e-10 * scale:
        return 0.0
    if value < 0.0:
        raise ConsistencyError(f"negative radicand {value!r} for {what}")
    return value
