"""Information limits for resolving two identical incoherent sources in noise.

Library layout: :mod:`srfisher.overlap` holds the PSF overlap calculus,
:mod:`srfisher.qfi` the Gaussian-state quantum information (closed form,
covariance-equation solver, asymptotics, optimal measurement),
:mod:`srfisher.fock` an independent truncated-Fock-space oracle,
:mod:`srfisher.spade` the Hermite-Gaussian mode-counting bound, and
:mod:`srfisher.montecarlo` a photodetection sampler validating the moments.
"""

from .fock import OracleQfi, TruncatedState, beam_splitter_fock, oracle_qfi, thermal_fock
from .montecarlo import McConfig, McEstimate, estimate_moments, sample_counts
from .overlap import (
    OverlapCalculus,
    PsfSpec,
    QuadratureSettings,
    b_small_s_expansion,
    calculus_at,
    delta,
    delta_derivative,
    gaussian_profile,
)
from .qfi import (
    AsymptoticQfi,
    CovBlock,
    GaussianQfiResult,
    SceneParams,
    SStarResult,
    make_cov_blocks,
    optimal_measurement,
    qfi_asymptotic,
    qfi_closed_form,
    qfi_general,
    s_star,
    scene_calculus,
    solve_g,
    solve_g_dense,
)
from .spade import (
    SpadeStats,
    mode_weights,
    spade_cfi_bound,
    spade_covariance,
    spade_mean,
    spade_mean_deriv,
    spade_mode_convergence,
    spade_stats,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticQfi",
    "CovBlock",
    "GaussianQfiResult",
    "McConfig",
    "McEstimate",
    "OracleQfi",
    "OverlapCalculus",
    "PsfSpec",
    "QuadratureSettings",
    "SStarResult",
    "SceneParams",
    "SpadeStats",
    "TruncatedState",
    "b_small_s_expansion",
    "beam_splitter_fock",
    "calculus_at",
    "delta",
    "delta_derivative",
    "estimate_moments",
    "gaussian_profile",
    "make_cov_blocks",
    "mode_weights",
    "optimal_measurement",
    "oracle_qfi",
    "qfi_asymptotic",
    "qfi_closed_form",
    "qfi_general",
    "s_star",
    "sample_counts",
    "scene_calculus",
    "solve_g",
    "solve_g_dense",
    "spade_cfi_bound",
    "spade_covariance",
    "spade_mean",
    "spade_mean_deriv",
    "spade_mode_convergence",
    "spade_stats",
    "thermal_fock",
    "__version__",
]
