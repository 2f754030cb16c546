"""Direct sampling of the mode-counting photodetection model.

Per shot: the two source amplitudes are independent circular complex
Gaussians with mean square eta N_s; each mode adds an independent circular
complex Gaussian noise projection with mean square N_n; mode q then sees the
field B_q = (A1 +/- A2) sqrt(f_q) + xi_q (+ for even q, - for odd q, the
alternating projection phase being absorbed into the sign) and the photocount
is Poisson with mean |B_q|^2 + D.

Determinism contract: the stream is split into chunks at boundaries fixed by
the sample count alone; chunk c draws from numpy's counter-based
Philox(key=seed).jumped(c) generator in a fixed call order, and accumulators
merge in chunk order.  Results are therefore bit-identical for a given
(seed, config) no matter how chunks are scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qfi import SceneParams
from .spade import mode_weights

RNG_ALGORITHM = "numpy.random.Philox (4x64-10), stream c = Philox(key=seed).jumped(c)"


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int
    params: SceneParams
    mode_count: int = 8
    target_chunks: int = 256

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.mode_count < 1:
            raise ValueError("mode_count must be at least 1")

    def chunk_sizes(self) -> np.ndarray:
        """Near-equal chunk lengths, a pure function of the sample count."""
        count = int(max(1, min(self.target_chunks, self.samples // 256 or 1)))
        base, extra = divmod(self.samples, count)
        return np.array([base + (1 if i < extra else 0) for i in range(count)])


@dataclass
class McEstimate:
    mu_hat: np.ndarray
    c_hat: np.ndarray
    mu_se: np.ndarray
    c_se: np.ndarray
    samples: int
    seed: int


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed).jumped(chunk_index))


def _draw_chunk(rng: np.random.Generator, n: int, p: SceneParams, f: np.ndarray) -> np.ndarray:
    q_count = len(f)
    ens = p.signal
    amp = np.sqrt(ens / 2.0) if ens > 0 else 0.0
    a1 = amp * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    a2 = amp * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    noise_amp = np.sqrt(p.n_n / 2.0) if p.n_n > 0 else 0.0
    xi = noise_amp * (rng.standard_normal((n, q_count)) + 1j * rng.standard_normal((n, q_count)))
    parity = np.where(np.arange(q_count) % 2 == 0, 1.0, -1.0)
    r = a1[:, None] + parity[None, :] * a2[:, None]
    b = r * np.sqrt(f)[None, :] + xi
    rate = np.abs(b) ** 2 + p.dark
    return rng.poisson(rate).astype(np.int64)


def sample_counts(cfg: McConfig):
    """Yield photocount arrays chunk by chunk (each chunk_len x mode_count)."""
    f = mode_weights(cfg.params, cfg.mode_count)
    for c, n in enumerate(cfg.chunk_sizes()):
        yield _draw_chunk(_chunk_rng(cfg.seed, c), int(n), cfg.params, f)


def estimate_moments(cfg: McConfig) -> McEstimate:
    """Single-pass mean/covariance with standard errors; no sample storage.

    Accumulation is shifted by the analytic mean so the raw-moment subtraction
    never cancels; covariance standard errors come from the scatter of the
    per-chunk estimates (batch means), mean standard errors from the pooled
    covariance diagonal.
    """
    if cfg.samples < 1000:
        raise ValueError("moment estimation requires at least 1000 samples")
    f = mode_weights(cfg.params, cfg.mode_count)
    shift = 2.0 * cfg.params.signal * f + cfg.params.n_n + cfg.params.dark

    sums, sqsums, counts, chunk_covs = [], [], [], []
    for c, n in enumerate(cfg.chunk_sizes()):
        n = int(n)
        z = _draw_chunk(_chunk_rng(cfg.seed, c), n, cfg.params, f) - shift
        s1 = z.sum(axis=0)
        s2 = z.T @ z
        sums.append(s1)
        sqsums.append(s2)
        counts.append(n)
        if n > 1:
            chunk_covs.append((s2 - np.outer(s1, s1) / n) / (n - 1))

    total = int(np.sum(counts))
    s1 = np.sum(sums, axis=0)
    s2 = np.sum(sqsums, axis=0)
    mu_hat = shift + s1 / total
    c_hat = (s2 - np.outer(s1, s1) / total) / (total - 1)
    mu_se = np.sqrt(np.clip(np.diag(c_hat), 0.0, None) / total)

    covs = np.array(chunk_covs)
    k = len(covs)
    if k >= 2:
        c_se = covs.std(axis=0, ddof=1) / np.sqrt(k)
    else:
        c_se = np.full_like(c_hat, np.nan)
    return McEstimate(mu_hat, c_hat, mu_se, c_se, total, cfg.seed)
