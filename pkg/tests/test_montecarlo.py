import numpy as np
import pytest

from srfisher.montecarlo import McConfig, estimate_moments, sample_counts
from srfisher.qfi import SceneParams
from srfisher.spade import spade_stats

CANONICAL = SceneParams(s=2.0, sigma=1.0, eta=0.25, n_s=2.0, n_n=0.05)


class TestSampler:
    def test_dark_scene_yields_no_counts(self):
        cfg = McConfig(samples=5000, seed=1,
                       params=SceneParams(s=1.0, eta=0.5, n_s=0.0, n_n=0.0), mode_count=4)
        assert sum(int(chunk.sum()) for chunk in sample_counts(cfg)) == 0

    def test_noise_only_mean(self):
        cfg = McConfig(samples=200_000, seed=2,
                       params=SceneParams(s=1.0, eta=0.5, n_s=0.0, n_n=0.3), mode_count=4)
        est = estimate_moments(cfg)
        z = (est.mu_hat - 0.3) / est.mu_se
        assert np.max(np.abs(z)) <= 5.0

    def test_chunking_covers_exactly_the_sample_count(self):
        cfg = McConfig(samples=100_001, seed=3, params=CANONICAL, mode_count=3)
        assert int(cfg.chunk_sizes().sum()) == 100_001

    def test_stream_shapes(self):
        cfg = McConfig(samples=3000, seed=4, params=CANONICAL, mode_count=5)
        chunks = list(sample_counts(cfg))
        assert all(c.shape[1] == 5 for c in chunks)
        assert sum(c.shape[0] for c in chunks) == 3000
        assert all(np.issubdtype(c.dtype, np.integer) for c in chunks)


class TestReproducibility:
    def test_bit_identical_for_same_seed(self):
        cfg = McConfig(samples=50_000, seed=42, params=CANONICAL, mode_count=6)
        a = estimate_moments(cfg)
        b = estimate_moments(cfg)
        assert np.array_equal(a.mu_hat, b.mu_hat)
        assert np.array_equal(a.c_hat, b.c_hat)
        assert np.array_equal(a.c_se, b.c_se)

    def test_different_seeds_differ(self):
        a = estimate_moments(McConfig(samples=20_000, seed=1, params=CANONICAL, mode_count=4))
        b = estimate_moments(McConfig(samples=20_000, seed=2, params=CANONICAL, mode_count=4))
        assert not np.array_equal(a.mu_hat, b.mu_hat)


class TestMomentAgreement:
    def test_mean_and_covariance_within_five_se(self):
        cfg = McConfig(samples=400_000, seed=42, params=CANONICAL, mode_count=8)
        est = estimate_moments(cfg)
        stats = spade_stats(CANONICAL, 8)
        z_mu = (est.mu_hat - stats.mu) / est.mu_se
        assert np.max(np.abs(z_mu)) <= 5.0
        z_c = (est.c_hat - stats.c) / est.c_se
        assert np.max(np.abs(z_c)) <= 5.0

    def test_odd_difference_entries_consistent_with_zero(self):
        cfg = McConfig(samples=400_000, seed=7, params=CANONICAL, mode_count=6)
        est = estimate_moments(cfg)
        q = np.arange(6)
        odd = (q[:, None] - q[None, :]) % 2 == 1
        z = est.c_hat[odd] / est.c_se[odd]
        assert np.max(np.abs(z)) <= 5.0

    def test_worked_covariance_entry(self):
        p = SceneParams(s=4.0, eta=0.5, n_s=2.0, n_n=0.1)
        est = estimate_moments(McConfig(samples=400_000, seed=3, params=p, mode_count=2))
        z = (est.c_hat[0, 0] - 1.5342517917579123) / est.c_se[0, 0]
        assert abs(z) <= 5.0


class TestStandardErrors:
    def test_scaling_with_sample_count(self):
        a = estimate_moments(McConfig(samples=100_000, seed=7, params=CANONICAL, mode_count=4))
        b = estimate_moments(McConfig(samples=200_000, seed=7, params=CANONICAL, mode_count=4))
        ratio = a.mu_se / b.mu_se
        assert np.all(ratio > np.sqrt(2.0) * 0.9)
        assert np.all(ratio < np.sqrt(2.0) * 1.1)

    def test_minimum_sample_count_enforced(self):
        with pytest.raises(ValueError):
            estimate_moments(McConfig(samples=500, seed=1, params=CANONICAL, mode_count=3))


class TestConfigValidation:
    def test_sample_count(self):
        with pytest.raises(ValueError):
            McConfig(samples=0, seed=1, params=CANONICAL)

    def test_mode_count(self):
        with pytest.raises(ValueError):
            McConfig(samples=100, seed=1, params=CANONICAL, mode_count=0)
