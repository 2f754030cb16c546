"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines; tolerances are fixed here and nowhere else.
"""

import sys

import numpy as np
import pytest

from srfisher import cli
from srfisher.fock import oracle_qfi
from srfisher.montecarlo import McConfig, estimate_moments
from srfisher.qfi import SceneParams, qfi_closed_form, qfi_general, s_star, scene_calculus
from srfisher.spade import spade_cfi_bound
from srfisher.spade import spade_stats


def report(number, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {number:2d} {status}: {description}"
    if detail:
        line += f" ({detail})"
    print(line, file=sys.stderr)
    assert ok, line


def scene(s, ens, nn, eta=0.5, dark=0.0):
    return SceneParams(s=s, sigma=1.0, eta=eta, n_s=ens / eta, n_n=nn, dark=dark)


def closed(s, ens, nn):
    p = scene(s, ens, nn)
    return qfi_closed_form(p, scene_calculus(p)).h_total


def test_criterion_01_headline_values():
    h0 = closed(0.01, 1.0, 0.0)
    h1 = closed(0.01, 1.0, 0.01)
    ok = abs(h0 - 0.50) <= 0.02 * 0.50 and abs(h1 - 6e-4) <= 0.2 * 6e-4
    report(1, "headline information values at s = 0.01 sigma", ok,
           f"H(N_n=0)={h0:.6f}, H(N_n=0.01)={h1:.3e}")


def test_criterion_02_solver_equivalence():
    worst = 0.0
    for nn in (0.0, 0.01, 1.0):
        for s in np.geomspace(1e-3, 5.0, 20):
            oc = scene_calculus(scene(float(s), 1.0, nn))
            for ens in np.geomspace(1e-4, 1e4, 20):
                p = scene(float(s), float(ens), nn)
                hc = qfi_closed_form(p, oc).h_total
                hg = qfi_general(p, oc).h_total
                worst = max(worst, abs(hg - hc) / abs(hc))
    report(2, "covariance-equation solver matches closed form to 1e-9 on the grid",
           worst <= 1e-9, f"worst rel diff {worst:.2e}")


ORACLE_PANEL = cli.DEFAULT_ORACLE_PANEL


def test_criterion_03_oracle_equivalence():
    worst = 0.0
    max_cutoff = 0
    for s, ens, nn in ORACLE_PANEL:
        p = scene(s, ens, nn, eta=0.4)
        oc = scene_calculus(p)
        oracle = oracle_qfi(p, oc)
        h = qfi_closed_form(p, oc).h_total
        worst = max(worst, abs(oracle.h_total - h) / abs(h))
        max_cutoff = max(max_cutoff, oracle.cutoff)
    report(3, "Fock-space oracle agrees with closed form to 1e-4 on the panel",
           worst <= 1e-4 and max_cutoff <= 30,
           f"worst rel diff {worst:.2e}, max cutoff {max_cutoff}")


def test_criterion_04_quadratic_vanishing_and_noiseless_plateau():
    details = []
    ok = True
    for nn, ens in ((0.01, 1.0), (0.1, 10.0), (1.0, 100.0)):  # SNR = 100
        svals = np.geomspace(1e-4, 1e-3, 7)
        ratios = np.array([closed(float(s), ens, nn) / s**2 for s in svals])
        flat = ratios.max() / ratios.min() - 1.0
        target = ens**2 * (1.0 / 16.0) / (nn * (nn + 1.0))
        deviation = abs(ratios.mean() - target) / target
        ok = ok and flat <= 0.01 and deviation <= 0.02
        details.append(f"nn={nn}: flat {flat:.1e}, vs limit {deviation:.1e}")
    plateau = abs(closed(1e-2, 1.0, 0.0) - closed(1e-3, 1.0, 0.0)) / closed(1e-3, 1.0, 0.0)
    ok = ok and plateau <= 0.01
    details.append(f"noiseless plateau {plateau:.1e}")
    report(4, "information vanishes quadratically with noise, plateaus without",
           ok, "; ".join(details))


def test_criterion_05_local_maximum_formulas():
    ok = True
    details = []
    for ens in (10.0, 100.0, 1000.0):
        ref = s_star(scene(1.0, ens, 0.01))
        grid = np.geomspace(ref.s_star / 4.0, ref.s_star * 4.0, 1200)
        values = np.array([closed(float(s), ens, 0.01) for s in grid])
        i = int(np.argmax(values))
        loc = abs(grid[i] - ref.s_star) / ref.s_star
        height = abs(values[i] - ref.h_at_s_star) / ref.h_at_s_star
        ok = ok and loc <= 0.10 and height <= 0.05
        details.append(f"ens={ens:g}: loc {loc:.3f}, height {height:.3f}")
    report(5, "local-maximum location within 10% and height within 5%", ok,
           "; ".join(details))


def test_criterion_06_large_separation_form():
    worst = 0.0
    for ens in (1.0, 100.0):
        for nn in (0.01, 1.0):
            h = closed(10.0, ens, nn)
            approx = 2.0 * ens**2 * 0.25 / (2.0 * nn**2 + ens + 2.0 * nn * (ens + 1.0))
            worst = max(worst, abs(h - approx) / approx)
    report(6, "closed form meets the large-separation limit at s = 10 sigma within 2%",
           worst <= 0.02, f"worst rel diff {worst:.2e}")


def test_criterion_07_counting_information_with_detector_noise():
    svals = np.geomspace(1e-4, 1e-3, 7)
    ratios = np.array([
        spade_cfi_bound(scene(float(s), 1.0, 0.0, dark=0.01), 15) / s**2 for s in svals
    ])
    flat = ratios.max() / ratios.min() - 1.0
    f2 = spade_cfi_bound(scene(1e-2, 1.0, 0.0), 15)
    f3 = spade_cfi_bound(scene(1e-3, 1.0, 0.0), 15)
    plateau = abs(f3 - f2) / f2
    ok = flat <= 0.01 and plateau <= 0.05
    report(7, "dark counts impose quadratic vanishing; noiseless bound plateaus", ok,
           f"flatness {flat:.1e}, plateau {plateau:.1e}")


def _ratio_grid():
    svals = np.geomspace(1e-3, 1.0, 20)
    evals = np.geomspace(1e-2, 1e4, 20)
    ratio = np.empty((len(svals), len(evals)))
    for i, s in enumerate(svals):
        oc = scene_calculus(scene(float(s), 1.0, 0.01))
        for j, ens in enumerate(evals):
            p = scene(float(s), float(ens), 0.01)
            f = spade_cfi_bound(p, 15)
            h = qfi_closed_form(p, oc).h_total
            ratio[i, j] = f / h
    return ratio


def test_criterion_08_counting_bound_against_quantum_limit():
    ratio = _ratio_grid()
    min_ratio = float(ratio.min())
    dominance = bool(np.all(ratio <= 1.0 + 1e-9))
    trend = bool(np.all(ratio[:, -1] > ratio[:, 0]))
    ok = min_ratio >= 0.65 and dominance and trend
    report(8, "counting bound keeps >= 65% of the quantum limit and approaches it",
           ok, f"min ratio {min_ratio:.3f}, F<=H {dominance}, trend {trend}")


def test_criterion_09_mode_count_convergence():
    worst = 0.0
    for ens in (0.01, 1.0, 1e4):
        for s in np.geomspace(1e-3, 1.0, 10):
            p = scene(float(s), ens, 0.01)
            f15 = spade_cfi_bound(p, 15)
            f20 = spade_cfi_bound(p, 20)
            worst = max(worst, abs(f20 - f15) / f15)
    report(9, "bound converged in the mode count (15 vs 20)", worst <= 1e-3,
           f"worst rel change {worst:.2e}")


MC_POINTS = (
    (SceneParams(s=2.0, sigma=1.0, eta=0.25, n_s=2.0, n_n=0.05), 8, 42),
    (SceneParams(s=4.0, sigma=1.0, eta=0.5, n_s=2.0, n_n=0.1), 6, 7),
    (SceneParams(s=0.5, sigma=1.0, eta=0.4, n_s=1.25, n_n=0.2, dark=0.02), 8, 123),
)


def test_criterion_10_sampled_moments_match_model():
    ok = True
    details = []
    for params, q_modes, seed in MC_POINTS:
        est = estimate_moments(McConfig(samples=1_000_000, seed=seed,
                                        params=params, mode_count=q_modes))
        stats = spade_stats(params, q_modes)
        z_mu = np.max(np.abs((est.mu_hat - stats.mu) / est.mu_se))
        z_c = np.max(np.abs((est.c_hat - stats.c) / est.c_se))
        q = np.arange(q_modes)
        odd = (q[:, None] - q[None, :]) % 2 == 1
        z_odd = np.max(np.abs(est.c_hat[odd] / est.c_se[odd]))
        ok = ok and z_mu <= 5.0 and z_c <= 5.0 and z_odd <= 5.0
        details.append(f"seed {seed}: |z|max mu {z_mu:.2f} C {z_c:.2f} odd {z_odd:.2f}")
    report(10, "sampled means and covariances within five standard errors", ok,
           "; ".join(details))


def test_criterion_11_byte_identical_outputs(tmp_path):
    a, b = tmp_path / "fig_a.csv", tmp_path / "fig_b.csv"
    assert cli.main(["figure", "1b", "--out", str(a)]) == 0
    assert cli.main(["figure", "1b", "--out", str(b)]) == 0
    figures_equal = a.read_bytes() == b.read_bytes()
    ma, mb = tmp_path / "mc_a.json", tmp_path / "mc_b.json"
    base = ["mc-validate", "--seed", "42", "--samples", "200000", "--q-modes", "6"]
    assert cli.main(base + ["--out", str(ma)]) == 0
    assert cli.main(base + ["--out", str(mb)]) == 0
    mc_equal = ma.read_bytes() == mb.read_bytes()
    report(11, "repeated runs produce byte-identical outputs",
           figures_equal and mc_equal,
           f"figure 1b {figures_equal}, mc-validate {mc_equal}")
