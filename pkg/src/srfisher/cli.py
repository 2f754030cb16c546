"""Command-line front end: parameter sweeps, preset figure data, oracle checks.

Subcommands

    qfi-sweep     grid of quantum-information values (CSV)
    cfi-sweep     grid of mode-counting information bounds (CSV)
    ratio-map     classical/quantum information ratio grid (CSV)
    oracle-check  Fock-space oracle vs closed form on a point panel (JSON)
    mc-validate   sampled moments vs analytic moments, z-score gate (JSON)
    figure        preset sweeps named 1a, 1b, 1c, 1d, 2

Conventions: lengths in output files are in units of sigma (the sigma column
is kept so raw values can be reconstructed) and information values carry a
sigma^2 factor, so rows are invariant under rescaling the PSF width.  Floats
are written with 17 significant digits and '\n' line endings; identical specs
produce byte-identical files.  Exit codes: 0 success, 1 invalid input,
2 numerical failure, 3 I/O failure.

SRFISHER_WORKERS overrides the worker count used for per-point parallel
batches (default: available parallelism).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import fock, montecarlo, qfi, spade
from .errors import SrfisherError
from .qfi import SceneParams

SCHEMA_VERSION = 1
ORACLE_REL_TOL = 1e-3
Z_GATE = 5.0

# default oracle panel: six points covering separations {0.05, 0.8} sigma,
# signals {0.2, 0.5} and noise occupations {0.05, 0.2}
DEFAULT_ORACLE_PANEL = (
    (0.05, 0.2, 0.05),
    (0.05, 0.5, 0.2),
    (0.8, 0.2, 0.2),
    (0.8, 0.5, 0.05),
    (0.05, 0.2, 0.2),
    (0.8, 0.5, 0.2),
)


def worker_count() -> int:
    env = os.environ.get("SRFISHER_WORKERS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("SRFISHER_WORKERS must be a positive integer")
        return n
    return os.cpu_count() or 1


# -- sweep specification ---------------------------------------------------------


@dataclass(frozen=True)
class AxisSpec:
    """One sweep axis: either an explicit value list or a min/max/points range."""

    name: str
    minimum: float | None = None
    maximum: float | None = None
    points: int | None = None
    scale: str = "log"
    values: tuple | None = None

    VALID_NAMES = ("s", "eta", "n_s", "n_n", "eta_n_s", "dark")

    def __post_init__(self):
        if self.name not in self.VALID_NAMES:
            raise ValueError(f"unknown axis {self.name!r}; choose from {self.VALID_NAMES}")
        if self.values is not None:
            if len(self.values) < 1:
                raise ValueError("axis value list must be non-empty")
            return
        if self.points is None or self.points < 2:
            raise ValueError("axis needs at least 2 points")
        if self.scale not in ("linear", "log"):
            raise ValueError("axis scale must be 'linear' or 'log'")
        if self.scale == "log" and (self.minimum <= 0 or self.maximum <= 0):
            raise ValueError("log axis requires positive bounds")

    def grid(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.scale == "log":
            return np.geomspace(self.minimum, self.maximum, self.points)
        return np.linspace(self.minimum, self.maximum, self.points)


@dataclass
class SweepSpec:
    axes: list = field(default_factory=list)
    fixed: SceneParams = field(default_factory=lambda: SceneParams(s=1.0))
    outputs: tuple = ("qfi-closed",)
    q_modes: int = spade.DEFAULT_MODE_COUNT
    out: str = "sweep.csv"

    @classmethod
    def from_json(cls, path: str) -> "SweepSpec":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepSpec":
        axes = [
            AxisSpec(
                name=a["name"],
                minimum=a.get("min"),
                maximum=a.get("max"),
                points=a.get("points"),
                scale=a.get("scale", "log"),
                values=tuple(a["values"]) if "values" in a else None,
            )
            for a in doc.get("axes", [])
        ]
        fixed = SceneParams(
            s=doc.get("s", 1.0), sigma=doc.get("sigma", 1.0), eta=doc.get("eta", 0.4),
            n_s=doc.get("n_s", 1.0), n_n=doc.get("n_n", 0.0), dark=doc.get("dark", 0.0),
        )
        return cls(
            axes=axes, fixed=fixed,
            outputs=tuple(doc.get("outputs", ("qfi-closed",))),
            q_modes=int(doc.get("q_modes", spade.DEFAULT_MODE_COUNT)),
            out=doc.get("out", "sweep.csv"),
        )

    def scenes(self):
        """Yield SceneParams in lexicographic axis order (deterministic)."""
        grids = [axis.grid() for axis in self.axes]
        if not grids:
            yield self.fixed
            return
        index = np.zeros(len(grids), dtype=int)
        total = int(np.prod([len(g) for g in grids]))
        for flat in range(total):
            rem = flat
            for k in range(len(grids) - 1, -1, -1):
                index[k] = rem % len(grids[k])
                rem //= len(grids[k])
            params = self.fixed
            for axis, gi in zip(self.axes, index):
                value = float(axis.grid()[gi])
                if axis.name == "eta_n_s":
                    params = replace(params, n_s=value / params.eta)
                else:
                    params = replace(params, **{axis.name: value})
            yield params


# -- CSV plumbing -----------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "nan"
    v = float(value)
    if math.isnan(v):
        return "nan"
    return f"{v:.17g}"


def _write_csv(path: str, header: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- qfi sweep ----------------------------------------------------------------------


def _auto_asymptotic(p: SceneParams):
    """First regime whose validity window contains the scene, or none."""
    for regime in (qfi.SUB_SSTAR, qfi.LARGE_SNR_SMALL_S, qfi.SMALL_SNR, qfi.LARGE_S):
        try:
            approx = qfi.qfi_asymptotic(p, regime)
        except (SrfisherError, ValueError):
            continue
        if approx.valid:
            return approx
    return qfi.AsymptoticQfi(float("nan"), False, "none")


QFI_HEADER = ["s", "sigma", "eta", "n_s", "n_n", "h_plus", "h_minus", "h_total",
              "h_asymptotic", "asym_regime", "asym_valid", "s_star", "h_at_s_star"]


def _qfi_row(p: SceneParams, use_solver: bool) -> list:
    sig2 = p.sigma * p.sigma
    if p.signal == 0.0:
        h = qfi.GaussianQfiResult(0.0, 0.0, 0.0)
    else:
        oc = qfi.scene_calculus(p)
        h = qfi.qfi_general(p, oc) if use_solver else qfi.qfi_closed_form(p, oc)
    approx = _auto_asymptotic(p)
    try:
        star = qfi.s_star(p)
        star_s, star_h = star.s_star / p.sigma, star.h_at_s_star * sig2
    except (SrfisherError, ValueError):
        star_s, star_h = float("nan"), float("nan")
    return [p.s / p.sigma, p.sigma, p.eta, p.n_s, p.n_n,
            h.h_plus * sig2, h.h_minus * sig2, h.h_total * sig2,
            approx.value * sig2 if not math.isnan(approx.value) else float("nan"),
            approx.regime, approx.valid, star_s, star_h]


def cmd_qfi_sweep(spec: SweepSpec) -> dict:
    use_solver = "qfi-solver" in spec.outputs
    rows = [_qfi_row(p, use_solver) for p in spec.scenes()]
    _write_csv(spec.out, QFI_HEADER, rows)
    return {"rows": len(rows), "out": spec.out}


CFI_HEADER = ["s", "sigma", "eta", "n_s", "n_n", "dark", "q_modes", "cfi"]


def cmd_cfi_sweep(spec: SweepSpec) -> dict:
    rows = []
    for p in spec.scenes():
        bound = spade.spade_cfi_bound(p, spec.q_modes)
        rows.append([p.s / p.sigma, p.sigma, p.eta, p.n_s, p.n_n, p.dark,
                     spec.q_modes, bound * p.sigma**2])
    _write_csv(spec.out, CFI_HEADER, rows)
    return {"rows": len(rows), "out": spec.out}


RATIO_HEADER = ["s", "eta_n_s", "n_n", "q_modes", "cfi", "qfi", "ratio", "flag"]


def cmd_ratio_map(spec: SweepSpec) -> dict:
    rows = []
    worst = math.inf
    for p in spec.scenes():
        sig2 = p.sigma * p.sigma
        if p.signal == 0.0:
            rows.append([p.s / p.sigma, 0.0, p.n_n, spec.q_modes, 0.0, 0.0,
                         float("nan"), "degenerate"])
            continue
        cfi = spade.spade_cfi_bound(p, spec.q_modes)
        h = qfi.qfi_closed_form(p, qfi.scene_calculus(p)).h_total
        ratio = cfi / h
        worst = min(worst, ratio)
        rows.append([p.s / p.sigma, p.signal, p.n_n, spec.q_modes,
                     cfi * sig2, h * sig2, ratio, "ok"])
    _write_csv(spec.out, RATIO_HEADER, rows)
    return {"rows": len(rows), "out": spec.out, "min_ratio": worst}


# -- oracle check -----------------------------------------------------------------


def _oracle_point(args) -> dict:
    point, cutoff, fd_step = args
    s, ens, nn = point
    p = SceneParams(s=s, eta=0.4, n_s=ens / 0.4, n_n=nn)
    record = {"s": s, "eta_n_s": ens, "n_n": nn, "error": None}
    try:
        oc = qfi.scene_calculus(p)
        closed = qfi.qfi_closed_form(p, oc).h_total
        oracle = fock.oracle_qfi(p, oc, cutoff=cutoff, fd_step=fd_step)
        if closed == 0.0:
            rel = abs(oracle.h_total)  # absolute scale when there is no signal
        else:
            rel = abs(oracle.h_total - closed) / abs(closed)
        record.update({
            "h_closed": closed, "h_oracle": oracle.h_total, "rel_error": rel,
            "cutoff": oracle.cutoff, "tail_mass": oracle.tail_mass,
            "fd_residual": oracle.fd_residual,
        })
    except (SrfisherError, ValueError) as exc:
        record.update({"h_closed": None, "h_oracle": None, "rel_error": None,
                       "cutoff": cutoff, "tail_mass": None, "fd_residual": None,
                       "error": str(exc)})
    return record


def cmd_oracle_check(points=None, cutoff=None, fd_step=None, out="oracle_check.json") -> dict:
    if points is None:
        points = DEFAULT_ORACLE_PANEL
    jobs = [(tuple(pt), cutoff, fd_step) for pt in points]
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_oracle_point, jobs))
    else:
        records = [_oracle_point(job) for job in jobs]
    rels = [r["rel_error"] for r in records if r["rel_error"] is not None]
    ok = (len(rels) == len(records)) and all(r <= ORACLE_REL_TOL for r in rels)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tolerance": ORACLE_REL_TOL,
        "points": records,
        "max_rel_error": max(rels) if rels else None,
        "pass": ok,
    }
    _write_json(out, doc)
    return doc


# -- Monte-Carlo validation ---------------------------------------------------------


def cmd_mc_validate(cfg: montecarlo.McConfig, out="mc_validate.json", corrupt=None) -> dict:
    """z-score gate of sampled moments against the analytic model.

    corrupt, when given as (q, q', delta), shifts the analytic covariance
    entry before scoring; it exists as a negative-control hook so the gate
    can be shown to catch a wrong model.
    """
    est = montecarlo.estimate_moments(cfg)
    stats = spade.spade_stats(cfg.params, cfg.mode_count)
    c_ref = stats.c.copy()
    if corrupt is not None:
        qa, qb, bump = corrupt
        c_ref[qa, qb] += bump
        if qa != qb:
            c_ref[qb, qa] += bump

    with np.errstate(divide="ignore", invalid="ignore"):
        z_mu = np.where(est.mu_se > 0, (est.mu_hat - stats.mu) / est.mu_se,
                        np.where(est.mu_hat == stats.mu, 0.0, np.inf))
        z_c = np.where(est.c_se > 0, (est.c_hat - c_ref) / est.c_se,
                       np.where(est.c_hat == c_ref, 0.0, np.inf))

    violations = []
    for q in range(cfg.mode_count):
        if abs(z_mu[q]) > Z_GATE:
            violations.append({"matrix": "mu", "q": q, "z": float(z_mu[q])})
        for qp in range(cfg.mode_count):
            if abs(z_c[q, qp]) > Z_GATE:
                violations.append({"matrix": "c", "q": q, "q2": qp, "z": float(z_c[q, qp])})

    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": cfg.seed,
        "samples": est.samples,
        "rng": montecarlo.RNG_ALGORITHM,
        "z_gate": Z_GATE,
        "max_abs_z_mu": float(np.max(np.abs(z_mu))),
        "max_abs_z_c": float(np.max(np.abs(z_c))),
        "z_mu": [float(z) for z in z_mu],
        "z_c": [[float(z) for z in row] for row in z_c],
        "violations": violations,
        "pass": not violations,
    }
    _write_json(out, doc)
    return doc


# -- figure presets ------------------------------------------------------------------


def figure_spec(name: str, out: str | None = None) -> tuple[str, SweepSpec]:
    """Preset sweeps reproducing the standard survey grids.

    1a/1b: information heatmap over separation and signal (noiseless / noisy);
    1c: high-SNR curves with the local-maximum overlay columns;
    1d: low-SNR curves; 2: classical/quantum ratio map.
    """
    base = SceneParams(s=1.0, sigma=1.0, eta=0.4, n_s=1.0, n_n=0.0)
    if name == "1a":
        spec = SweepSpec(
            axes=[AxisSpec("s", 1e-2, 10.0, 60, "log"),
                  AxisSpec("eta_n_s", 1e-1, 1e3, 60, "log")],
            fixed=base, out=out or "figure_1a.csv")
        return "qfi", spec
    if name == "1b":
        spec = SweepSpec(
            axes=[AxisSpec("s", 1e-2, 10.0, 60, "log"),
                  AxisSpec("eta_n_s", 1e-1, 1e3, 60, "log")],
            fixed=replace(base, n_n=0.01), out=out or "figure_1b.csv")
        return "qfi", spec
    if name == "1c":
        spec = SweepSpec(
            axes=[AxisSpec("eta_n_s", values=(1e4, 1e3, 1e2, 10.0, 1.0)),
                  AxisSpec("s", 1e-3, 10.0, 200, "log")],
            fixed=replace(base, n_n=0.01), out=out or "figure_1c.csv")
        return "qfi", spec
    if name == "1d":
        # low-SNR curves need noise dominating the strongest signal
        spec = SweepSpec(
            axes=[AxisSpec("eta_n_s", values=(1e-4, 1e-3, 1e-2, 1e-1)),
                  AxisSpec("s", 1e-3, 10.0, 200, "log")],
            fixed=replace(base, n_n=1.0), out=out or "figure_1d.csv")
        return "qfi", spec
    if name == "2":
        spec = SweepSpec(
            axes=[AxisSpec("s", 1e-3, 1.0, 40, "log"),
                  AxisSpec("eta_n_s", 1e-2, 1e4, 40, "log")],
            fixed=replace(base, n_n=0.01), q_modes=15, out=out or "figure_2.csv")
        return "ratio", spec
    raise ValueError(f"unknown figure {name!r}; choose from 1a, 1b, 1c, 1d, 2")


def cmd_figure(name: str, out: str | None = None) -> dict:
    kind, spec = figure_spec(name, out)
    if kind == "ratio":
        return cmd_ratio_map(spec)
    return cmd_qfi_sweep(spec)


# -- argument parsing ----------------------------------------------------------------


def _axis_from_flag(name: str, text: str) -> AxisSpec:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"axis flag needs 'min,max,points,scale', got {text!r}")
    return AxisSpec(name, float(parts[0]), float(parts[1]), int(parts[2]), parts[3])


def _spec_from_args(args) -> SweepSpec:
    spec = SweepSpec.from_json(args.config) if args.config else SweepSpec()
    fixed = spec.fixed
    for attr in ("sigma", "eta", "n_s", "n_n", "dark", "s"):
        value = getattr(args, attr, None)
        if value is not None:
            fixed = replace(fixed, **{attr: value})
    spec.fixed = fixed
    axes = list(spec.axes)
    for axis_name in ("s", "eta_n_s", "n_s", "n_n"):
        flag = getattr(args, f"{axis_name}_axis".replace("-", "_"), None)
        if flag:
            axes = [a for a in axes if a.name != axis_name]
            axes.append(_axis_from_flag(axis_name, flag))
    spec.axes = axes
    if getattr(args, "q_modes", None) is not None:
        spec.q_modes = args.q_modes
    if getattr(args, "out", None):
        spec.out = args.out
    if getattr(args, "solver", False):
        spec.outputs = tuple(set(spec.outputs) | {"qfi-solver"})
    if not spec.axes:
        raise ValueError("sweep needs at least one axis (flag or config)")
    return spec


def _add_scene_flags(sub, include_s=True):
    if include_s:
        sub.add_argument("--s", type=float, default=None, help="separation (fixed)")
    sub.add_argument("--sigma", type=float, default=None)
    sub.add_argument("--eta", type=float, default=None)
    sub.add_argument("--n-s", dest="n_s", type=float, default=None)
    sub.add_argument("--n-n", dest="n_n", type=float, default=None)
    sub.add_argument("--dark", type=float, default=None)


def _add_sweep_flags(sub):
    sub.add_argument("--config", default=None, help="JSON sweep spec")
    sub.add_argument("--s-axis", dest="s_axis", default=None, metavar="MIN,MAX,N,SCALE")
    sub.add_argument("--eta-n-s-axis", dest="eta_n_s_axis", default=None, metavar="MIN,MAX,N,SCALE")
    sub.add_argument("--n-s-axis", dest="n_s_axis", default=None, metavar="MIN,MAX,N,SCALE")
    sub.add_argument("--n-n-axis", dest="n_n_axis", default=None, metavar="MIN,MAX,N,SCALE")
    sub.add_argument("--q-modes", dest="q_modes", type=int, default=None)
    sub.add_argument("--out", default=None)
    _add_scene_flags(sub)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srfisher",
        description="information limits for resolving two identical incoherent sources in noise",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_qfi = subs.add_parser("qfi-sweep", help="quantum-information grid to CSV")
    _add_sweep_flags(p_qfi)
    p_qfi.add_argument("--solver", action="store_true",
                       help="compute with the covariance-equation solver instead of the closed form")

    p_cfi = subs.add_parser("cfi-sweep", help="mode-counting information grid to CSV")
    _add_sweep_flags(p_cfi)

    p_ratio = subs.add_parser("ratio-map", help="classical/quantum ratio grid to CSV")
    _add_sweep_flags(p_ratio)

    p_oracle = subs.add_parser("oracle-check", help="Fock oracle vs closed form (JSON)")
    p_oracle.add_argument("--points", default=None,
                          help="JSON file with [[s, eta_n_s, n_n], ...]; default 6-point panel")
    p_oracle.add_argument("--cutoff", type=int, default=None)
    p_oracle.add_argument("--fd-step", dest="fd_step", type=float, default=None)
    p_oracle.add_argument("--out", default="oracle_check.json")

    p_mc = subs.add_parser("mc-validate", help="sampled vs analytic moments (JSON)")
    p_mc.add_argument("--seed", type=int, default=42)
    p_mc.add_argument("--samples", type=int, default=1_000_000)
    p_mc.add_argument("--q-modes", dest="q_modes", type=int, default=8)
    p_mc.add_argument("--out", default="mc_validate.json")
    p_mc.add_argument("--corrupt-c", dest="corrupt_c", default=None, metavar="Q,Q2,DELTA",
                      help="negative-control hook: bump one analytic covariance entry")
    _add_scene_flags(p_mc)

    p_fig = subs.add_parser("figure", help="preset sweeps: 1a 1b 1c 1d 2")
    p_fig.add_argument("name", choices=["1a", "1b", "1c", "1d", "2"])
    p_fig.add_argument("--out", default=None)

    return parser


def _run(args) -> int:
    if args.command in ("qfi-sweep", "cfi-sweep", "ratio-map"):
        spec = _spec_from_args(args)
        if args.command == "qfi-sweep":
            result = cmd_qfi_sweep(spec)
        elif args.command == "cfi-sweep":
            result = cmd_cfi_sweep(spec)
        else:
            result = cmd_ratio_map(spec)
        print(f"wrote {result['rows']} rows to {result['out']}")
        return 0

    if args.command == "oracle-check":
        points = None
        if args.points:
            with open(args.points, encoding="utf-8") as fh:
                points = [tuple(pt) for pt in json.load(fh)]
        doc = cmd_oracle_check(points, args.cutoff, args.fd_step, args.out)
        print(f"wrote {args.out}; max relative error "
              f"{doc['max_rel_error']!r}; pass={doc['pass']}")
        return 0 if doc["pass"] else 2

    if args.command == "mc-validate":
        params = SceneParams(
            s=args.s if args.s is not None else 2.0,
            sigma=args.sigma if args.sigma is not None else 1.0,
            eta=args.eta if args.eta is not None else 0.25,
            n_s=args.n_s if args.n_s is not None else 2.0,
            n_n=args.n_n if args.n_n is not None else 0.05,
            dark=args.dark if args.dark is not None else 0.0,
        )
        cfg = montecarlo.McConfig(samples=args.samples, seed=args.seed,
                                  params=params, mode_count=args.q_modes)
        corrupt = None
        if args.corrupt_c:
            qa, qb, bump = args.corrupt_c.split(",")
            corrupt = (int(qa), int(qb), float(bump))
        doc = cmd_mc_validate(cfg, args.out, corrupt)
        print(f"wrote {args.out}; max |z_mu|={doc['max_abs_z_mu']:.2f} "
              f"max |z_C|={doc['max_abs_z_c']:.2f}; pass={doc['pass']}")
        return 0 if doc["pass"] else 2

    if args.command == "figure":
        result = cmd_figure(args.name, args.out)
        print(f"wrote {result['rows']} rows to {result['out']}")
        return 0

    raise ValueError(f"unhandled command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1
    except SrfisherError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
