"""Experiment harness: on-disk formats, grid runner, CSV and SVG reports.

All randomness flows from the configured seed through per-cell, per-trial
derived seeds, so reruns are bit-identical regardless of scheduling. The
environment variable PMLLAB_THREADS caps trial parallelism.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .core import Distribution, Profile, Sample, sorted_l1, lp_distance
from .dist_est import estimate_unsorted_l1, tpml_distribution
from .distributions import FAMILIES, RngSeed, draw_sample, make
from .pml_em import EmConfig, approximate_pml
from .properties import empirical_distribution, property_value
from .uniformity import t_pml_test

TASKS = ("l1", "sorted_l1", "entropy", "renyi", "support", "coverage", "uniformity")
ESTIMATORS = ("pml", "empirical", "empirical_nlogn", "tpml")

CSV_HEADER = "distribution,n,estimator,mean_error,std_error,trials"

_PROPERTY_TASKS = {"entropy": "entropy", "renyi": "renyi", "support": "support", "coverage": "coverage"}


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def read_profile_file(path) -> Profile:
    """Profile file: space-separated non-negative integers, the i-th being
    phi_i; the sample size is inferred as sum(i * phi_i)."""
    tokens = Path(path).read_text(encoding="utf-8").split()
    phis = []
    for tok in tokens:
        if not tok.isdigit():
            raise ValueError(f"malformed profile token {tok!r}")
        phis.append(int(tok))
    return Profile.from_dense(phis)


def write_profile_file(profile: Profile, path) -> None:
    dense = profile.dense()
    Path(path).write_text(" ".join(str(c) for c in dense) + "\n", encoding="utf-8")


def write_pml_file(dist: Distribution, path) -> None:
    """Probability-vector file: one decimal per line, 17 significant digits."""
    Path(path).write_text("".join(f"{v:.17g}\n" for v in dist.probs), encoding="utf-8")


def read_pml_file(path) -> Distribution:
    vals = []
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            raise ValueError(f"non-numeric probability on line {ln}: {line!r}") from None
        if not math.isfinite(v) or v < 0.0:
            raise ValueError(f"invalid probability on line {ln}: {line!r}")
        vals.append(v)
    return Distribution(vals)


def write_sample_file(sample: Sample, path) -> None:
    """Sample file: one 'symbol multiplicity' pair per line, sorted by symbol."""
    lines = [f"{s} {sample.counts[s]}" for s in sorted(sample.counts)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_sample_file(path) -> Sample:
    counts: dict[int, int] = {}
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or not parts[0].lstrip("-").isdigit() or not parts[1].isdigit():
            raise ValueError(f"malformed sample line {ln}: {line!r}")
        sym, mult = int(parts[0]), int(parts[1])
        if sym in counts:
            raise ValueError(f"duplicate symbol {sym} on line {ln}")
        counts[sym] = mult
    return Sample(counts)


# ---------------------------------------------------------------------------
# Experiment configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark grid: a task evaluated per (distribution, n, estimator)."""

    task: str
    distributions: tuple[str, ...]
    k: int
    n_grid: tuple[int, ...]
    seed: RngSeed = field(default_factory=RngSeed)
    trials: int = 30
    alpha: float | None = None
    coverage_m: int | None = None
    epsilon: float | None = None
    estimators: tuple[str, ...] = ("pml", "empirical")
    max_seconds: float | None = None
    em_iterations: int = 30
    mcmc_sweeps: int = 60
    max_support: int = 10000

    def __post_init__(self):
        if isinstance(self.seed, int):
            object.__setattr__(self, "seed", RngSeed(self.seed))
        object.__setattr__(self, "distributions", tuple(self.distributions))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        for d in self.distributions:
            if d not in FAMILIES:
                raise ValueError(f"unknown distribution {d!r}")
        if not self.distributions:
            raise ValueError("need at least one distribution")
        for e in self.estimators:
            if e not in ESTIMATORS:
                raise ValueError(f"unknown estimator {e!r}")
        if not self.estimators:
            raise ValueError("need at least one estimator")
        if not self.n_grid or list(self.n_grid) != sorted(self.n_grid):
            raise ValueError("n_grid must be non-empty and ascending")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.task == "renyi" and self.alpha is None:
            raise ValueError("renyi task needs alpha")
        if self.task == "coverage" and self.coverage_m is None:
            raise ValueError("coverage task needs coverage_m")
        if self.task == "uniformity":
            if self.epsilon is None:
                raise ValueError("uniformity task needs epsilon")
            if set(self.estimators) != {"pml"}:
                raise ValueError("uniformity task supports only the pml estimator")
        if self.task == "l1" and "tpml" in self.estimators:
            raise ValueError("tpml is a multiset estimator; it has no unsorted-l1 form")

    def em_config(self, seed: RngSeed) -> EmConfig:
        return EmConfig(
            em_iterations=self.em_iterations,
            max_support=self.max_support,
            mcmc_sweeps_per_estep=self.mcmc_sweeps,
            seed=seed,
        )


_CONFIG_KEYS = {
    "task": str,
    "distributions": "strlist",
    "k": int,
    "n_grid": "intlist",
    "seed": int,
    "trials": int,
    "alpha": float,
    "coverage_m": int,
    "epsilon": float,
    "estimators": "strlist",
    "max_seconds": float,
    "em_iterations": int,
    "mcmc_sweeps": int,
    "max_support": int,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse a 'key = value' config; list values are comma-separated."""
    kwargs = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {ln}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {ln}: unknown key {key!r}")
        conv = _CONFIG_KEYS[key]
        if conv == "strlist":
            kwargs[key] = tuple(tok.strip() for tok in value.split(",") if tok.strip())
        elif conv == "intlist":
            kwargs[key] = tuple(int(tok) for tok in value.split(",") if tok.strip())
        else:
            kwargs[key] = conv(value)
    if "seed" in kwargs:
        kwargs["seed"] = RngSeed(kwargs["seed"])
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

class ResultRow(NamedTuple):
    distribution: str
    n: int
    estimator: str
    mean_error: float
    std_error: float
    trials: int


def worker_count() -> int:
    env = os.environ.get("PMLLAB_THREADS")
    if env:
        count = int(env)
        if count < 1:
            raise ValueError("PMLLAB_THREADS must be >= 1")
        return count
    return min(4, os.cpu_count() or 1)


def _estimate_dist(cfg: ExperimentConfig, est: str, sample: Sample, big: Sample | None,
                   em_cfg: EmConfig) -> Distribution:
    if cfg.task == "l1":
        if est == "pml":
            return estimate_unsorted_l1(sample, alphabet=cfg.k, cfg=em_cfg)
        if est == "empirical":
            return empirical_distribution(sample, cfg.k)
        return empirical_distribution(big, cfg.k)
    # sorted_l1 and property tasks work on multiset estimates
    if est == "pml":
        return approximate_pml(sample, cfg=em_cfg)
    if est == "tpml":
        return tpml_distribution(sample, cfg=em_cfg)
    if est == "empirical":
        return empirical_distribution(sample)
    return empirical_distribution(big)


def _trial_errors(cfg: ExperimentConfig, truth: Distribution, dist_name: str,
                  n: int, trial_seed: RngSeed) -> dict[str, float]:
    sample = draw_sample(truth, n, trial_seed.derive(1))
    em_cfg = cfg.em_config(trial_seed.derive(2))
    big = None
    if "empirical_nlogn" in cfg.estimators:
        big = draw_sample(truth, math.ceil(n * math.log(n)), trial_seed.derive(3))

    out = {}
    if cfg.task == "uniformity":
        # ground truth: the non-uniform families used with this task must be
        # at least epsilon-far from uniform in l1
        label = 0 if dist_name == "uniform" else 1
        pml = approximate_pml(sample, k_hint=cfg.k, cfg=em_cfg)
        verdict = t_pml_test(sample, cfg.k, cfg.epsilon, pml)
        out["pml"] = float(verdict != label)
        return out

    param = None
    if cfg.task == "renyi":
        param = cfg.alpha
    elif cfg.task == "coverage":
        param = cfg.coverage_m
    target = None
    if cfg.task in _PROPERTY_TASKS:
        target = property_value(truth, _PROPERTY_TASKS[cfg.task], param)

    for est in cfg.estimators:
        est_dist = _estimate_dist(cfg, est, sample, big, em_cfg)
        if cfg.task == "l1":
            out[est] = lp_distance(est_dist, truth, 1)
        elif cfg.task == "sorted_l1":
            out[est] = sorted_l1(est_dist, truth)
        else:
            out[est] = abs(property_value(est_dist, _PROPERTY_TASKS[cfg.task], param) - target)
    return out


def _mean_std(errors: list[float]) -> tuple[float, float]:
    mean = math.fsum(errors) / len(errors)
    if len(errors) < 2:
        return mean, 0.0
    var = math.fsum((e - mean) ** 2 for e in errors) / (len(errors) - 1)
    return mean, math.sqrt(var / len(errors))


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Run the grid and return one row per (distribution, n, estimator).

    Cells that would start after the max_seconds budget is spent are
    written as sentinel rows (NaN errors, zero trials).
    """
    started = time.monotonic()
    rows: list[ResultRow] = []
    workers = worker_count()
    for d_ix, dist_name in enumerate(cfg.distributions):
        truth = make(dist_name, cfg.k)
        for n_ix, n in enumerate(cfg.n_grid):
            if cfg.max_seconds is not None and time.monotonic() - started > cfg.max_seconds:
                for est in cfg.estimators:
                    rows.append(ResultRow(dist_name, n, est, math.nan, math.nan, 0))
                continue

            def one_trial(trial: int) -> dict[str, float]:
                return _trial_errors(cfg, truth, dist_name, n, cfg.seed.derive(d_ix, n_ix, trial))

            if workers > 1 and cfg.trials > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    per_trial = list(pool.map(one_trial, range(cfg.trials)))
            else:
                per_trial = [one_trial(t) for t in range(cfg.trials)]
            for est in cfg.estimators:
                mean, std = _mean_std([errs[est] for errs in per_trial])
                rows.append(ResultRow(dist_name, n, est, mean, std, cfg.trials))
    rows.sort(key=lambda r: (r.distribution, r.n, r.estimator))
    return rows


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(rows: list[ResultRow], path) -> None:
    lines = [CSV_HEADER]
    for r in sorted(rows, key=lambda r: (r.distribution, r.n, r.estimator)):
        lines.append(
            f"{r.distribution},{r.n},{r.estimator},{_fmt(r.mean_error)},{_fmt(r.std_error)},{r.trials}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


_PALETTE = {
    "pml": "#d62728",
    "empirical": "#1f77b4",
    "empirical_nlogn": "#2ca02c",
    "tpml": "#9467bd",
}

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _svg_chart(task: str, dist_name: str, series: dict[str, list[tuple[int, float]]]) -> str:
    xs = sorted({x for pts in series.values() for x, _ in pts})
    ys = [y for pts in series.values() for _, y in pts if math.isfinite(y)]
    if not xs or not ys:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}"></svg>'
    x0, x1 = math.log10(xs[0]), math.log10(xs[-1])
    if x1 == x0:
        x1 = x0 + 1.0
    y1 = max(ys) or 1.0
    span_x = _W - _ML - _MR
    span_y = _H - _MT - _MB

    def px(x: float) -> float:
        return _ML + (math.log10(x) - x0) / (x1 - x0) * span_x

    def py(y: float) -> float:
        return _MT + (1.0 - y / y1) * span_y

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'font-family="sans-serif" font-size="12">',
        f'<text x="{_W / 2:.1f}" y="18" text-anchor="middle">{task} error, {dist_name}</text>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<text x="{_ML - 8}" y="{_MT + 4}" text-anchor="end">{y1:.3g}</text>',
        f'<text x="{_ML - 8}" y="{_H - _MB + 4}" text-anchor="end">0</text>',
        f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle">sample size n (log scale)</text>',
    ]
    for x in xs:
        parts.append(
            f'<text x="{px(x):.1f}" y="{_H - _MB + 16}" text-anchor="middle">{x}</text>'
        )
        parts.append(
            f'<line x1="{px(x):.1f}" y1="{_H - _MB}" x2="{px(x):.1f}" y2="{_H - _MB + 4}" stroke="black"/>'
        )
    legend_y = _MT + 10
    for est in sorted(series):
        pts = [(x, y) for x, y in series[est] if math.isfinite(y)]
        if not pts:
            continue
        color = _PALETTE.get(est, "#7f7f7f")
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}"/>')
        parts.append(
            f'<line x1="{_W - _MR - 130}" y1="{legend_y}" x2="{_W - _MR - 110}" y2="{legend_y}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(f'<text x="{_W - _MR - 104}" y="{legend_y + 4}">{est}</text>')
        legend_y += 16
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg_charts(cfg: ExperimentConfig, rows: list[ResultRow], out_dir) -> list[Path]:
    """One line chart per distribution (mean error vs n, log-scaled x)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for dist_name in cfg.distributions:
        series: dict[str, list[tuple[int, float]]] = {}
        for r in rows:
            if r.distribution == dist_name:
                series.setdefault(r.estimator, []).append((r.n, r.mean_error))
        for pts in series.values():
            pts.sort()
        path = out_dir / f"{cfg.task}_{dist_name}.svg"
        path.write_text(_svg_chart(cfg.task, dist_name, series), encoding="utf-8")
        written.append(path)
    return written
