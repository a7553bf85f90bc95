"""Monte Carlo harness for the normalised deviation process.

For every replicate and scheme we record ``sqrt(n) (a_hat_[nt] - a)`` on a
grid of fractions ``t``, together with ``Q_n``, ``G_n`` and ``V_n`` at
``t = 1``.  Replicates are processed in fixed-size batches; the thread count
(``SEMILIN_THREADS``) only changes scheduling, never results.
"""
from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .continuous import ContinuousModelSpec, batch_estimates_continuous, simulate_continuous_batch
from .errors import ValidationError
from .estimators import (WeightScheme, batch_estimates, limit_variance_optimal,
                         truncated_energy_grid)
from .model import ModelSpec, PathBatch, simulate_batch
from .summation import csum

BATCH_SIZE = 256
DECILES = tuple(i / 10 for i in range(1, 10))
DEGENERATE_LIMIT = 0.01


def thread_count() -> int:
    raw = os.environ.get("SEMILIN_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"SEMILIN_THREADS must be a positive integer, got {raw!r}")
    if value < 1:
        raise ValidationError(f"SEMILIN_THREADS must be a positive integer, got {raw!r}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment.

    Discrete models use ``n``; continuous models use ``T`` and ``dt``.  The
    ``limit_*`` fields size the limiting-variance prediction attached to the
    Optimal scheme (discrete models only, when ``predict`` is set).
    """

    model: ModelSpec | ContinuousModelSpec
    schemes: tuple = (WeightScheme("LSE"), WeightScheme("Optimal"))
    n: int | None = None
    T: float | None = None
    dt: float | None = None
    reps: int = 100
    time_grid: tuple = (1.0,)
    master_seed: int = 0
    burn_in: int = 0
    predict: bool = False
    limit_r: int = 50
    limit_n: int = 100_000
    limit_reps: int = 200

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "time_grid", tuple(float(t) for t in self.time_grid))
        if self.reps < 2:
            raise ValidationError("reps must be >= 2")
        if not self.schemes:
            raise ValidationError("at least one weight scheme is required")
        labels = [s.label for s in self.schemes]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"scheme labels must be unique, got {labels}")
        tg = self.time_grid
        if not tg or any(not 0 < t <= 1 for t in tg) or list(tg) != sorted(set(tg)):
            raise ValidationError("time_grid must be sorted, distinct and within (0, 1]")
        if self.burn_in < 0:
            raise ValidationError("burn_in must be non-negative")
        if self.continuous:
            if self.T is None or self.dt is None:
                raise ValidationError("continuous experiments need T and dt")
        elif self.n is None or self.n < 1:
            raise ValidationError("discrete experiments need n >= 1")

    @property
    def continuous(self) -> bool:
        return isinstance(self.model, ContinuousModelSpec)

    @property
    def steps(self) -> int:
        if self.continuous:
            return int(round(self.T / self.dt))
        return self.n

    @property
    def horizon(self) -> float:
        """Normalising size: ``n`` in discrete time, ``T`` in continuous time."""
        return self.steps * self.dt if self.continuous else float(self.n)

    def stops(self) -> list[int]:
        return [max(1, int(math.floor(self.steps * t + 1e-9))) for t in self.time_grid]


@dataclass(frozen=True)
class TimeStats:
    t: float
    steps: int
    mean: float
    variance: float
    scaled_variance: float
    quantiles: tuple


@dataclass(frozen=True)
class SchemeSummary:
    scheme: str
    times: tuple
    V_mean: float
    V_std: float
    V_median: float
    V_iqr: float
    Q_mean: float
    Q_std: float
    G_mean: float
    G_std: float
    predicted_V: float
    normality_max_dev: float
    degenerate: int
    valid: bool

    def at(self, t: float) -> TimeStats:
        for ts in self.times:
            if abs(ts.t - t) < 1e-12:
                return ts
        raise KeyError(t)


@dataclass(frozen=True)
class McSummary:
    """Per-scheme summaries; ``samples`` holds the raw per-replicate arrays."""

    kind: str
    reps: int
    steps: int
    horizon: float
    master_seed: int
    schemes: tuple
    prefix_collisions: int
    noise_contraction: bool
    samples: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def valid(self) -> bool:
        return all(s.valid for s in self.schemes)

    def scheme(self, label: str) -> SchemeSummary:
        for s in self.schemes:
            if s.scheme == label:
                return s
        raise KeyError(label)


def _mean(x) -> float:
    return csum(x) / len(x) if len(x) else float("nan")


def _var(x) -> float:
    if len(x) < 2:
        return float("nan")
    mu = _mean(x)
    d = np.asarray(x) - mu
    return csum(d * d) / (len(x) - 1)


def _iqr(x) -> float:
    if not len(x):
        return float("nan")
    q1, q3 = np.quantile(x, [0.25, 0.75])
    return float(q3 - q1)


def _batches(reps: int):
    return [range(s, min(reps, s + BATCH_SIZE)) for s in range(0, reps, BATCH_SIZE)]


def _discrete_batch(cfg: ExperimentConfig, reps: range):
    batch = simulate_batch(cfg.model, cfg.n + cfg.burn_in, cfg.master_seed, reps)
    b = cfg.burn_in
    if b:
        batch = PathBatch(xi=batch.xi[b:], eps=batch.eps[b:], sigma2=batch.sigma2[b:],
                          gamma=batch.gamma[b:], f=batch.f, a=batch.a, seed=batch.seed,
                          replicates=batch.replicates)
    return batch, batch.gamma, lambda s: batch_estimates(s, batch, cfg.stops())


def _continuous_batch(cfg: ExperimentConfig, reps: range):
    batch = simulate_continuous_batch(cfg.model, cfg.T, cfg.dt, cfg.master_seed, reps)
    return batch, batch.unit, lambda s: batch_estimates_continuous(s, batch, cfg.stops())


def _run_batch(cfg: ExperimentConfig, reps: range):
    runner = _continuous_batch if cfg.continuous else _discrete_batch
    _, noise, estimate = runner(cfg, reps)
    prefix = min(cfg.steps, 100)
    hashes = [hashlib.sha256(np.ascontiguousarray(noise[:prefix, i]).tobytes()).hexdigest()
              for i in range(noise.shape[1])]
    out = {}
    for scheme in cfg.schemes:
        a_hat, Q, G, degenerate = estimate(scheme)
        out[scheme.label] = (a_hat, Q[-1], G[-1], degenerate)
    return hashes, out


def _collect(cfg: ExperimentConfig):
    """Run every batch (possibly threaded) and concatenate in replicate order."""
    batches = _batches(cfg.reps)
    workers = min(thread_count(), len(batches))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: _run_batch(cfg, r), batches))
    else:
        results = [_run_batch(cfg, r) for r in batches]
    hashes = [h for res in results for h in res[0]]
    merged = {}
    for scheme in cfg.schemes:
        parts = [res[1][scheme.label] for res in results]
        merged[scheme.label] = tuple(np.concatenate([p[i] for p in parts], axis=-1) for i in range(4))
    return hashes, merged


def run_monte_carlo(cfg: ExperimentConfig) -> McSummary:
    """Simulate ``cfg.reps`` replicates and summarise every scheme.

    A scheme whose denominator is degenerate on more than 1% of replicates is
    flagged invalid; degenerate replicates are excluded from its moments.
    """
    hashes, merged = _collect(cfg)
    norm = math.sqrt(cfg.horizon)
    a = cfg.model.a
    stops = cfg.stops()
    normal_q = stats.norm.ppf(DECILES)
    predicted = {}
    if cfg.predict and not cfg.continuous and any(s.kind == "Optimal" for s in cfg.schemes):
        predicted["Optimal"] = limit_variance_optimal(
            cfg.model, cfg.limit_r, cfg.limit_n, cfg.limit_reps, cfg.master_seed).value
    summaries = []
    samples = {}
    for scheme in cfg.schemes:
        a_hat, Q, G, degenerate = merged[scheme.label]
        bad = degenerate.any(axis=0) | ~np.isfinite(a_hat).all(axis=0)
        keep = ~bad
        dev = norm * (a_hat[:, keep] - a)
        q, g = Q[keep], G[keep]
        V = g / (q * q)
        times = []
        for i, (t, m) in enumerate(zip(cfg.time_grid, stops)):
            d = dev[i]
            var = _var(d)
            times.append(TimeStats(
                t=t, steps=m, mean=_mean(d), variance=var, scaled_variance=t * t * var,
                quantiles=tuple(float(v) for v in np.quantile(d, DECILES)) if d.size else
                tuple(float("nan") for _ in DECILES)))
        z = dev[-1] / np.sqrt(V) if cfg.time_grid[-1] == 1.0 else np.array([])
        normality = float(np.max(np.abs(np.quantile(z, DECILES) - normal_q))) if z.size else float("nan")
        n_bad = int(bad.sum())
        summaries.append(SchemeSummary(
            scheme=scheme.label, times=tuple(times),
            V_mean=_mean(V), V_std=math.sqrt(_var(V)) if V.size > 1 else float("nan"),
            V_median=float(np.median(V)) if V.size else float("nan"), V_iqr=_iqr(V),
            Q_mean=_mean(q), Q_std=math.sqrt(_var(q)) if q.size > 1 else float("nan"),
            G_mean=_mean(g), G_std=math.sqrt(_var(g)) if g.size > 1 else float("nan"),
            predicted_V=predicted.get(scheme.kind, float("nan")) if scheme.kind == "Optimal" else float("nan"),
            normality_max_dev=normality, degenerate=n_bad,
            valid=n_bad <= DEGENERATE_LIMIT * cfg.reps))
        samples[scheme.label] = {"deviation": dev, "V_n": V, "Q_n": q, "G_n": g}
    contraction = True if cfg.continuous else cfg.model.satisfies_noise_contraction
    return McSummary(kind="continuous" if cfg.continuous else "discrete", reps=cfg.reps,
                     steps=cfg.steps, horizon=cfg.horizon, master_seed=cfg.master_seed,
                     schemes=tuple(summaries), prefix_collisions=len(hashes) - len(set(hashes)),
                     noise_contraction=contraction, samples=samples)


def compare_schemes(cfg: ExperimentConfig, summary: McSummary | None = None) -> list[dict]:
    """Rank schemes by the empirical variance of the deviation at ``t = 1``."""
    if len(cfg.schemes) < 2:
        raise ValidationError("compare_schemes needs at least two schemes")
    if 1.0 not in cfg.time_grid:
        cfg = replace(cfg, time_grid=tuple(sorted(set(cfg.time_grid) | {1.0})))
    if summary is None:
        summary = run_monte_carlo(cfg)
    rows = []
    for s in summary.schemes:
        var = s.at(1.0).variance
        rows.append({"scheme": s.scheme, "deviation_variance": var, "mean_V_n": s.V_mean,
                     "variance_to_V_ratio": var / s.V_mean, "predicted_V": s.predicted_V,
                     "degenerate": s.degenerate, "valid": s.valid})
    rows.sort(key=lambda row: (row["deviation_variance"], row["scheme"]))
    for rank, row in enumerate(rows, 1):
        row["rank"] = rank
    return [{"rank": r.pop("rank"), **r} for r in rows]


def convergence_diagnostics(cfg: ExperimentConfig, r_grid, n_grid) -> dict[str, list[dict]]:
    """Limit-variance estimates over ``(r, n)`` and dispersion of ``(Q_n, G_n)``.

    Returns two tables: ``limit`` with one row per grid point, and
    ``dispersion`` with one row per scheme and ``n``.
    """
    if cfg.continuous:
        raise ValidationError("convergence diagnostics are defined for the discrete model")
    r_grid, n_grid = [int(r) for r in r_grid], [int(n) for n in n_grid]
    if r_grid != sorted(set(r_grid)) or n_grid != sorted(set(n_grid)):
        raise ValidationError("r_grid and n_grid must be strictly increasing")
    energy = truncated_energy_grid(cfg.model, r_grid, n_grid, cfg.reps, cfg.master_seed)
    limit = [{"r": r, "n": n, "limit_V": 1.0 / energy[i, j]}
             for i, r in enumerate(r_grid) for j, n in enumerate(n_grid)]
    sub = replace(cfg, n=max(n_grid), time_grid=tuple(n / max(n_grid) for n in n_grid),
                  predict=False)
    stops = [int(n) for n in n_grid]
    parts = {s.label: [] for s in cfg.schemes}
    for reps in _batches(cfg.reps):
        batch = simulate_batch(sub.model, sub.n, sub.master_seed, reps)
        for s in cfg.schemes:
            _, Q, G, degenerate = batch_estimates(s, batch, stops)
            parts[s.label].append((Q, G, degenerate))
    dispersion = []
    for s in cfg.schemes:
        Q = np.concatenate([p[0] for p in parts[s.label]], axis=1)
        G = np.concatenate([p[1] for p in parts[s.label]], axis=1)
        bad = np.concatenate([p[2] for p in parts[s.label]], axis=1).any(axis=0)
        for j, n in enumerate(n_grid):
            q, g = Q[j, ~bad], G[j, ~bad]
            V = g / (q * q)
            dispersion.append({"scheme": s.label, "n": n, "Q_mean": _mean(q),
                               "Q_std": math.sqrt(_var(q)), "Q_iqr": _iqr(q),
                               "G_mean": _mean(g), "G_std": math.sqrt(_var(g)), "G_iqr": _iqr(g),
                               "V_median": float(np.median(V)), "V_iqr": _iqr(V),
                               "degenerate": int(bad.sum())})
    return {"limit": limit, "dispersion": dispersion}

