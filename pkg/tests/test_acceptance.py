"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s``; the lines are also
collected into the terminal summary of a full run.
"""
import shutil
import time

import numpy as np
import pytest

from semilin import (LSE, OPTIMAL, ContinuousModelSpec, ExperimentConfig, FunctionSpec, GammaDist, Intensity,
                     ModelSpec, NoiseSpec, WeightScheme, check_stationarity_continuous, check_stationarity_system,
                     estimate_continuous, estimate_discrete, functional_V_n, functional_V_T,
                     limit_variance_optimal, run_monte_carlo, simulate_continuous, simulate_discrete, weights_for)
from semilin.cli import main
from conftest import ACCEPTANCE_LINES, hetero_model, random_lip_tables
from test_continuous import G_PANEL

pytestmark = pytest.mark.slow


def record(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def ar1(variance):
    return ModelSpec(0.5, FunctionSpec("linear"), NoiseSpec("iid-bounded", GammaDist("uniform", variance)))


def test_criterion_1_ar1_oracle():
    parts, ok = [], True
    for variance, seed in ((1.0, 101), (4.0, 102)):
        start = time.perf_counter()
        s = run_monte_carlo(ExperimentConfig(ar1(variance), (LSE,), n=10_000, reps=10_000, master_seed=seed))
        elapsed = time.perf_counter() - start
        var = s.scheme("LSE").at(1.0).variance
        ok &= abs(var - 0.75) <= 0.05 and elapsed <= 120 and s.valid
        parts.append(f"var(sigma^2={variance:g})={var:.4f} in {elapsed:.0f}s")
    record(1, ok, "AR(1) LSE deviation variance 0.75 +- 0.05; " + ", ".join(parts))


def test_criterion_2_limit_variance():
    lv = limit_variance_optimal(ar1(1.0), r=50, n=100_000, reps=200, seed=7)
    record(2, abs(lv.value - 0.75) <= 0.02,
           f"limit variance {lv.value:.4f} (r/2: {lv.value_half_r:.4f}, n/2: {lv.value_half_n:.4f}), target 0.75 +- 0.02")


def test_criterion_3_stationarity_identity():
    model = hetero_model()
    discrete = max(check_stationarity_system(p, weights_for(OPTIMAL, p))
                   for p in (simulate_discrete(model, 2000, seed=s) for s in range(100)))
    wobble = ContinuousModelSpec(0.8, FunctionSpec("scaled-tanh", 1.0), Intensity(1.0, 0.5, 1.0))
    continuous = max(check_stationarity_continuous(simulate_continuous(wobble, 30.0, 0.01, seed=s), g)
                     for s in range(3) for g in G_PANEL)
    record(3, discrete <= 1e-10 and continuous <= 1e-10,
           f"max residual discrete {discrete:.2e} over 100 paths, continuous {continuous:.2e} over 10 g, limit 1e-10")


def test_criterion_4_optimality_ordering():
    model = hetero_model()
    schemes = [LSE] + [WeightScheme("Custom", h, name=f"lip{i}") for i, h in enumerate(random_lip_tables(20, 44))]
    worst = -np.inf
    for seed in range(20):
        path = simulate_discrete(model, 2000, seed=seed)
        v_opt = functional_V_n(path, weights_for(OPTIMAL, path))
        for scheme in schemes:
            v = functional_V_n(path, weights_for(scheme, path))
            worst = max(worst, (v_opt - v) / v)
    s = run_monte_carlo(ExperimentConfig(model, (LSE, OPTIMAL), n=10_000, reps=10_000, master_seed=404))
    v_lse, v_opt = s.scheme("LSE").at(1.0).variance, s.scheme("Optimal").at(1.0).variance
    record(4, worst <= 1e-10 and v_opt <= v_lse and s.valid,
           f"pathwise max (V_opt - V_h)/V_h = {worst:.2e} over 20 paths x 21 schemes; "
           f"MC variance Optimal {v_opt:.4f} <= LSE {v_lse:.4f}")


def test_criterion_5_variance_proportional_to_t():
    s = run_monte_carlo(ExperimentConfig(hetero_model(), (OPTIMAL,), n=10_000, reps=10_000,
                                         time_grid=(0.25, 0.5, 1.0), master_seed=505))
    opt = s.scheme("Optimal")
    slopes = [ts.scaled_variance / ts.t for ts in opt.times]
    spread = max(abs(x / slopes[-1] - 1) for x in slopes)
    link = abs(opt.at(1.0).variance / opt.V_mean - 1)
    record(5, spread <= 0.15 and link <= 0.10,
           f"t*var/t at t=0.25,0.5,1 = {', '.join(f'{x:.4f}' for x in slopes)} (spread {spread:.1%} <= 15%); "
           f"var(t=1)/mean V_n - 1 = {link:.1%} (<= 10%)")


def test_criterion_6_ou_oracle():
    ou = ContinuousModelSpec(0.8, FunctionSpec("linear"), Intensity(1.0))
    s = run_monte_carlo(ExperimentConfig(ou, (LSE,), T=500.0, dt=0.01, reps=2000, master_seed=606))
    var = s.scheme("LSE").at(1.0).variance
    still = ContinuousModelSpec(0.8, FunctionSpec("linear"), Intensity(0.0), xi0=1.0)
    bias = abs(estimate_continuous(simulate_continuous(still, 500.0, 0.01, seed=0), LSE).a_hat - 0.8)
    record(6, abs(var - 1.6) <= 0.25 and bias <= 1e-2,
           f"OU variance {var:.4f} (target 1.6 +- 0.25); noiseless |a_hat - a| = {bias:.1e} (<= 1e-2)")


def test_criterion_7_scale_invariance():
    path = simulate_discrete(hetero_model(), 5000, seed=3)
    mu = weights_for(WeightScheme("Custom", FunctionSpec("scaled-sine", 2.0)), path)
    wobble = ContinuousModelSpec(0.8, FunctionSpec("scaled-tanh", 1.0), Intensity(1.0, 0.5, 1.0))
    cpath = simulate_continuous(wobble, 50.0, 0.01, seed=1)
    h = lambda t, x: np.tanh(x) / (1 + 0.5 * np.sin(t))
    worst = 0.0
    for c in (-2.0, 0.1, 7.0):
        base, scaled = estimate_discrete(path, mu), estimate_discrete(path, c * mu)
        cbase, cscaled = estimate_continuous(cpath, h), estimate_continuous(cpath, lambda t, x: c * h(t, x))
        for x, y in ((base.a_hat, scaled.a_hat), (base.V_n, scaled.V_n),
                     (cbase.a_hat, cscaled.a_hat), (cbase.V_n, cscaled.V_n),
                     (functional_V_T(cpath, h), functional_V_T(cpath, lambda t, x: c * h(t, x)))):
            worst = max(worst, abs(x - y) / abs(x))
    record(7, worst <= 1e-12, f"max relative change of a_hat_n, V_n, a_hat_T, V_T over c in (-2, 0.1, 7) = {worst:.1e}")


MODEL = """\
model:
  a: 0.4
  f: {kind: scaled-tanh, scale: 1.0}
  noise:
    kind: heteroscedastic
    gamma: {kind: uniform, variance: 1.0}
    b: {kind: scaled-tanh, scale: 0.6}
"""

RUNS = {
    "simulate": MODEL + "experiment: {n: 300}\n",
    "estimate": MODEL + "estimate: {input: series.csv}\nexperiment: {schemes: [LSE, Optimal]}\n",
    "monte-carlo": MODEL + "experiment: {n: 200, reps: 300, time_grid: [0.5, 1.0]}\n",
    "compare": MODEL + "experiment: {n: 200, reps: 300, predict: true, limit_r: 10, limit_n: 2000, limit_reps: 20}\n",
    "continuous": "continuous_model: {a: 0.8, mdot: {base: 1.0, amplitude: 0.5}}\n"
                  "experiment: {T: 5.0, dt: 0.01, reps: 300, schemes: [LSE, Optimal]}\n",
    "diagnostics": MODEL + "experiment: {reps: 20, r_grid: [5, 10], n_grid: [500, 1000]}\n",
}


def test_criterion_8_reproducibility(tmp_path, monkeypatch):
    main(["simulate", "--config", str(_config(tmp_path, "simulate", tmp_path / "seed")), "--quiet"])
    (tmp_path / "series.csv").write_bytes((tmp_path / "seed" / "path.csv").read_bytes())
    mismatched, files = [], 0
    for mode in RUNS:
        outputs = []
        for threads in ("1", "8", "8"):
            monkeypatch.setenv("SEMILIN_THREADS", threads)
            out = tmp_path / mode
            shutil.rmtree(out, ignore_errors=True)
            assert main([mode, "--config", str(_config(tmp_path, mode, out)), "--quiet"]) == 0
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        files += len(outputs[0])
        if any(o != outputs[0] for o in outputs[1:]):
            mismatched.append(mode)
    record(8, not mismatched,
           f"{len(RUNS)} subcommands x 3 runs (SEMILIN_THREADS 1, 8, 8), {files} files each byte-identical"
           + (f"; mismatches in {mismatched}" if mismatched else ""))


def _config(tmp_path, mode, out):
    p = tmp_path / f"{mode}.yaml"
    p.write_text(f"mode: {mode}\nseed: 2718\noutput_dir: {out}\n" + RUNS[mode])
    return p
