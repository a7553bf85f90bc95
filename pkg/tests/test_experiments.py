import numpy as np
import pytest

from semilin import LSE, OPTIMAL, ContinuousModelSpec, ExperimentConfig, FunctionSpec, ModelSpec, ValidationError
from semilin import WeightScheme, compare_schemes, convergence_diagnostics, run_monte_carlo
from semilin.experiments import BATCH_SIZE
from semilin.results import summary_tables
from conftest import hetero_model


def small(model=None, **kw):
    base = dict(model=model or ModelSpec(0.5), schemes=(LSE, OPTIMAL), n=400, reps=300,
                time_grid=(0.25, 0.5, 1.0), master_seed=5)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(ValidationError):
        small(reps=1)
    with pytest.raises(ValidationError):
        small(time_grid=(0.5, 0.25))
    with pytest.raises(ValidationError):
        small(time_grid=(0.0, 1.0))
    with pytest.raises(ValidationError):
        small(schemes=(LSE, LSE))
    with pytest.raises(ValidationError):
        ExperimentConfig(ContinuousModelSpec(0.5), reps=10)


def test_reproducible_with_tiny_reps():
    cfg = small(reps=2)
    assert summary_tables(run_monte_carlo(cfg)) == summary_tables(run_monte_carlo(cfg))


def test_reproducible_across_thread_counts(monkeypatch):
    cfg = small(reps=BATCH_SIZE + 50)
    monkeypatch.setenv("SEMILIN_THREADS", "1")
    one = run_monte_carlo(cfg)
    monkeypatch.setenv("SEMILIN_THREADS", "8")
    eight = run_monte_carlo(cfg)
    assert summary_tables(one) == summary_tables(eight)
    for label in ("LSE", "Optimal"):
        assert np.array_equal(one.samples[label]["deviation"], eight.samples[label]["deviation"])


def test_bad_thread_setting(monkeypatch):
    monkeypatch.setenv("SEMILIN_THREADS", "zero")
    with pytest.raises(ValidationError):
        run_monte_carlo(small(reps=2))


def test_summary_shape():
    s = run_monte_carlo(small())
    assert [x.scheme for x in s.schemes] == ["LSE", "Optimal"]
    for sc in s.schemes:
        assert [t.t for t in sc.times] == [0.25, 0.5, 1.0]
        assert [t.steps for t in sc.times] == [100, 200, 400]
        assert len(sc.times[0].quantiles) == 9
        assert sc.at(0.5).scaled_variance == pytest.approx(0.25 * sc.at(0.5).variance)
    assert s.prefix_collisions == 0
    assert s.valid


def test_homoscedastic_schemes_coincide():
    s = run_monte_carlo(small())
    lse, opt = s.scheme("LSE"), s.scheme("Optimal")
    # with constant variance the optimal weights are f / var, a multiple of f
    assert opt.at(1.0).variance == pytest.approx(lse.at(1.0).variance, rel=1e-9)
    assert opt.V_mean == pytest.approx(lse.V_mean, rel=1e-9)


def test_degenerate_replicates_are_counted():
    # f vanishes on [-1, 1] except a thin ramp, so many short prefixes have zero denominator
    flat = FunctionSpec("custom-table", xs=(-50.0, -3.0, 0.0, 3.0, 50.0), ys=(-0.47, 0.0, 0.0, 0.0, 0.47))
    cfg = small(ModelSpec(0.5, flat), schemes=(LSE,), n=5, time_grid=(0.2, 1.0))
    s = run_monte_carlo(cfg)
    sc = s.scheme("LSE")
    assert sc.degenerate > 0.01 * cfg.reps
    assert not sc.valid and not s.valid
    assert len(s.samples["LSE"]["deviation"][0]) == cfg.reps - sc.degenerate


def test_compare_orders_by_variance():
    cfg = small(hetero_model(), n=1000, reps=400,
                schemes=(LSE, OPTIMAL, WeightScheme("Custom", FunctionSpec("scaled-sine", 1.0), name="sine")))
    rows = compare_schemes(cfg)
    assert [r["rank"] for r in rows] == [1, 2, 3]
    assert rows[0]["scheme"] == "Optimal"
    variances = [r["deviation_variance"] for r in rows]
    assert variances == sorted(variances)
    with pytest.raises(ValidationError):
        compare_schemes(small(schemes=(LSE,)))


def test_optimal_has_smallest_mean_v_n():
    cfg = small(hetero_model(), n=1000, reps=200,
                schemes=(LSE, OPTIMAL, WeightScheme("Custom", FunctionSpec("saturating-ramp", 1.0))))
    s = run_monte_carlo(cfg)
    assert s.scheme("Optimal").V_mean == min(sc.V_mean for sc in s.schemes)


def test_predicted_v_attached_to_optimal():
    cfg = small(predict=True, limit_r=10, limit_n=5000, limit_reps=10)
    s = run_monte_carlo(cfg)
    assert s.scheme("Optimal").predicted_V == pytest.approx(0.75, abs=0.03)
    assert np.isnan(s.scheme("LSE").predicted_V)


def test_burn_in_shifts_the_window():
    cfg = small(schemes=(LSE,), reps=2, burn_in=100, time_grid=(1.0,))
    s = run_monte_carlo(cfg)
    assert s.steps == 400


def test_continuous_monte_carlo_runs():
    cfg = ExperimentConfig(ContinuousModelSpec(0.8), schemes=(LSE, OPTIMAL), T=20.0, dt=0.01, reps=50,
                           time_grid=(0.5, 1.0), master_seed=1)
    s = run_monte_carlo(cfg)
    assert s.kind == "continuous" and s.steps == 2000 and s.horizon == pytest.approx(20.0)
    assert s.scheme("LSE").at(1.0).variance > 0


def test_convergence_diagnostics_ar1():
    cfg = small(reps=20, schemes=(OPTIMAL,))
    out = convergence_diagnostics(cfg, [2, 10, 30], [2000, 20_000])
    last = [r for r in out["limit"] if r["r"] == 30 and r["n"] == 20_000][0]
    assert last["limit_V"] == pytest.approx(0.75, abs=0.03)
    disp = {r["n"]: r for r in out["dispersion"]}
    assert disp[20_000]["Q_std"] < disp[2000]["Q_std"]
    with pytest.raises(ValidationError):
        convergence_diagnostics(cfg, [10, 2], [100])


def test_convergence_diagnostics_independent_case():
    cfg = small(ModelSpec(0.0), reps=20, schemes=(OPTIMAL,))
    out = convergence_diagnostics(cfg, [1, 3, 8], [20_000])
    for row in out["limit"]:
        assert row["limit_V"] == pytest.approx(1.0, abs=0.01)
