import json
import os

import pytest

from semilin import run_monte_carlo
from semilin.config import config_hash, parse_config
from semilin.results import ResultsIOError, format_table, summary_tables, write_results

CONFIG = """\
mode: monte-carlo
seed: 11
model:
  a: 0.5
  f: {kind: linear, scale: 1.0}
experiment:
  n: 200
  reps: 40
  schemes: [LSE, Optimal]
  time_grid: [0.25, 0.5, 1.0]
"""


@pytest.fixture(scope="module")
def cfg():
    return parse_config(CONFIG)


@pytest.fixture(scope="module")
def summary(cfg):
    return run_monte_carlo(cfg.experiment_config())


def test_two_schemes_three_times_give_six_rows(summary):
    tables = summary_tables(summary)
    dev = tables["deviations.csv"].splitlines()
    assert len(dev) == 1 + 6
    assert dev[0].startswith("scheme,t,steps,mean,variance,scaled_variance,q10")
    assert [r.split(",")[0] for r in dev[1:]] == ["LSE"] * 3 + ["Optimal"] * 3
    long_rows = tables["plot_long.csv"].splitlines()
    assert long_rows[0] == "scheme,t,statistic,value"
    assert len(long_rows) - 1 == 6 * (3 + 9)


def test_rerun_is_byte_identical(tmp_path, cfg, summary):
    a = write_results(tmp_path / "a", cfg, summary=summary)
    again = run_monte_carlo(cfg.experiment_config())
    b = write_results(tmp_path / "b", cfg, summary=again)
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
        assert b"\r" not in pa.read_bytes()


def test_manifest_contents(tmp_path, cfg, summary):
    write_results(tmp_path, cfg, summary=summary)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config_hash"] == config_hash(cfg)
    assert manifest["master_seed"] == 11
    assert manifest["tool_version"]
    assert set(manifest["files"]) == {"config.yaml", "deviations.csv", "plot_long.csv", "schemes.csv"}
    assert parse_config((tmp_path / "config.yaml").read_text()) == cfg


@pytest.mark.parametrize("old, new", [
    ("seed: 11", "seed: 12"), ("a: 0.5", "a: 0.25"), ("n: 200", "n: 201"), ("reps: 40", "reps: 41"),
    ("[LSE, Optimal]", "[Optimal, LSE]"), ("[0.25, 0.5, 1.0]", "[0.5, 1.0]"),
])
def test_hash_changes_iff_config_changes(cfg, old, new):
    assert config_hash(parse_config(CONFIG.replace(old, new))) != config_hash(cfg)
    # cosmetic edits (comments, flow vs block style, key order) keep the hash
    cosmetic = "# a comment\n" + CONFIG.replace("[LSE, Optimal]", "\n    - LSE\n    - Optimal")
    assert config_hash(parse_config(cosmetic)) == config_hash(cfg)


def test_io_error_names_path(tmp_path, cfg):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ResultsIOError) as err:
        write_results(blocker / "sub", cfg, files={"x.csv": "a\n"})
    assert str(blocker) in str(err.value)


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_directory(tmp_path, cfg):
    tmp_path.chmod(0o500)
    try:
        with pytest.raises(ResultsIOError):
            write_results(tmp_path, cfg, files={"x.csv": "a\n"})
    finally:
        tmp_path.chmod(0o700)


def test_format_table_cells():
    text = format_table([{"x": 0.1, "n": 3, "ok": True, "s": "LSE"}])
    assert text == "x,n,ok,s\n0.10000000000000001,3,true,LSE\n"
