"""Deterministic result tables and run manifests.

Every table is comma-separated with a fixed column order, floats written
with 17 significant digits and LF line endings, so identical runs produce
byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from . import __version__
from .config import RunConfig, config_hash, serialize_config
from .estimators import EstimateResult
from .experiments import DECILES, McSummary
from .series import fmt


class ResultsIOError(OSError):
    pass


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt(v)
    return str(v)


def format_table(rows: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0]) if rows else []
    out = [",".join(columns)]
    out += [",".join(_cell(row[c]) for c in columns) for row in rows]
    return "\n".join(out) + "\n"


QUANTILE_COLUMNS = [f"q{int(round(p * 100)):02d}" for p in DECILES]
DEVIATION_COLUMNS = ["scheme", "t", "steps", "mean", "variance", "scaled_variance"] + QUANTILE_COLUMNS
SCHEME_COLUMNS = ["scheme", "V_mean", "V_std", "V_median", "V_iqr", "Q_mean", "Q_std", "G_mean",
                  "G_std", "predicted_V", "normality_max_dev", "degenerate", "valid"]
ESTIMATE_COLUMNS = ["scheme", "a_hat", "Q_n", "G_n", "V_n", "n", "denominator_magnitude"]


def summary_tables(summary: McSummary) -> dict[str, str]:
    """``deviations``, ``schemes`` and the long-format ``plot`` table."""
    dev_rows, scheme_rows, long_rows = [], [], []
    for s in summary.schemes:
        for ts in s.times:
            row = {"scheme": s.scheme, "t": ts.t, "steps": ts.steps, "mean": ts.mean,
                   "variance": ts.variance, "scaled_variance": ts.scaled_variance}
            row.update(zip(QUANTILE_COLUMNS, ts.quantiles))
            dev_rows.append(row)
            for stat in DEVIATION_COLUMNS[3:]:
                long_rows.append({"scheme": s.scheme, "t": ts.t, "statistic": stat, "value": row[stat]})
        scheme_rows.append({c: getattr(s, c) for c in SCHEME_COLUMNS})
    return {
        "deviations.csv": format_table(dev_rows, DEVIATION_COLUMNS),
        "schemes.csv": format_table(scheme_rows, SCHEME_COLUMNS),
        "plot_long.csv": format_table(long_rows, ["scheme", "t", "statistic", "value"]),
    }


def estimate_table(estimates: dict[str, EstimateResult]) -> str:
    rows = [{"scheme": name, **{c: getattr(r, c) for c in ESTIMATE_COLUMNS[1:]}}
            for name, r in estimates.items()]
    return format_table(rows, ESTIMATE_COLUMNS)


def _write(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ResultsIOError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def write_results(out_dir, config: RunConfig, files: dict[str, str] | None = None,
                  summary: McSummary | None = None,
                  estimates: dict[str, EstimateResult] | None = None,
                  tables: dict[str, list[dict]] | None = None) -> list[Path]:
    """Write result tables, the normalised config and a manifest into ``out_dir``.

    ``files`` are pre-formatted texts (e.g. a series file); ``tables`` map a
    base name to a list of row dicts.  Returns the paths written, manifest last.
    """
    out = Path(out_dir)
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise ResultsIOError(exc.errno, f"cannot create {out}: {exc.strerror}") from exc
    texts = dict(files or {})
    if summary is not None:
        texts.update(summary_tables(summary))
    if estimates is not None:
        texts["estimates.csv"] = estimate_table(estimates)
    for name, rows in (tables or {}).items():
        texts[f"{name}.csv"] = format_table(rows)
    texts["config.yaml"] = serialize_config(config)
    written = []
    for name in sorted(texts):
        _write(out / name, texts[name])
        written.append(out / name)
    manifest = {
        "config_hash": config_hash(config),
        "master_seed": config.seed,
        "mode": config.mode,
        "tool": "semilin",
        "tool_version": __version__,
        "files": {name: hashlib.sha256(texts[name].encode("utf-8")).hexdigest() for name in sorted(texts)},
    }
    if summary is not None:
        manifest["valid"] = summary.valid
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(out / "manifest.json")
    return written
