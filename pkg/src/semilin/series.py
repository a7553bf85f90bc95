"""Delimited series files carrying an observed path ``xi_0..xi_n``.

Layout::

    # semilin-series: 1
    # variance_function: {"kind": "iid-bounded", "gamma": {...}}   (optional)
    k,xi,sigma2
    0,1,
    1,0.5,1
    ...

Row ``k`` holds ``xi_k`` and, optionally, ``sigma2_k`` (the variance of
``eps_k`` given the past; row 0 is ignored).  An ``eps`` column may follow.
When ``sigma2`` is absent the metadata may name a noise model from which the
variances are recomputed.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, ValidationError
from .functions import FunctionSpec
from .model import DiscretePath
from .noise import NoiseSpec, conditional_variance

KNOWN_COLUMNS = ("k", "xi", "sigma2", "eps")


def fmt(x) -> str:
    """17 significant digits: exact float round trip."""
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class SeriesData:
    xi: np.ndarray
    sigma2: np.ndarray | None
    eps: np.ndarray | None
    variance_function: NoiseSpec | None
    metadata: dict

    @property
    def variance_source(self) -> str:
        if self.sigma2 is not None:
            return "column"
        if self.variance_function is not None:
            return "function"
        return "none"

    def to_path(self, f: FunctionSpec) -> DiscretePath:
        """Path usable by the estimators.

        Shocks cannot be reconstructed without the true parameter, so
        ``eps`` is None unless the file carried it; diagnostics that need
        shocks check ``path.has_noise``.
        """
        sigma2 = self.sigma2
        if sigma2 is None and self.variance_function is not None:
            ks = np.arange(1, len(self.xi))
            sigma2 = np.array([conditional_variance(self.variance_function, int(k), x)
                               for k, x in zip(ks, self.xi[:-1])])
        return DiscretePath(xi=self.xi, eps=self.eps, sigma2=sigma2, f=f)


def _parse_float(text, row, col):
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"row {row}: non-numeric value {text!r} in column {col!r}")
    if not np.isfinite(value):
        raise ValidationError(f"row {row}: non-finite value {text!r} in column {col!r}")
    return value


def read_series(text: str) -> SeriesData:
    """Parse series text; the first offending row is named in any error.

    Row numbers count data rows from 1 (the header is row 0).
    """
    metadata = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if sep:
                metadata[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise ValidationError("series file has no header")
    reader = csv.reader(io.StringIO("\n".join(body)))
    header = [h.strip() for h in next(reader)]
    for h in header:
        if h not in KNOWN_COLUMNS:
            raise ValidationError(f"row 0: unknown column {h!r}; expected a subset of {KNOWN_COLUMNS}")
    if "k" not in header or "xi" not in header:
        raise ValidationError("row 0: header must contain columns 'k' and 'xi'")
    idx = {h: i for i, h in enumerate(header)}
    ks, xi, s2, eps = [], [], [], []
    for row, cells in enumerate(reader, 1):
        if len(cells) != len(header):
            raise ValidationError(f"row {row}: expected {len(header)} cells, got {len(cells)}")
        cells = [c.strip() for c in cells]
        try:
            k = int(cells[idx["k"]])
        except ValueError:
            raise ValidationError(f"row {row}: non-integer index {cells[idx['k']]!r}")
        if k != len(ks):
            raise ValidationError(f"row {row}: index {k} breaks contiguity (expected {len(ks)})")
        ks.append(k)
        xi.append(_parse_float(cells[idx["xi"]], row, "xi"))
        if "sigma2" in idx:
            cell = cells[idx["sigma2"]]
            if k == 0 and cell == "":
                s2.append(np.nan)
            else:
                v = _parse_float(cell, row, "sigma2")
                if k > 0 and v <= 0:
                    raise ValidationError(f"row {row}: sigma2 must be strictly positive, got {cell}")
                s2.append(v)
        if "eps" in idx:
            cell = cells[idx["eps"]]
            eps.append(np.nan if k == 0 and cell == "" else _parse_float(cell, row, "eps"))
    if len(xi) < 2:
        raise ValidationError("series needs at least two observations")
    vf = None
    if "sigma2" not in idx and "variance_function" in metadata:
        try:
            vf = NoiseSpec.from_dict(json.loads(metadata["variance_function"]))
        except (json.JSONDecodeError, TypeError, KeyError) as exc:
            raise ValidationError(f"metadata: unreadable variance_function ({exc})")
    return SeriesData(
        xi=np.asarray(xi), sigma2=np.asarray(s2[1:]) if "sigma2" in idx else None,
        eps=np.asarray(eps[1:]) if "eps" in idx else None, variance_function=vf, metadata=metadata)


def ingest_series(path, require_variance: bool = False) -> SeriesData:
    """Read a series file from disk.

    With ``require_variance`` (the Optimal scheme was requested) a file with
    neither a ``sigma2`` column nor a variance function is rejected.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        data = read_series(fh.read())
    if require_variance and data.variance_source == "none":
        raise PreconditionError(
            f"{path}: Optimal weights need a sigma2 column or a variance_function metadata entry")
    return data


def format_series(path: DiscretePath, variance_function: NoiseSpec | None = None) -> str:
    lines = ["# semilin-series: 1"]
    if variance_function is not None and path.sigma2 is None:
        lines.append("# variance_function: " + json.dumps(variance_function.to_dict(), sort_keys=True))
    cols = ["k", "xi"]
    if path.sigma2 is not None:
        cols.append("sigma2")
    if path.eps is not None:
        cols.append("eps")
    lines.append(",".join(cols))
    for k, x in enumerate(path.xi):
        cells = [str(k), fmt(x)]
        if path.sigma2 is not None:
            cells.append("" if k == 0 else fmt(path.sigma2[k - 1]))
        if path.eps is not None:
            cells.append("" if k == 0 else fmt(path.eps[k - 1]))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
