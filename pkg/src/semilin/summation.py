"""Compensated summation.

Single series go through :func:`math.fsum` (exactly rounded).  Batches laid
out time-major, shape ``(n, m)``, are summed column-wise with a vectorised
Knuth TwoSum so that every column gets its own error-free running sum.
"""
from __future__ import annotations

import math

import numpy as np


def csum(x) -> float:
    """Exactly rounded sum of a 1-d sequence."""
    return math.fsum(np.asarray(x, dtype=float).ravel().tolist())


def running_sums(x: np.ndarray, stops) -> np.ndarray:
    """Compensated prefix sums of a time-major array at the given stops.

    ``x`` has shape ``(n, m)``; ``stops`` are prefix lengths in ``[0, n]``.
    Returns an array of shape ``(len(stops), m)`` whose row ``i`` is the sum
    of ``x[:stops[i]]`` along axis 0.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, m = x.shape
    stops = [int(s) for s in stops]
    if any(s < 0 or s > n for s in stops):
        raise ValueError(f"stops must lie in [0, {n}]")
    out = np.empty((len(stops), m))
    want = {}
    for i, s in enumerate(stops):
        want.setdefault(s, []).append(i)
    s_acc = np.zeros(m)
    c_acc = np.zeros(m)
    t = np.empty(m)
    z = np.empty(m)
    e = np.empty(m)
    for i in want.get(0, ()):
        out[i] = 0.0
    for k in range(n):
        v = x[k]
        np.add(s_acc, v, out=t)
        np.subtract(t, s_acc, out=z)
        # e = (s - (t - z)) + (v - z)
        np.subtract(t, z, out=e)
        np.subtract(s_acc, e, out=e)
        np.subtract(v, z, out=z)
        np.add(e, z, out=e)
        c_acc += e
        s_acc, t = t, s_acc
        rows = want.get(k + 1)
        if rows:
            total = s_acc + c_acc
            for i in rows:
                out[i] = total
    return out
