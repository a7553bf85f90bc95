from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from semilin.summation import csum, running_sums

EPS = np.finfo(float).eps
finite = st.floats(-1e12, 1e12, allow_nan=False)


def exact(xs):
    return float(sum(Fraction(x) for x in xs))


def test_cancellation():
    x = np.array([1e16, 1.0, -1e16, 1.0] * 1000)
    assert csum(x) == 2000.0
    assert running_sums(x[:, None], [x.size])[0, 0] == 2000.0


@given(arrays(float, st.tuples(st.integers(1, 60), st.integers(1, 4)), elements=finite))
def test_running_sums_match_exact(x):
    n = x.shape[0]
    stops = sorted({0, n // 3, n // 2, n})
    out = running_sums(x, stops)
    for i, s in enumerate(stops):
        for j in range(x.shape[1]):
            want = exact(x[:s, j].tolist())
            # compensated bound: eps |S| + n eps^2 sum |x|
            slack = EPS * abs(want) + s * EPS**2 * float(np.abs(x[:s, j]).sum())
            assert abs(out[i, j] - want) <= slack


@given(st.lists(finite, min_size=1, max_size=200))
def test_csum_exactly_rounded(xs):
    assert csum(xs) == exact(xs)
