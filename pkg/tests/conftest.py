import numpy as np
import pytest

from semilin import FunctionSpec, GammaDist, ModelSpec, NoiseSpec

ACCEPTANCE_LINES = []


def hetero_model(a=0.4, b_scale=0.6, f=None):
    """State-dependent noise eps_k = gamma_k * (1 + b_scale * tanh(xi_{k-1}))."""
    return ModelSpec(
        a, f or FunctionSpec("scaled-tanh", 1.0),
        NoiseSpec("heteroscedastic", GammaDist("uniform", 1.0), FunctionSpec("scaled-tanh", b_scale), 1.0))


def random_lip_tables(count, seed, lo=-20.0, hi=20.0, knots=41):
    """Random piecewise-linear Lip functions through the origin."""
    rng = np.random.default_rng(seed)
    xs = np.linspace(lo, hi, knots)
    zero = int(np.argmin(np.abs(xs)))
    out = []
    for _ in range(count):
        slopes = rng.uniform(-2.0, 2.0, knots - 1)
        ys = np.concatenate([[0.0], np.cumsum(slopes * np.diff(xs))])
        ys -= ys[zero]
        out.append(FunctionSpec("custom-table", xs=tuple(xs), ys=tuple(ys)))
    return out


@pytest.fixture
def ar1():
    return ModelSpec(0.5)


@pytest.fixture
def hetero():
    return hetero_model()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
