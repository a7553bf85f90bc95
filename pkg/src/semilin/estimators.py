"""Weighted estimators of ``a`` and the variance functional they minimise.

For weights ``mu_k = h_k(xi_k)`` the estimator is

    a_hat = sum xi_{k+1} mu_k / sum f(xi_k) mu_k,

with ``Q_n = (1/n) sum f(xi_k) mu_k``, ``G_n = (1/n) sum sigma2_{k+1} mu_k**2``
and ``V_n = G_n / Q_n**2``.  The weights ``f / sigma2`` minimise ``V_n``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominatorError, PreconditionError, ValidationError
from .functions import FunctionSpec, certify_lipschitz
from .model import DiscretePath, ModelSpec, compose_f_r, simulate_batch
from .summation import csum, running_sums

SCHEME_KINDS = ("LSE", "Optimal", "Custom")
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class WeightScheme:
    """How weights are formed from the state.

    ``LSE`` uses ``h = f``, ``Optimal`` uses ``h_k = f / sigma2_{k+1}`` and
    ``Custom`` uses a fixed ``custom_h`` which must pass the Lipschitz grid
    test.
    """

    kind: str = "LSE"
    custom_h: FunctionSpec | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValidationError(f"unknown weight scheme {self.kind!r}; expected one of {SCHEME_KINDS}")
        if self.kind == "Custom":
            if self.custom_h is None:
                raise ValidationError("Custom weight scheme needs custom_h")
            if not certify_lipschitz(self.custom_h):
                raise ValidationError("custom_h failed the Lipschitz certification grid test")
        elif self.custom_h is not None:
            raise ValidationError(f"custom_h is only valid for Custom schemes, not {self.kind}")

    @property
    def label(self) -> str:
        return self.name or self.kind

    def to_dict(self):
        if self.kind != "Custom" and self.name is None:
            return self.kind
        d = {"kind": self.kind}
        if self.custom_h is not None:
            d["h"] = self.custom_h.to_dict()
        if self.name is not None:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d) -> "WeightScheme":
        if isinstance(d, str):
            return cls(kind=d)
        h = d.get("h")
        return cls(kind=d.get("kind", "Custom"), name=d.get("name"),
                   custom_h=FunctionSpec.from_dict(h) if h is not None else None)


LSE = WeightScheme("LSE")
OPTIMAL = WeightScheme("Optimal")


@dataclass(frozen=True)
class EstimateResult:
    a_hat: float
    Q_n: float
    G_n: float
    V_n: float
    n: int
    denominator_magnitude: float


def _weights(scheme: WeightScheme, f: FunctionSpec, x, sigma2_next, first_index: int = 0):
    """Weights for states ``x`` with next-step variances ``sigma2_next`` (same shape)."""
    if scheme.kind == "LSE":
        return f(x)
    if scheme.kind == "Custom":
        return scheme.custom_h(x)
    if sigma2_next is None:
        raise PreconditionError("Optimal weights need the conditional variances sigma2")
    bad = np.flatnonzero(np.asarray(sigma2_next).reshape(len(sigma2_next), -1).min(axis=1) <= 0)
    if bad.size:
        k = int(bad[0]) + first_index
        raise PreconditionError(
            f"Optimal weights need sigma2_(k+1) > 0; sigma2_{k + 1} = 0 at index k = {k}")
    return f(x) / sigma2_next


def weights_for(scheme: WeightScheme, path: DiscretePath) -> np.ndarray:
    """``mu_k = h_k(xi_k)`` for ``k = 0..n-1``."""
    return np.asarray(_weights(scheme, path.f, path.xi[:-1], path.sigma2), dtype=float)


def _denominator_tolerance(fmu: np.ndarray, n: int) -> float:
    return 1e-12 * n * float(np.max(np.abs(fmu))) if fmu.size else 0.0


def _check_denominator(den: float, fmu: np.ndarray, n: int) -> None:
    tol = _denominator_tolerance(fmu, n)
    if den == 0.0 or abs(den) < tol:
        raise DegenerateDenominatorError(
            f"degenerate denominator |sum f(xi_k) mu_k| = {abs(den):.3g} < {tol:.3g}",
            magnitude=abs(den), tolerance=tol)


def estimate_discrete(path: DiscretePath, mu, n: int | None = None) -> EstimateResult:
    """Weighted estimate from the first ``n`` transitions (default: all)."""
    mu = np.asarray(mu, dtype=float)
    n = path.n if n is None else int(n)
    if n < 1 or n > path.n or len(mu) < n:
        raise ValidationError(f"need 1 <= n <= {path.n} weights, got n = {n}")
    mu = mu[:n]
    fmu = path.f(path.xi[:n]) * mu
    den = csum(fmu)
    _check_denominator(den, fmu, n)
    num = csum(path.xi[1:n + 1] * mu)
    Q = den / n
    if path.sigma2 is None:
        G = V = float("nan")
    else:
        G = csum(path.sigma2[:n] * mu * mu) / n
        V = G / (Q * Q)
    return EstimateResult(a_hat=num / den, Q_n=Q, G_n=G, V_n=V, n=n, denominator_magnitude=abs(den))


def functional_V_n(path: DiscretePath, mu) -> float:
    """Variance functional ``G_n / Q_n**2``; scale-invariant in ``mu``."""
    if path.sigma2 is None:
        raise PreconditionError("V_n needs the conditional variances sigma2")
    return estimate_discrete(path, mu).V_n


def check_stationarity_system(path: DiscretePath, mu) -> float:
    """Largest relative residual of the first-order optimality system.

    For each k compares ``sigma2_{k+1} mu_k sum_i f(xi_i) mu_i`` with
    ``f(xi_k) sum_i sigma2_{i+1} mu_i**2``.
    """
    mu = np.asarray(mu, dtype=float)
    n = path.n
    fx = path.f(path.xi[:n])
    s_fmu = csum(fx * mu)
    s_smu2 = csum(path.sigma2 * mu * mu)
    lhs = path.sigma2 * mu * s_fmu
    rhs = fx * s_smu2
    return float(np.max(np.abs(lhs - rhs) / (np.abs(lhs) + np.abs(rhs) + EPS)))


def batch_estimates(scheme: WeightScheme, batch, stops):
    """Vectorised estimates over a :class:`PathBatch` at prefix lengths ``stops``.

    Returns ``(a_hat, Q, G, degenerate)``, each of shape ``(len(stops), R)``.
    """
    x = batch.xi[:-1]
    mu = np.asarray(_weights(scheme, batch.f, x, batch.sigma2), dtype=float)
    fmu = batch.f(x) * mu
    R = mu.shape[1]
    stacked = np.concatenate([fmu, batch.xi[1:] * mu, batch.sigma2 * mu * mu], axis=1)
    sums = running_sums(stacked, stops)
    den, num, g = sums[:, :R], sums[:, R:2 * R], sums[:, 2 * R:]
    # running max |f mu| for the per-prefix tolerance
    absmax = np.maximum.accumulate(np.abs(fmu), axis=0)
    m = np.asarray(stops, dtype=int)
    tol = 1e-12 * m[:, None] * absmax[np.maximum(m - 1, 0)]
    degenerate = (den == 0.0) | (np.abs(den) < tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        a_hat = num / den
        Q = den / m[:, None]
        G = g / m[:, None]
    return a_hat, Q, G, degenerate


@dataclass(frozen=True)
class LimitVariance:
    """Estimate of the limiting variance under optimal weights.

    ``value`` is at ``(r, n)``; the half-size values are convergence
    diagnostics.
    """

    value: float
    value_half_r: float
    value_half_n: float
    r: int
    n: int
    reps: int

    def __float__(self):
        return self.value


def truncated_energy_grid(model: ModelSpec, r_grid, n_grid, reps: int, seed: int,
                          batch_size: int = 32) -> np.ndarray:
    """Replicate-averaged ``(1/n) sum_{k=r}^{n-1} f(xi^r_k)**2 / sigma2_{k+1}``.

    ``xi^r_k`` is the state rebuilt from the last ``r`` shocks with a zero
    initial condition; ``sigma2_{k+1}`` is the conditional variance evaluated
    at that truncated state.  Returns an array of shape
    ``(len(r_grid), len(n_grid))``.
    """
    r_grid = [int(r) for r in r_grid]
    n_grid = [int(n) for n in n_grid]
    if min(r_grid) < 1:
        raise ValidationError("truncation depth r must be >= 1")
    n_max = max(n_grid)
    if any(n <= r for r in r_grid for n in n_grid):
        raise ValidationError("need n > r for every grid point")
    totals = [[[] for _ in n_grid] for _ in r_grid]
    var_next = model.noise.gamma.step_variances(n_max, start=1)
    for start in range(0, reps, batch_size):
        batch = simulate_batch(model, n_max, seed, range(start, min(reps, start + batch_size)))
        eps = batch.eps
        for ir, r in enumerate(r_grid):
            # k = r..n_max-1 uses eps_{k-r+1..k}, i.e. rows k-r..k-1
            m = n_max - r
            x = compose_f_r(model, np.zeros((m, eps.shape[1])), (eps[s:s + m] for s in range(r)))
            fx = model.f(x)
            if model.noise.kind == "iid-bounded":
                s2 = var_next[r:n_max, None]
            else:
                amp = model.noise.amplitude(x)
                s2 = var_next[r:n_max, None] * amp * amp
            if np.any(s2 <= 0):
                raise PreconditionError("optimal weights need sigma2 > 0 at every truncated state")
            sums = running_sums(fx * fx / s2, [n - r for n in n_grid])
            for jn, n in enumerate(n_grid):
                totals[ir][jn].extend((sums[jn] / n).tolist())
    out = np.empty((len(r_grid), len(n_grid)))
    for ir in range(len(r_grid)):
        for jn in range(len(n_grid)):
            out[ir, jn] = csum(totals[ir][jn]) / reps
    return out


def limit_variance_optimal(model: ModelSpec, r: int = 50, n: int = 100_000, reps: int = 200,
                           seed: int = 0) -> LimitVariance:
    """Reciprocal of the replicate-averaged truncated optimal-weight energy."""
    r_half, n_half = max(r // 2, 1), n // 2
    grid = truncated_energy_grid(model, sorted({r_half, r}), sorted({n_half, n}), reps, seed)
    r_idx = {v: i for i, v in enumerate(sorted({r_half, r}))}
    n_idx = {v: i for i, v in enumerate(sorted({n_half, n}))}
    if np.any(grid <= 0):
        raise DegenerateDenominatorError("truncated optimal energy vanishes (all f values zero)")
    inv = 1.0 / grid
    return LimitVariance(value=float(inv[r_idx[r], n_idx[n]]),
                         value_half_r=float(inv[r_idx[r_half], n_idx[n]]),
                         value_half_n=float(inv[r_idx[r], n_idx[n_half]]),
                         r=r, n=n, reps=reps)
