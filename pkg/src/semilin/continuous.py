"""Continuous-time model ``d xi = -a f(xi) dt + d eta`` on an Euler grid.

``eta`` is realised as ``int sqrt(mdot(t)) dW``, so its quadratic
characteristic has density ``mdot``.  All stochastic integrals are
left-endpoint sums, which keeps ``int h d xi`` a discrete martingale
transform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, ValidationError
from .estimators import EPS, EstimateResult, WeightScheme, _check_denominator
from .functions import FunctionSpec
from .noise import GammaDist, replicate_rng
from .summation import csum, running_sums

MAX_STEPS = 10**8


@dataclass(frozen=True)
class Intensity:
    """``mdot(t) = base + amplitude * sin(frequency * t)``."""

    base: float = 1.0
    amplitude: float = 0.0
    frequency: float = 1.0

    def __post_init__(self):
        for name in ("base", "amplitude", "frequency"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def lower_bound(self) -> float:
        return self.base - abs(self.amplitude)

    @property
    def is_zero(self) -> bool:
        return self.base == 0.0 and self.amplitude == 0.0

    def __call__(self, t):
        if self.amplitude == 0.0:
            return np.full(np.shape(t), self.base) if np.ndim(t) else self.base
        return self.base + self.amplitude * np.sin(self.frequency * t)

    def to_dict(self):
        return {"base": self.base, "amplitude": self.amplitude, "frequency": self.frequency}

    @classmethod
    def from_dict(cls, d) -> "Intensity":
        if isinstance(d, (int, float)):
            return cls(base=d)
        return cls(**d)


@dataclass(frozen=True)
class ContinuousModelSpec:
    """Drift parameter, regression function and noise intensity.

    ``mdot`` must be bounded below by a positive constant; the identically
    zero intensity is accepted for noiseless diagnostics only.
    """

    a: float
    f: FunctionSpec = FunctionSpec()
    mdot: Intensity = Intensity()
    xi0: float = 0.0
    shocks: GammaDist = GammaDist(kind="normal")

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "xi0", float(self.xi0))
        if not self.mdot.is_zero and self.mdot.lower_bound <= 0:
            raise ValidationError(
                f"mdot must be bounded below by q > 0; base - |amplitude| = {self.mdot.lower_bound}")
        if self.shocks.variance != 1.0 or self.shocks.schedule is not None:
            raise ValidationError("continuous-time shocks must have unit variance; scale with mdot")

    def to_dict(self):
        return {"a": self.a, "f": self.f.to_dict(), "mdot": self.mdot.to_dict(),
                "xi0": self.xi0, "shocks": self.shocks.kind}

    @classmethod
    def from_dict(cls, d) -> "ContinuousModelSpec":
        shocks = d.get("shocks", "normal")
        shocks = GammaDist(kind=shocks) if isinstance(shocks, str) else GammaDist.from_dict(shocks)
        return cls(a=d["a"], f=FunctionSpec.from_dict(d.get("f", {})),
                   mdot=Intensity.from_dict(d.get("mdot", {})), xi0=d.get("xi0", 0.0),
                   shocks=shocks)


@dataclass(frozen=True, eq=False)
class ContinuousPath:
    """Euler path on ``t_j = j dt``; ``dxi[j] = xi[j+1] - xi[j]`` exactly."""

    dt: float
    T: float
    xi: np.ndarray
    dxi: np.ndarray
    mdot_vals: np.ndarray
    f: FunctionSpec
    a: float
    mdot: Intensity = field(default=Intensity(), repr=False)
    seed: int | None = None
    replicate: int = 0

    @property
    def steps(self) -> int:
        return len(self.dxi)

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.steps) * self.dt


def _grid(T: float, dt: float) -> int:
    if not (dt > 0 and T > 0 and dt <= T):
        raise ValidationError("need 0 < dt <= T")
    steps = int(round(T / dt))
    if steps > MAX_STEPS:
        raise ValidationError(f"T/dt = {steps} exceeds {MAX_STEPS}")
    if abs(steps * dt - T) > 1e-9 * T:
        raise ValidationError(f"T = {T} is not an integer multiple of dt = {dt}")
    return steps


def _euler(model: ContinuousModelSpec, dt: float, xi0: np.ndarray, noise_incr: np.ndarray):
    """Time-major Euler loop; ``noise_incr[j]`` is the eta increment on step j."""
    steps = noise_incr.shape[0]
    xi = np.empty((steps + 1,) + xi0.shape)
    dxi = np.empty_like(noise_incr)
    xi[0] = xi0
    a, f = model.a, model.f
    for j in range(steps):
        dxi[j] = -a * f(xi[j]) * dt + noise_incr[j]
        xi[j + 1] = xi[j] + dxi[j]
    return xi, dxi


def simulate_continuous(model: ContinuousModelSpec, T: float, dt: float, seed: int,
                        replicate: int = 0, dW=None) -> ContinuousPath:
    """Euler-Maruyama path of length ``T``.

    By default the driving shocks come from substream ``(seed, replicate)``.
    Passing ``dW`` (Brownian increments, one per step) instead lets several
    step sizes share a refined noise path.
    """
    steps = _grid(T, dt)
    t = np.arange(steps) * dt
    mdot_vals = np.asarray(model.mdot(t), dtype=float)
    if dW is None:
        gam = model.shocks.sample_unit(replicate_rng(seed, replicate), steps)
        incr = np.sqrt(mdot_vals * dt) * gam
    else:
        dW = np.asarray(dW, dtype=float)
        if dW.shape != (steps,):
            raise ValidationError(f"dW must have {steps} entries")
        incr = np.sqrt(mdot_vals) * dW
    xi, dxi = _euler(model, dt, np.asarray(model.xi0, dtype=float), incr)
    return ContinuousPath(dt=dt, T=steps * dt, xi=xi, dxi=dxi, mdot_vals=mdot_vals, f=model.f,
                          a=model.a, mdot=model.mdot, seed=seed, replicate=replicate)


@dataclass(frozen=True, eq=False)
class ContinuousBatch:
    xi: np.ndarray
    dxi: np.ndarray
    mdot_vals: np.ndarray
    dt: float
    f: FunctionSpec
    a: float
    mdot: Intensity
    unit: np.ndarray = field(repr=False)

    @property
    def steps(self) -> int:
        return self.dxi.shape[0]


def simulate_continuous_batch(model: ContinuousModelSpec, T: float, dt: float, seed: int,
                              replicates) -> ContinuousBatch:
    steps = _grid(T, dt)
    replicates = list(replicates)
    t = np.arange(steps) * dt
    mdot_vals = np.asarray(model.mdot(t), dtype=float)
    unit = np.empty((steps, len(replicates)))
    for col, j in enumerate(replicates):
        unit[:, col] = model.shocks.sample_unit(replicate_rng(seed, j), steps)
    incr = np.sqrt(mdot_vals * dt)[:, None] * unit
    xi, dxi = _euler(model, dt, np.full(len(replicates), model.xi0), incr)
    return ContinuousBatch(xi=xi, dxi=dxi, mdot_vals=mdot_vals, dt=dt, f=model.f, a=model.a,
                           mdot=model.mdot, unit=unit)


def weight_function(scheme: WeightScheme, f: FunctionSpec, mdot: Intensity):
    """Weight ``h(t, x)`` for a scheme: ``f``, ``f / mdot`` or ``custom_h``."""
    if scheme.kind == "LSE":
        return lambda t, x: f(x)
    if scheme.kind == "Custom":
        return lambda t, x: scheme.custom_h(x)
    if mdot.is_zero:
        raise PreconditionError("optimal continuous weights need mdot >= q > 0")

    def h_opt(t, x):
        m = mdot(t)
        if np.ndim(x) > np.ndim(m):
            m = np.reshape(m, np.shape(m) + (1,) * (np.ndim(x) - np.ndim(m)))
        return f(x) / m
    return h_opt


def _h_values(path, h):
    if isinstance(h, WeightScheme):
        h = weight_function(h, path.f, path.mdot)
    return np.asarray(h(path.t, path.xi[:-1]), dtype=float)


def estimate_continuous(path: ContinuousPath, h) -> EstimateResult:
    """``a_hat = -int h d xi / int f h dt`` with left-endpoint sums.

    ``h`` is a callable ``h(t, x)`` or a :class:`WeightScheme`.
    """
    hv = _h_values(path, h)
    fh = path.f(path.xi[:-1]) * hv
    den_sum = csum(fh)
    _check_denominator(den_sum, fh, path.steps)
    den = den_sum * path.dt
    stoch = csum(hv * path.dxi)
    Q = den / path.T
    G = csum(hv * hv * path.mdot_vals) * path.dt / path.T
    return EstimateResult(a_hat=-stoch / den, Q_n=Q, G_n=G, V_n=G / (Q * Q), n=path.steps,
                          denominator_magnitude=abs(den))


def functional_V_T(path: ContinuousPath, h) -> float:
    """``(1/T) int h**2 dm / ((1/T) int f h dt)**2`` with ``dm = mdot dt``."""
    return estimate_continuous(path, h).V_n


def check_stationarity_continuous(path: ContinuousPath, g, h_opt=None) -> float:
    """Relative residual of ``int h g dm * int f h dt = int f g dt * int h**2 dm``.

    ``h_opt`` defaults to ``f / mdot``.
    """
    if h_opt is None:
        h_opt = WeightScheme("Optimal")
    hv = _h_values(path, h_opt)
    gv = _h_values(path, g)
    fx = path.f(path.xi[:-1])
    dm = path.mdot_vals * path.dt
    lhs = csum(hv * gv * dm) * (csum(fx * hv) * path.dt)
    rhs = (csum(fx * gv) * path.dt) * csum(hv * hv * dm)
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + EPS)


def batch_estimates_continuous(scheme: WeightScheme, batch: ContinuousBatch, stops):
    """Vectorised ``(a_hat, Q, G, degenerate)`` at step counts ``stops``."""
    t = np.arange(batch.steps) * batch.dt
    x = batch.xi[:-1]
    h = weight_function(scheme, batch.f, batch.mdot)
    hv = np.asarray(h(t, x), dtype=float)
    fh = batch.f(x) * hv
    R = hv.shape[1]
    stacked = np.concatenate([fh, hv * batch.dxi, hv * hv * batch.mdot_vals[:, None]], axis=1)
    sums = running_sums(stacked, stops)
    den, stoch, g = sums[:, :R], sums[:, R:2 * R], sums[:, 2 * R:]
    absmax = np.maximum.accumulate(np.abs(fh), axis=0)
    m = np.asarray(stops, dtype=int)
    tol = 1e-12 * m[:, None] * absmax[np.maximum(m - 1, 0)]
    degenerate = (den == 0.0) | (np.abs(den) < tol)
    horizon = m[:, None] * batch.dt
    with np.errstate(divide="ignore", invalid="ignore"):
        a_hat = -stoch / (den * batch.dt)
        Q = den * batch.dt / horizon
        G = g * batch.dt / horizon
    return a_hat, Q, G, degenerate


def ou_stationary_variance(a: float, mdot: float = 1.0) -> float:
    """Stationary variance ``mdot / (2a)`` of the linear (OU) case."""
    return mdot / (2.0 * a)


def strong_error(model: ContinuousModelSpec, T: float, dt: float, seed: int,
                 refine: int = 2, reference_refine: int = 64) -> tuple[float, float]:
    """Terminal strong errors of the ``dt`` and ``dt/refine`` paths against a
    reference path at ``dt/reference_refine`` driven by the same Brownian path.
    """
    fine_dt = dt / reference_refine
    steps = _grid(T, fine_dt)
    dW = replicate_rng(seed, 0).standard_normal(steps) * math.sqrt(fine_dt)
    ref = simulate_continuous(model, T, fine_dt, seed, dW=dW).xi[-1]

    def coarse(step):
        k = int(round(step / fine_dt))
        return simulate_continuous(model, T, step, seed, dW=dW.reshape(-1, k).sum(axis=1)).xi[-1]

    return abs(coarse(dt) - ref), abs(coarse(dt / refine) - ref)
