"""Martingale-difference noise ``eps_k = gamma_k * b_k(xi_{k-1})``.

``gamma_k`` are independent, zero mean and bounded; ``b_k`` is an amplitude
function of the previous state, so ``E[eps_k | F_{k-1}] = 0`` and the
conditional variance ``sigma2_k = var_k * b_k(xi_{k-1})**2`` is predictable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ValidationError
from .functions import FunctionSpec

GAMMA_KINDS = ("uniform", "two-point", "truncated-normal", "normal")
NOISE_KINDS = ("iid-bounded", "heteroscedastic")


def replicate_rng(seed: int, replicate: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator for substream ``(seed, replicate)``."""
    if seed < 0 or replicate < 0:
        raise ValidationError("seed and replicate index must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replicate)])))


@dataclass(frozen=True)
class GammaDist:
    """Zero-mean shock distribution with per-step variances.

    Shocks are drawn with unit variance and multiplied by ``sqrt(var_k)``
    where ``var_k = variance`` or, with a schedule, ``schedule[(k-1) % len]``.
    ``truncation`` is the cut-off (in standard deviations of the parent
    normal) for ``truncated-normal``.
    """

    kind: str = "uniform"
    variance: float = 1.0
    truncation: float = 3.0
    schedule: tuple | None = None

    def __post_init__(self):
        if self.kind not in GAMMA_KINDS:
            raise ValidationError(f"unknown gamma kind {self.kind!r}; expected one of {GAMMA_KINDS}")
        object.__setattr__(self, "variance", float(self.variance))
        object.__setattr__(self, "truncation", float(self.truncation))
        if self.variance < 0 or not math.isfinite(self.variance):
            raise ValidationError("gamma variance must be finite and non-negative")
        if self.truncation <= 0:
            raise ValidationError("truncation must be positive")
        if self.schedule is not None:
            sched = tuple(float(v) for v in self.schedule)
            if not sched or any(v < 0 or not math.isfinite(v) for v in sched):
                raise ValidationError("variance schedule must be a non-empty list of non-negative numbers")
            object.__setattr__(self, "schedule", sched)

    @property
    def bounded(self) -> bool:
        return self.kind != "normal"

    @property
    def unit_bound(self) -> float:
        """Bound on |gamma| for a unit-variance draw."""
        if self.kind == "uniform":
            return math.sqrt(3.0)
        if self.kind == "two-point":
            return 1.0
        if self.kind == "truncated-normal":
            k = self.truncation
            return k / math.sqrt(stats.truncnorm.var(-k, k))
        return math.inf

    @property
    def bound(self) -> float:
        """The constant C2 with |gamma_k| <= C2 surely."""
        return math.sqrt(self.max_variance) * self.unit_bound if self.max_variance > 0 else 0.0

    @property
    def max_variance(self) -> float:
        return max(self.schedule) if self.schedule else self.variance

    def step_variances(self, n: int, start: int = 1) -> np.ndarray:
        """``var_k`` for ``k = start, ..., start + n - 1``."""
        if self.schedule is None:
            return np.full(n, self.variance)
        idx = (np.arange(start, start + n) - 1) % len(self.schedule)
        return np.asarray(self.schedule)[idx]

    def sample_unit(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Unit-variance, exactly centred draws."""
        if self.kind == "uniform":
            return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size)
        if self.kind == "two-point":
            return 2.0 * rng.integers(0, 2, size).astype(float) - 1.0
        if self.kind == "truncated-normal":
            k = self.truncation
            # symmetric truncation keeps the mean at zero
            z = stats.truncnorm.rvs(-k, k, size=size, random_state=rng)
            return z / math.sqrt(stats.truncnorm.var(-k, k))
        return rng.standard_normal(size)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "variance": self.variance}
        if self.kind == "truncated-normal":
            d["truncation"] = self.truncation
        if self.schedule is not None:
            d["schedule"] = list(self.schedule)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GammaDist":
        sched = d.get("schedule")
        return cls(kind=d.get("kind", "uniform"), variance=d.get("variance", 1.0),
                   truncation=d.get("truncation", 3.0),
                   schedule=tuple(sched) if sched is not None else None)


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model; ``heteroscedastic`` uses ``b_k(x) = b0 + b(x)``."""

    kind: str = "iid-bounded"
    gamma: GammaDist = GammaDist()
    b: FunctionSpec | None = None
    b0: float = 1.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValidationError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if not self.gamma.bounded:
            raise ValidationError("discrete-time shocks must be bounded (|gamma_k| <= C2)")
        object.__setattr__(self, "b0", float(self.b0))
        if self.b0 < 0:
            raise ValidationError("amplitude offset b0 must be non-negative")
        if self.kind == "heteroscedastic" and self.b is None:
            raise ValidationError("heteroscedastic noise needs an amplitude function b")

    @property
    def C2(self) -> float:
        return self.gamma.bound

    @property
    def C3(self) -> float:
        return self.b.lipschitz_C if self.kind == "heteroscedastic" else 0.0

    def amplitude(self, x):
        """``b_k(x)``; identically 1 for i.i.d. noise."""
        if self.kind == "iid-bounded":
            return np.ones_like(np.asarray(x, dtype=float))
        return self.b0 + self.b(x)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "gamma": self.gamma.to_dict()}
        if self.kind == "heteroscedastic":
            d["b"] = self.b.to_dict()
            d["b0"] = self.b0
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        b = d.get("b")
        return cls(kind=d.get("kind", "iid-bounded"),
                   gamma=GammaDist.from_dict(d.get("gamma", {})),
                   b=FunctionSpec.from_dict(b) if b is not None else None,
                   b0=d.get("b0", 1.0))


def conditional_variance(noise: NoiseSpec, k: int, xi_prev):
    """``sigma2_k = E[eps_k**2 | F_{k-1}] = var_k * b_k(xi_{k-1})**2``.

    A zero result is possible when ``b0 = 0`` and ``b(xi_prev) = 0``; callers
    that divide by it (the optimal weights) must check.
    """
    if k < 1:
        raise ValidationError("conditional variance is defined for k >= 1")
    var_k = float(noise.gamma.step_variances(1, start=k)[0])
    if noise.kind == "iid-bounded":
        return var_k if np.ndim(xi_prev) == 0 else np.full(np.shape(xi_prev), var_k)
    amp = noise.amplitude(xi_prev)
    out = var_k * amp * amp
    return float(out) if np.ndim(out) == 0 else out
