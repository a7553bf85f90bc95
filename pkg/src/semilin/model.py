"""Discrete semi-linear autoregression ``xi_k = a f(xi_{k-1}) + eps_k``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractionError, ValidationError
from .functions import FunctionSpec
from .noise import NoiseSpec, replicate_rng


@dataclass(frozen=True)
class UniformInit:
    """Random initial state ``xi_0 ~ U[low, high]``, drawn from the replicate stream."""

    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "low", float(self.low))
        object.__setattr__(self, "high", float(self.high))
        if not self.low <= self.high:
            raise ValidationError("uniform xi0 needs low <= high")

    def to_dict(self):
        return {"kind": "uniform", "low": self.low, "high": self.high}


def _xi0_from(value):
    if isinstance(value, dict):
        if value.get("kind", "uniform") != "uniform":
            raise ValidationError(f"unsupported xi0 kind {value.get('kind')!r}")
        return UniformInit(value.get("low", -1.0), value.get("high", 1.0))
    return float(value)


def draw_xi0(xi0, rng: np.random.Generator) -> float:
    if isinstance(xi0, UniformInit):
        return float(rng.uniform(xi0.low, xi0.high))
    return float(xi0)


@dataclass(frozen=True)
class ModelSpec:
    """True parameter, regression function and noise; enforces ``|a| C < 1``."""

    a: float
    f: FunctionSpec = FunctionSpec()
    noise: NoiseSpec = NoiseSpec()
    xi0: float | UniformInit = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        if not isinstance(self.xi0, UniformInit):
            object.__setattr__(self, "xi0", float(self.xi0))
        if abs(self.a) * self.f.lipschitz_C >= 1.0:
            raise ContractionError(
                f"contraction condition |a|*C < 1 violated: |{self.a}| * {self.f.lipschitz_C} "
                f"= {abs(self.a) * self.f.lipschitz_C}")

    @property
    def contraction(self) -> float:
        return abs(self.a) * self.f.lipschitz_C

    @property
    def satisfies_noise_contraction(self) -> bool:
        """Sufficient condition ``C + C2*C3 < 1`` for state-dependent noise.

        Always true for i.i.d. noise.  Reported, not enforced.
        """
        if self.noise.kind == "iid-bounded":
            return True
        return self.f.lipschitz_C + self.noise.C2 * self.noise.C3 < 1.0

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "f": self.f.to_dict(),
            "noise": self.noise.to_dict(),
            "xi0": self.xi0.to_dict() if isinstance(self.xi0, UniformInit) else self.xi0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(a=d["a"], f=FunctionSpec.from_dict(d.get("f", {})),
                   noise=NoiseSpec.from_dict(d.get("noise", {})),
                   xi0=_xi0_from(d.get("xi0", 0.0)))


@dataclass(frozen=True, eq=False)
class DiscretePath:
    """One trajectory ``xi_0..xi_n`` with shocks ``eps_1..eps_n``.

    ``sigma2[k]`` holds ``sigma2_{k+1}``, the conditional variance of
    ``eps_{k+1}`` given ``F_k``.  Paths ingested from data have ``eps=None``
    and ``a=None``; ``sigma2`` may be None when no variance is known.
    """

    xi: np.ndarray
    eps: np.ndarray | None
    sigma2: np.ndarray | None
    f: FunctionSpec
    a: float | None = None
    seed: int | None = None
    replicate: int = 0
    gamma: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.xi) - 1

    @property
    def has_noise(self) -> bool:
        return self.eps is not None


@dataclass(frozen=True, eq=False)
class PathBatch:
    """Several replicates stored time-major: ``xi`` has shape ``(n + 1, R)``."""

    xi: np.ndarray
    eps: np.ndarray
    sigma2: np.ndarray
    gamma: np.ndarray
    f: FunctionSpec
    a: float
    seed: int
    replicates: tuple

    @property
    def n(self) -> int:
        return self.xi.shape[0] - 1

    def path(self, i: int) -> DiscretePath:
        return DiscretePath(
            xi=np.ascontiguousarray(self.xi[:, i]), eps=np.ascontiguousarray(self.eps[:, i]),
            sigma2=np.ascontiguousarray(self.sigma2[:, i]), f=self.f, a=self.a,
            seed=self.seed, replicate=self.replicates[i],
            gamma=np.ascontiguousarray(self.gamma[:, i]))


def simulate_batch(model: ModelSpec, n: int, seed: int, replicates) -> PathBatch:
    """Simulate the listed replicates of ``model`` for ``n`` steps.

    Replicate ``j`` draws from its own substream ``(seed, j)``: first
    ``xi_0`` (if random), then ``n`` unit shocks.  The result for a replicate
    does not depend on which other replicates share the batch.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    replicates = tuple(int(j) for j in replicates)
    R = len(replicates)
    unit = np.empty((n, R))
    xi = np.empty((n + 1, R))
    for col, j in enumerate(replicates):
        rng = replicate_rng(seed, j)
        xi[0, col] = draw_xi0(model.xi0, rng)
        unit[:, col] = model.noise.gamma.sample_unit(rng, n)
    var = model.noise.gamma.step_variances(n)
    gamma = unit * np.sqrt(var)[:, None]
    eps = np.empty((n, R))
    sigma2 = np.empty((n, R))
    a, f, noise = model.a, model.f, model.noise
    hetero = noise.kind == "heteroscedastic"
    for k in range(1, n + 1):
        prev = xi[k - 1]
        if hetero:
            amp = noise.amplitude(prev)
            eps[k - 1] = gamma[k - 1] * amp
            sigma2[k - 1] = var[k - 1] * amp * amp
        else:
            eps[k - 1] = gamma[k - 1]
            sigma2[k - 1] = var[k - 1]
        xi[k] = a * f(prev) + eps[k - 1]
    return PathBatch(xi=xi, eps=eps, sigma2=sigma2, gamma=gamma, f=f, a=a,
                     seed=seed, replicates=replicates)


def simulate_discrete(model: ModelSpec, n: int, seed: int, replicate: int = 0) -> DiscretePath:
    """Simulate one path; identical ``(seed, replicate)`` gives an identical path."""
    return simulate_batch(model, n, seed, [replicate]).path(0)


def compose_f_r(model: ModelSpec, x0, shocks):
    """Iterate ``x <- a f(x) + shock`` over the shocks, starting from ``x0``.

    With ``x0 = xi_{k-r}`` and ``shocks = eps_{k-r+1..k}`` this reproduces
    ``xi_k``; with ``x0 = 0`` it gives the truncated state.  ``shocks`` may be
    an array of shape ``(r, ...)`` broadcasting against ``x0``.
    """
    x = x0 if np.ndim(x0) == 0 and np.ndim(shocks) <= 1 else np.asarray(x0, dtype=float)
    for s in shocks:
        x = model.a * model.f(x) + s
    return x
