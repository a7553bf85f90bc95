"""Registry of scalar Lipschitz functions vanishing at the origin.

Every :class:`FunctionSpec` is used in three roles: the regression function
``f``, the noise amplitude ``b`` and custom weight functions ``h``.  All kinds
evaluate elementwise on numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError

KINDS = ("linear", "scaled-sine", "scaled-tanh", "saturating-ramp", "custom-table")


@dataclass(frozen=True)
class FunctionSpec:
    """A scalar function in Lip(C) with ``f(0) = 0``.

    ``custom-table`` is the piecewise-linear interpolant through ``(xs, ys)``;
    its table must bracket 0 and pass through the origin.
    """

    kind: str = "linear"
    scale: float = 1.0
    xs: tuple = field(default=(), repr=False)
    ys: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown function kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "scale", float(self.scale))
        if not np.isfinite(self.scale):
            raise ValidationError("function scale must be finite")
        if self.kind == "custom-table":
            xs = tuple(float(v) for v in self.xs)
            ys = tuple(float(v) for v in self.ys)
            if len(xs) < 2 or len(xs) != len(ys):
                raise ValidationError("custom-table needs at least two knots and len(xs) == len(ys)")
            if any(x1 <= x0 for x0, x1 in zip(xs, xs[1:])):
                raise ValidationError("custom-table knots must be strictly increasing")
            if not (xs[0] <= 0.0 <= xs[-1]):
                raise ValidationError("custom-table domain must contain 0")
            object.__setattr__(self, "xs", xs)
            object.__setattr__(self, "ys", ys)
            if abs(float(np.interp(0.0, xs, ys))) > np.finfo(float).eps:
                raise ValidationError("custom-table must vanish at the origin")
        elif self.xs or self.ys:
            raise ValidationError(f"table knots are only valid for custom-table, not {self.kind!r}")

    @property
    def lipschitz_C(self) -> float:
        if self.kind == "custom-table":
            slopes = np.diff(self.ys) / np.diff(self.xs)
            return float(np.max(np.abs(slopes)))
        # sin, tanh and clip(., -1, 1) all have unit Lipschitz constant
        return abs(self.scale)

    @property
    def domain(self) -> tuple[float, float]:
        if self.kind == "custom-table":
            return self.xs[0], self.xs[-1]
        return -np.inf, np.inf

    def __call__(self, x):
        return eval_f(self, x)

    def to_dict(self) -> dict:
        if self.kind == "custom-table":
            return {"kind": self.kind, "xs": list(self.xs), "ys": list(self.ys)}
        return {"kind": self.kind, "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "FunctionSpec":
        return cls(kind=d.get("kind", "linear"), scale=d.get("scale", 1.0),
                   xs=tuple(d.get("xs", ())), ys=tuple(d.get("ys", ())))


def eval_f(spec: FunctionSpec, x):
    """Evaluate ``spec`` at ``x`` (scalar or array)."""
    kind = spec.kind
    if kind == "linear":
        return spec.scale * x
    if kind == "scaled-sine":
        return spec.scale * np.sin(x)
    if kind == "scaled-tanh":
        return spec.scale * np.tanh(x)
    if kind == "saturating-ramp":
        return spec.scale * np.clip(x, -1.0, 1.0)
    # custom-table
    arr = np.asarray(x, dtype=float)
    lo, hi = spec.xs[0], spec.xs[-1]
    outside = (arr < lo) | (arr > hi) | np.isnan(arr)
    if np.any(outside):
        bad = arr[outside].flat[0] if arr.ndim else float(arr)
        raise DomainError(f"x = {bad!r} outside custom-table domain [{lo}, {hi}]")
    out = np.interp(arr, spec.xs, spec.ys)
    return float(out) if np.ndim(x) == 0 else out


def certify_lipschitz(spec: FunctionSpec, lo: float = -50.0, hi: float = 50.0,
                      pairs: int = 2000, rtol: float = 1e-8, seed: int = 0) -> bool:
    """Grid check of ``|f(x) - f(y)| <= C |x - y|`` and ``f(0) = 0``.

    Uses an even grid plus random pairs over ``[lo, hi]`` clipped to the
    function's domain.  Returns False instead of raising.
    """
    dlo, dhi = spec.domain
    lo, hi = max(lo, dlo), min(hi, dhi)
    if abs(eval_f(spec, 0.0)) > np.finfo(float).eps:
        return False
    C = spec.lipschitz_C
    grid = np.linspace(lo, hi, pairs + 1)
    rng = np.random.default_rng(seed)
    x = np.concatenate([grid[:-1], rng.uniform(lo, hi, pairs)])
    y = np.concatenate([grid[1:], rng.uniform(lo, hi, pairs)])
    lhs = np.abs(eval_f(spec, x) - eval_f(spec, y))
    rhs = C * np.abs(x - y)
    return bool(np.all(lhs <= rhs * (1 + rtol) + 4 * np.finfo(float).eps * np.abs(eval_f(spec, x))))
