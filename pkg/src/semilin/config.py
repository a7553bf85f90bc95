"""YAML run configuration with a versioned schema.

Unknown keys and type mismatches are reported with their line numbers.  The
normalised form (all defaults filled in) is what gets persisted next to the
results and hashed into the manifest.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, replace

import yaml

from .continuous import ContinuousModelSpec
from .errors import ContractionError, ValidationError
from .estimators import WeightScheme
from .experiments import ExperimentConfig
from .model import ModelSpec

FORMAT_VERSION = 1
MODES = ("simulate", "estimate", "monte-carlo", "compare", "continuous", "diagnostics")


class ConfigError(ValidationError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class ExperimentBlock:
    n: int = 1000
    T: float | None = None
    dt: float = 0.01
    reps: int = 100
    schemes: tuple = (WeightScheme("LSE"), WeightScheme("Optimal"))
    time_grid: tuple = (1.0,)
    burn_in: int = 0
    predict: bool = False
    limit_r: int = 50
    limit_n: int = 100_000
    limit_reps: int = 200
    r_grid: tuple = (10, 25, 50)
    n_grid: tuple = (1000, 10_000)

    def to_dict(self):
        return {
            "n": self.n, "T": self.T, "dt": self.dt, "reps": self.reps,
            "schemes": [s.to_dict() for s in self.schemes],
            "time_grid": list(self.time_grid), "burn_in": self.burn_in,
            "predict": self.predict, "limit_r": self.limit_r, "limit_n": self.limit_n,
            "limit_reps": self.limit_reps, "r_grid": list(self.r_grid), "n_grid": list(self.n_grid),
        }


@dataclass(frozen=True)
class RunConfig:
    mode: str
    seed: int = 0
    output_dir: str = "results"
    model: ModelSpec | None = None
    continuous_model: ContinuousModelSpec | None = None
    experiment: ExperimentBlock = field(default_factory=ExperimentBlock)
    input: str | None = None
    format_version: int = FORMAT_VERSION

    def experiment_config(self) -> ExperimentConfig:
        e = self.experiment
        cont = self.mode == "continuous"
        return ExperimentConfig(
            model=self.continuous_model if cont else self.model, schemes=e.schemes,
            n=None if cont else e.n, T=e.T if cont else None, dt=e.dt if cont else None,
            reps=e.reps, time_grid=e.time_grid, master_seed=self.seed, burn_in=e.burn_in,
            predict=e.predict, limit_r=e.limit_r, limit_n=e.limit_n, limit_reps=e.limit_reps)

    def to_dict(self) -> dict:
        d = {"format_version": self.format_version, "mode": self.mode, "seed": self.seed,
             "output_dir": self.output_dir}
        if self.model is not None:
            d["model"] = self.model.to_dict()
        if self.continuous_model is not None:
            d["continuous_model"] = self.continuous_model.to_dict()
        d["experiment"] = self.experiment.to_dict()
        if self.input is not None:
            d["estimate"] = {"input": self.input}
        return d

    def with_overrides(self, mode=None, seed=None, output_dir=None, reps=None) -> "RunConfig":
        cfg = self
        if mode is not None:
            cfg = replace(cfg, mode=mode)
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        if output_dir is not None:
            cfg = replace(cfg, output_dir=str(output_dir))
        if reps is not None:
            cfg = replace(cfg, experiment=replace(cfg.experiment, reps=int(reps)))
        return validate_config(cfg)


def serialize_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=False)


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()


# -- schema -----------------------------------------------------------------

NUM, INT, STR, BOOL = "number", "integer", "string", "boolean"

FUNC = {"kind": STR, "scale": NUM, "xs": [NUM], "ys": [NUM]}
GAMMA = {"kind": STR, "variance": NUM, "truncation": NUM, "schedule": [NUM]}
SCHEMA = {
    "format_version": INT, "mode": STR, "seed": INT, "output_dir": STR,
    "model": {"a": NUM, "f": FUNC, "xi0": (NUM, {"kind": STR, "low": NUM, "high": NUM}),
              "noise": {"kind": STR, "gamma": GAMMA, "b": FUNC, "b0": NUM}},
    "continuous_model": {"a": NUM, "f": FUNC, "xi0": NUM, "shocks": STR,
                         "mdot": (NUM, {"base": NUM, "amplitude": NUM, "frequency": NUM})},
    "experiment": {"n": INT, "T": NUM, "dt": NUM, "reps": INT,
                   "schemes": [(STR, {"kind": STR, "h": FUNC, "name": STR})],
                   "time_grid": [NUM], "burn_in": INT, "predict": BOOL, "limit_r": INT,
                   "limit_n": INT, "limit_reps": INT, "r_grid": [INT], "n_grid": [INT]},
    "estimate": {"input": STR},
}
REQUIRED = {("model",): ["a"], ("continuous_model",): ["a"]}


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot (``1e-09``)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"))


def _plain(node, path, lines):
    """Convert a composed YAML node to Python values, recording line numbers."""
    lines.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        out = {}
        for key_node, value_node in node.value:
            key = key_node.value
            lines[path + (key,)] = key_node.start_mark.line + 1
            out[key] = _plain(value_node, path + (key,), lines)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_plain(v, path + (i,), lines) for i, v in enumerate(node.value)]
    return _Loader("").construct_object(node)


def _type_ok(value, kind) -> bool:
    if kind == NUM:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == INT:
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == STR:
        return isinstance(value, str)
    if kind == BOOL:
        return isinstance(value, bool)
    return False


class _Checker:
    def __init__(self, lines):
        self.lines = lines
        self.errors = []

    def where(self, path):
        p = tuple(path)
        while p and p not in self.lines:
            p = p[:-1]
        line = self.lines.get(p, 1)
        name = ".".join(str(k) for k in path) or "<root>"
        return f"line {line}: {name}"

    def error(self, path, msg):
        self.errors.append(f"{self.where(path)}: {msg}")

    def check(self, value, schema, path):
        if value is None and path and path[-1] in ("T", "schedule"):
            return
        if isinstance(schema, tuple):
            for alt in schema:
                if isinstance(alt, dict) and isinstance(value, dict):
                    return self.check(value, alt, path)
                if isinstance(alt, str) and _type_ok(value, alt):
                    return
            self.error(path, f"type mismatch, got {type(value).__name__}")
        elif isinstance(schema, dict):
            if not isinstance(value, dict):
                self.error(path, f"expected a mapping, got {type(value).__name__}")
                return
            for key, sub in value.items():
                if key not in schema:
                    self.error(path + (key,), f"unknown key {key!r}")
                else:
                    self.check(sub, schema[key], path + (key,))
            for key in REQUIRED.get(tuple(path), ()):
                if key not in value:
                    self.error(path, f"missing required key {key!r}")
        elif isinstance(schema, list):
            if not isinstance(value, list):
                self.error(path, f"expected a list, got {type(value).__name__}")
                return
            for i, item in enumerate(value):
                self.check(item, schema[0], path + (i,))
        elif not _type_ok(value, schema):
            self.error(path, f"expected {schema}, got {type(value).__name__} {value!r}")


def _build(data: dict, chk: _Checker) -> RunConfig | None:
    def guarded(path, fn):
        try:
            return fn()
        except ContractionError as exc:
            chk.error(path + ("a",), str(exc))
        except ValidationError as exc:
            chk.error(path, str(exc))
        except (KeyError, TypeError) as exc:
            chk.error(path, f"invalid value ({exc})")
        return None

    model = cmodel = None
    if "model" in data:
        model = guarded(("model",), lambda: ModelSpec.from_dict(data["model"]))
    if "continuous_model" in data:
        cmodel = guarded(("continuous_model",),
                         lambda: ContinuousModelSpec.from_dict(data["continuous_model"]))
    exp_raw = dict(data.get("experiment", {}))
    schemes = []
    for i, s in enumerate(exp_raw.pop("schemes", ["LSE", "Optimal"])):
        scheme = guarded(("experiment", "schemes", i), lambda s=s: WeightScheme.from_dict(s))
        if scheme is not None:
            schemes.append(scheme)
    for key in ("time_grid", "r_grid", "n_grid"):
        if key in exp_raw:
            exp_raw[key] = tuple(exp_raw[key])
    for key in ("T", "dt"):
        if exp_raw.get(key) is not None:
            exp_raw[key] = float(exp_raw[key])
    exp_raw["time_grid"] = tuple(float(t) for t in exp_raw.get("time_grid", (1.0,)))
    experiment = ExperimentBlock(schemes=tuple(schemes), **exp_raw)
    if chk.errors:
        return None
    cfg = RunConfig(mode=data.get("mode", "simulate"), seed=data.get("seed", 0),
                    output_dir=data.get("output_dir", "results"), model=model,
                    continuous_model=cmodel, experiment=experiment,
                    input=data.get("estimate", {}).get("input"),
                    format_version=data.get("format_version", FORMAT_VERSION))
    try:
        return validate_config(cfg)
    except ConfigError as exc:
        for e in exc.errors:
            path, _, msg = e.partition(": ")
            chk.error(tuple(path.split(".")) if path else (), msg)
    return None


def validate_config(cfg: RunConfig) -> RunConfig:
    """Cross-field checks; raises :class:`ConfigError`."""
    errors = []
    if cfg.format_version != FORMAT_VERSION:
        errors.append(f"format_version: unsupported version {cfg.format_version}, expected {FORMAT_VERSION}")
    if cfg.mode not in MODES:
        errors.append(f"mode: unknown mode {cfg.mode!r}; expected one of {MODES}")
    if cfg.seed < 0:
        errors.append("seed: must be non-negative")
    e = cfg.experiment
    if cfg.mode == "continuous":
        if cfg.continuous_model is None:
            errors.append("continuous_model: required for mode 'continuous'")
        if e.T is None:
            errors.append("experiment.T: required for mode 'continuous'")
    elif cfg.mode in MODES and cfg.model is None:
        errors.append(f"model: required for mode {cfg.mode!r}")
    if cfg.mode == "estimate" and cfg.input is None:
        errors.append("estimate.input: required for mode 'estimate'")
    if cfg.mode == "compare" and len(e.schemes) < 2:
        errors.append("experiment.schemes: compare needs at least two schemes")
    if not errors and cfg.mode in ("monte-carlo", "compare", "continuous", "diagnostics"):
        try:
            cfg.experiment_config()
        except ValidationError as exc:
            errors.append(f"experiment: {exc}")
    if errors:
        raise ConfigError(errors)
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML config; raises :class:`ConfigError` listing every problem."""
    try:
        node = yaml.compose(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 1
        raise ConfigError([f"line {line}: malformed YAML ({getattr(exc, 'problem', exc)})"])
    if node is None:
        raise ConfigError(["line 1: empty configuration"])
    lines = {}
    data = _plain(node, (), lines)
    chk = _Checker(lines)
    chk.check(data, SCHEMA, ())
    cfg = None if chk.errors else _build(data, chk)
    if chk.errors:
        raise ConfigError(chk.errors)
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
