"""Run configuration: a small ``key = value`` format with ``[sections]``.

Example::

    # lines starting with '#' or ';' are comments
    subcommand = energy-monitor

    [equation]
    c1 = 0.8660254037844386
    gamma = 0.0

    [solver]
    max_mode = 128
    dt = 1e-4

    [experiment]
    gammas = 0.125, 0.0625, 0.03125

Keys before the first section belong to ``[run]``.  Every error names the
offending line.  ``serialize(parse_config(text))`` is a fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Callable

from .dynamics import EquationParams, SolverConfig
from .fields import KINDS

SUBCOMMANDS = (
    "simulate", "conservation", "energy-monitor", "gamma-sweep",
    "bona-smith", "diff-energy", "cont-dep", "verify-lemmas",
)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _opt_float(text: str) -> float | None:
    return None if text.lower() in ("none", "") else float(text)


def _choice(options):
    def conv(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return conv


@dataclass(frozen=True)
class DataSpec:
    kind: str = "random-sobolev"
    seed: int = 0
    norm: float | None = 1.0
    decay: float | None = None
    modes: str = "1:1"
    rate: float = 0.5


@dataclass(frozen=True)
class ExperimentSpec:
    gammas: tuple[float, ...] = (1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128)
    alphas: tuple[float, ...] = (1.0, 2.0)
    bs_gammas: tuple[float, ...] = tuple(2.0**-j for j in range(3, 9))
    deltas: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)
    mollifier_gammas: tuple[float, ...] = (1 / 16, 1 / 8)
    psi_gamma: float = 1 / 8
    correction: bool = True
    force: bool = False
    drift_tol: float = 1e-6
    corpus_size: int = 100
    lab_max_mode: int = 32


@dataclass(frozen=True)
class RunConfig:
    subcommand: str = "simulate"
    output_dir: str | None = None
    workers: int = 1
    params: EquationParams = field(default_factory=EquationParams)
    solver: SolverConfig = field(default_factory=SolverConfig)
    s: float = 3.0
    s0: float = 2.6
    data: DataSpec = field(default_factory=DataSpec)
    experiment: ExperimentSpec = field(default_factory=ExperimentSpec)


# section -> key -> (target object, attribute, parser)
_SCHEMA: dict[str, dict[str, tuple[str, str, Callable[[str], Any]]]] = {
    "run": {
        "subcommand": ("run", "subcommand", _choice(SUBCOMMANDS)),
        "output_dir": ("run", "output_dir", lambda t: None if t.lower() == "none" else t),
        "workers": ("run", "workers", int),
    },
    "equation": {
        "c1": ("params", "c1", float),
        "c2": ("params", "c2", float),
        "gamma": ("params", "gamma", float),
        "time_direction": ("params", "time_direction", _choice(("forward", "backward"))),
        "cubic": ("params", "cubic", _bool),
    },
    "solver": {
        "max_mode": ("solver", "max_mode", int),
        "dt": ("solver", "dt", float),
        "horizon": ("solver", "horizon", float),
        "stepper": ("solver", "stepper", _choice(("IFRK4", "ETDRK4", "PICARD"))),
        "blowup_threshold": ("solver", "blowup_threshold", float),
        "stride": ("solver", "stride", int),
    },
    "energy": {
        "s": ("run", "s", float),
        "s0": ("run", "s0", float),
    },
    "data": {
        "kind": ("data", "kind", _choice(KINDS)),
        "seed": ("data", "seed", int),
        "norm": ("data", "norm", _opt_float),
        "decay": ("data", "decay", _opt_float),
        "modes": ("data", "modes", str),
        "rate": ("data", "rate", float),
    },
    "experiment": {
        "gammas": ("experiment", "gammas", _floats),
        "alphas": ("experiment", "alphas", _floats),
        "bs_gammas": ("experiment", "bs_gammas", _floats),
        "deltas": ("experiment", "deltas", _floats),
        "mollifier_gammas": ("experiment", "mollifier_gammas", _floats),
        "psi_gamma": ("experiment", "psi_gamma", float),
        "correction": ("experiment", "correction", _bool),
        "force": ("experiment", "force", _bool),
        "drift_tol": ("experiment", "drift_tol", float),
        "corpus_size": ("experiment", "corpus_size", int),
        "lab_max_mode": ("experiment", "lab_max_mode", int),
    },
}

KEYS = {f"{sec}.{key}" for sec, keys in _SCHEMA.items() for key in keys}


def _lookup(section: str, key: str, line: int | None):
    if section not in _SCHEMA:
        raise ConfigError(f"unknown section [{section}]", line)
    if key not in _SCHEMA[section]:
        raise ConfigError(f"unknown key {key!r} in [{section}]", line)
    return _SCHEMA[section][key]


def read_entries(text: str) -> dict[tuple[str, str], tuple[str, int]]:
    """Raw ``(section, key) -> (value, line)`` entries, checked for unknown keys."""
    entries: dict[tuple[str, str], tuple[str, int]] = {}
    section = "run"
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", n)
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", n)
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", n)
        key, value = (part.strip() for part in line.split("=", 1))
        _lookup(section, key, n)
        if (section, key) in entries:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", n)
        entries[(section, key)] = (value, n)
    return entries


def parse_config(text: str = "", overrides: dict[str, str] | None = None) -> RunConfig:
    """Parse and validate a configuration.

    ``overrides`` maps dotted keys (``"solver.dt"``) to raw strings and takes
    precedence over the file; errors in overrides are reported without a
    line number.
    """
    entries = read_entries(text)
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        _lookup(section, key, None)
        entries[(section, key)] = (str(value), None)

    groups: dict[str, dict[str, tuple[Any, int | None]]] = {
        "run": {}, "params": {}, "solver": {}, "data": {}, "experiment": {}
    }
    for (section, key), (value, n) in entries.items():
        target, attr, conv = _lookup(section, key, n)
        try:
            groups[target][attr] = (conv(value), n)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", n) from None

    def build(cls, items, base=None):
        kwargs = {k: v for k, (v, _) in items.items()}
        try:
            return cls(**kwargs) if base is None else replace(base, **kwargs)
        except (ValueError, TypeError) as exc:
            lines = sorted(n for _, n in items.values() if n)
            raise ConfigError(str(exc), lines[0] if len(lines) == 1 else None) from None

    def check(ok, msg, key):
        if not ok:
            n = groups["run"].get(key, (None, None))[1]
            raise ConfigError(msg, n)

    run = {k: v for k, (v, _) in groups["run"].items()}
    params = build(EquationParams, groups["params"])
    solver = build(SolverConfig, groups["solver"])
    data = build(DataSpec, groups["data"])
    exp = build(ExperimentSpec, groups["experiment"])
    cfg = RunConfig(params=params, solver=solver, data=data, experiment=exp, **run)
    check(cfg.s >= 2, f"s must be >= 2, got {cfg.s}", "s")
    check(cfg.s0 > 2.5, f"s0 must exceed 5/2, got {cfg.s0}", "s0")
    check(cfg.s >= cfg.s0, f"s ({cfg.s}) must be >= s0 ({cfg.s0})", "s")
    check(cfg.workers >= 1, "workers must be >= 1", "workers")
    for name in ("gammas", "bs_gammas", "mollifier_gammas"):
        vals = getattr(exp, name)
        n = groups["experiment"].get(name, (None, None))[1]
        if not all(0 < g < 1 for g in vals):
            raise ConfigError(f"{name} must lie in (0, 1)", n)
    if not 0 < exp.psi_gamma < 1:
        raise ConfigError("psi_gamma must lie in (0, 1)", groups["experiment"].get("psi_gamma", (None, None))[1])
    if exp.deltas and min(exp.deltas) < 0:
        raise ConfigError("deltas must be nonnegative", groups["experiment"].get("deltas", (None, None))[1])
    return cfg


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def serialize(cfg: RunConfig) -> str:
    """Full text form with every key written out."""
    objects = {
        "run": {"subcommand": cfg.subcommand, "output_dir": cfg.output_dir, "workers": cfg.workers,
                "s": cfg.s, "s0": cfg.s0},
        "params": {f.name: getattr(cfg.params, f.name) for f in fields(cfg.params)},
        "solver": {f.name: getattr(cfg.solver, f.name) for f in fields(cfg.solver)},
        "data": {f.name: getattr(cfg.data, f.name) for f in fields(cfg.data)},
        "experiment": {f.name: getattr(cfg.experiment, f.name) for f in fields(cfg.experiment)},
    }
    out = []
    for section, keys in _SCHEMA.items():
        if section != "run":
            out.append(f"\n[{section}]")
        for key, (target, attr, _) in keys.items():
            out.append(f"{key} = {_fmt(objects[target][attr])}")
    return "\n".join(out) + "\n"
