"""Experiment configuration: YAML files with CLI overrides.

A config is a nested mapping; see README for the full schema.  Validation
reports the offending field by its dotted path.  Committed config files plus
fixed seeds make every experiment reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
import yaml

__all__ = ["ExperimentConfig", "ConfigError", "load_config", "config_from_dict"]

_MAP_DIMS = {"tent": 1, "henon": 2, "lozi": 2}
_MAP_DEFAULTS = {
    "tent": ({"mu": 3.0}, [0.0], [1.0], [1001]),
    "henon": ({"a": 6.0, "b": 0.4}, [-4.0, -4.0], [4.0, 4.0], [500, 500]),
    "lozi": ({"a": 2.0, "b": 0.5}, [-4.0, -4.0], [4.0, 4.0], [500, 500]),
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the field."""


@dataclass(frozen=True)
class ExperimentConfig:
    map_name: str = "tent"
    map_params: dict = field(default_factory=dict)
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    points: list = field(default_factory=list)
    xi0: float = 0.05
    norm: str = "euclidean"
    spacing: float | None = None        # None: per-axis grid spacing
    max_sweeps: int = 1000
    workers: int = 1
    u0: float | None = None             # None: computed min(U)
    sculpt_check: bool = False
    orbit_steps: int = 0
    seed: int = 1
    start: list | None = None           # None: lowest-index safe point
    ensemble_runs: int = 0
    ensemble_max_steps: int = 1000
    ensemble_seed0: int = 0
    sweep_xi0: list = field(default_factory=list)
    out_dir: str = "out"
    csv: bool = True
    pgm: bool = True

    def with_xi0(self, xi0: float) -> "ExperimentConfig":
        return replace(self, xi0=float(xi0))


def _require(cond: bool, path: str, msg: str):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _num(value: Any, path: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             path, f"expected a number, got {value!r}")
    return float(value)


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build and validate a config from a nested mapping."""
    _require(isinstance(raw, dict), "config", "expected a mapping at top level")
    known = {"map", "region", "disturbance", "solver", "safe_set", "orbit",
             "ensemble", "sweep", "output"}
    for key in raw:
        _require(key in known, key, "unknown section")

    m = raw.get("map", {}) or {}
    name = m.get("name", "tent")
    _require(name in _MAP_DIMS, "map.name",
             f"unknown map; choose from {sorted(_MAP_DIMS)}")
    defaults = _MAP_DEFAULTS[name]
    params = dict(defaults[0])
    for k, v in (m.get("params", {}) or {}).items():
        _require(k in params, f"map.params.{k}",
                 f"unknown parameter for {name}; expected {sorted(params)}")
        params[k] = _num(v, f"map.params.{k}")

    r = raw.get("region", {}) or {}
    dim = _MAP_DIMS[name]
    lower = [_num(v, "region.lower") for v in r.get("lower", defaults[1])]
    upper = [_num(v, "region.upper") for v in r.get("upper", defaults[2])]
    points = r.get("points", defaults[3])
    if isinstance(points, int):
        points = [points] * dim
    _require(len(lower) == dim and len(upper) == dim and len(points) == dim,
             "region", f"{name} needs {dim} entries in lower/upper/points")
    for p in points:
        _require(isinstance(p, int) and p >= 2, "region.points",
                 "resolution must be an integer >= 2 per axis")
    for lo, hi in zip(lower, upper):
        _require(lo < hi, "region", "lower must be below upper on every axis")

    d = raw.get("disturbance", {}) or {}
    xi0 = _num(d.get("xi0", 0.05), "disturbance.xi0")
    _require(xi0 >= 0, "disturbance.xi0", "must be nonnegative")
    norm = d.get("norm", "euclidean")
    _require(norm in ("euclidean", "chebyshev"), "disturbance.norm",
             "must be euclidean or chebyshev")
    spacing = d.get("spacing")
    if spacing is not None:
        spacing = _num(spacing, "disturbance.spacing")
        _require(spacing > 0, "disturbance.spacing", "must be positive")

    s = raw.get("solver", {}) or {}
    max_sweeps = s.get("max_sweeps", 1000)
    _require(isinstance(max_sweeps, int) and max_sweeps >= 1,
             "solver.max_sweeps", "must be an integer >= 1")
    workers = s.get("workers", 1)
    _require(isinstance(workers, int) and workers >= 1,
             "solver.workers", "must be an integer >= 1")

    ss = raw.get("safe_set", {}) or {}
    u0 = ss.get("u0")
    if u0 is not None:
        u0 = _num(u0, "safe_set.u0")
    sculpt_check = bool(ss.get("sculpt_check", False))

    o = raw.get("orbit", {}) or {}
    orbit_steps = o.get("steps", 0)
    _require(isinstance(orbit_steps, int) and orbit_steps >= 0,
             "orbit.steps", "must be an integer >= 0")
    seed = o.get("seed", 1)
    _require(isinstance(seed, int), "orbit.seed", "must be an integer")
    start = o.get("start")
    if start is not None:
        start = [_num(v, "orbit.start") for v in np.atleast_1d(start)]
        _require(len(start) == dim, "orbit.start", f"needs {dim} coordinates")

    e = raw.get("ensemble", {}) or {}
    ensemble_runs = e.get("runs", 0)
    _require(isinstance(ensemble_runs, int) and ensemble_runs >= 0,
             "ensemble.runs", "must be an integer >= 0")
    ensemble_max_steps = e.get("max_steps", 1000)
    _require(isinstance(ensemble_max_steps, int) and ensemble_max_steps >= 1,
             "ensemble.max_steps", "must be an integer >= 1")
    ensemble_seed0 = e.get("seed0", 0)
    _require(isinstance(ensemble_seed0, int), "ensemble.seed0",
             "must be an integer")

    sw = raw.get("sweep", {}) or {}
    sweep_xi0 = [_num(v, "sweep.xi0_values") for v in sw.get("xi0_values", [])]

    out = raw.get("output", {}) or {}
    return ExperimentConfig(
        map_name=name, map_params=params, lower=lower, upper=upper,
        points=list(points), xi0=xi0, norm=norm, spacing=spacing,
        max_sweeps=max_sweeps, workers=workers, u0=u0,
        sculpt_check=sculpt_check, orbit_steps=orbit_steps, seed=seed,
        start=start, ensemble_runs=ensemble_runs,
        ensemble_max_steps=ensemble_max_steps, ensemble_seed0=ensemble_seed0,
        sweep_xi0=sweep_xi0, out_dir=str(out.get("dir", "out")),
        csv=bool(out.get("csv", True)), pgm=bool(out.get("pgm", True)))


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}")
    return config_from_dict(raw)
