"""Command-line interface.

Subcommands: safety, safeset, orbit, sweep, report.  A --config file supplies
the base configuration; flags override individual fields.  Exit codes:
0 success, 1 config error, 2 non-convergence, 3 no safe set at the requested
control bound.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
import yaml

from .config import ConfigError, config_from_dict
from .control_sim import run_uncontrolled
from .experiment import run_experiment, run_sweep, summarize_outputs
from .safe_sets import NoSafeSetError
from ._version import __version__

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2
EXIT_NO_SAFE_SET = 3


def _csv_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _csv_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--map", dest="map_name", help="tent, henon or lozi")
    p.add_argument("--param", action="append", default=[],
                   metavar="NAME=VALUE", help="map parameter, repeatable")
    p.add_argument("--lower", type=_csv_floats, help="region lower corner")
    p.add_argument("--upper", type=_csv_floats, help="region upper corner")
    p.add_argument("--points", type=_csv_ints, help="grid points per axis")
    p.add_argument("--xi0", type=float, help="disturbance bound")
    p.add_argument("--norm", choices=["euclidean", "chebyshev"])
    p.add_argument("--spacing", type=float, help="disturbance sample spacing")
    p.add_argument("--max-sweeps", type=int, dest="max_sweeps")
    p.add_argument("--workers", type=int)
    p.add_argument("--u0", type=float, help="control bound (default: min U)")
    p.add_argument("--sculpt-check", action="store_true", default=None,
                   help="cross-check the safe set with the sculpting oracle")
    p.add_argument("--steps", type=int, help="orbit length")
    p.add_argument("--seed", type=int, help="orbit seed")
    p.add_argument("--start", type=_csv_floats, help="orbit start point")
    p.add_argument("--runs", type=int, help="uncontrolled ensemble size")
    p.add_argument("--max-steps", type=int, dest="max_steps",
                   help="ensemble horizon")
    p.add_argument("--seed0", type=int, help="ensemble base seed")
    p.add_argument("--sweep-xi0", type=_csv_floats, dest="sweep_xi0",
                   help="comma-separated disturbance bounds")
    p.add_argument("--out", help="output directory")
    p.add_argument("--csv", action="store_true", default=None)
    p.add_argument("--no-csv", action="store_true", default=None)
    p.add_argument("--pgm", action="store_true", default=None)
    p.add_argument("--no-pgm", action="store_true", default=None)


def _merge(raw: dict, path: tuple[str, ...], value):
    if value is None:
        return
    node = raw
    for key in path[:-1]:
        node = node.setdefault(key, {}) or node[key]
    node[path[-1]] = value


def _build_config(args) -> "ExperimentConfig":
    if args.config:
        try:
            with open(args.config) as fh:
                raw = yaml.safe_load(fh) or {}
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {args.config}: {exc}")
    else:
        raw = {}
    params = {}
    for item in args.param:
        if "=" not in item:
            raise ConfigError(f"--param expects NAME=VALUE, got {item!r}")
        name, _, value = item.partition("=")
        try:
            params[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--param {name}: {value!r} is not a number")
    if params:
        sec = raw.setdefault("map", {}) or raw["map"]
        merged = dict(sec.get("params", {}) or {})
        merged.update(params)
        sec["params"] = merged
    _merge(raw, ("map", "name"), args.map_name)
    _merge(raw, ("region", "lower"), args.lower)
    _merge(raw, ("region", "upper"), args.upper)
    _merge(raw, ("region", "points"), args.points)
    _merge(raw, ("disturbance", "xi0"), args.xi0)
    _merge(raw, ("disturbance", "norm"), args.norm)
    _merge(raw, ("disturbance", "spacing"), args.spacing)
    _merge(raw, ("solver", "max_sweeps"), args.max_sweeps)
    _merge(raw, ("solver", "workers"), args.workers)
    _merge(raw, ("safe_set", "u0"), args.u0)
    _merge(raw, ("safe_set", "sculpt_check"), args.sculpt_check)
    _merge(raw, ("orbit", "steps"), args.steps)
    _merge(raw, ("orbit", "seed"), args.seed)
    _merge(raw, ("orbit", "start"), args.start)
    _merge(raw, ("ensemble", "runs"), args.runs)
    _merge(raw, ("ensemble", "max_steps"), args.max_steps)
    _merge(raw, ("ensemble", "seed0"), args.seed0)
    _merge(raw, ("sweep", "xi0_values"), args.sweep_xi0)
    _merge(raw, ("output", "dir"), args.out)
    if args.csv:
        _merge(raw, ("output", "csv"), True)
    if args.no_csv:
        _merge(raw, ("output", "csv"), False)
    if args.pgm:
        _merge(raw, ("output", "pgm"), True)
    if args.no_pgm:
        _merge(raw, ("output", "pgm"), False)
    return config_from_dict(raw)


def _print_report(report: dict):
    for key, value in report.items():
        if key == "files":
            for f in value:
                print(f"wrote {f}")
        else:
            print(f"{key}: {value}")


def _cmd_safety(args) -> int:
    config = _build_config(args)
    report = run_experiment(config)
    _print_report(report)
    return EXIT_OK if report["converged"] else EXIT_NOT_CONVERGED


def _cmd_safeset(args) -> int:
    return _cmd_safety(args)


def _cmd_orbit(args) -> int:
    config = _build_config(args)
    if args.uncontrolled:
        from .experiment import _setup
        from . import io as out_io
        import os

        map_, region, model = _setup(config)
        start = (np.asarray(config.start, dtype=np.float64)
                 if config.start is not None
                 else (region.lower + region.upper) / 2.0)
        steps = config.orbit_steps if config.orbit_steps > 0 else 1000
        orbit = run_uncontrolled(map_, region, model, start, steps,
                                 config.seed)
        print(f"steps: {orbit.n_steps}")
        print(f"escaped_at: {orbit.escaped_at}")
        if config.csv:
            path = out_io.write_orbit_csv(
                os.path.join(config.out_dir, "orbit_uncontrolled.csv"), orbit)
            print(f"wrote {path}")
        return EXIT_OK
    if config.orbit_steps <= 0:
        raise ConfigError("orbit.steps: must be positive for the orbit command")
    return _cmd_safety(args)


def _cmd_sweep(args) -> int:
    config = _build_config(args)
    result = run_sweep(config)
    for row in result["rows"]:
        print(f"xi0={row['xi0']:g} u0={row['u0']} components={row['components']} "
              f"members={row['member_count']} sweeps={row['sweeps']} "
              f"[{row['status']}]")
    print(f"wrote {result['summary_csv']}")
    bad = [r for r in result["rows"] if r["status"] != "ok"]
    return EXIT_OK if not bad else EXIT_NOT_CONVERGED


def _cmd_report(args) -> int:
    summary = summarize_outputs(args.dir)
    if not summary:
        print(f"no recognizable outputs under {args.dir}")
        return EXIT_CONFIG
    for key, value in summary.items():
        print(f"{key}: {value}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="safemaps",
        description="Safety functions and safe sets for chaotic maps "
                    "under bounded disturbance.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("safety", help="compute the safety function")
    _add_common(p)
    p.set_defaults(func=_cmd_safety)

    p = sub.add_parser("safeset", help="extract (and optionally sculpt) the safe set")
    _add_common(p)
    p.set_defaults(func=_cmd_safeset)

    p = sub.add_parser("orbit", help="run controlled or uncontrolled orbits")
    _add_common(p)
    p.add_argument("--uncontrolled", action="store_true",
                   help="run without control from the start point")
    p.set_defaults(func=_cmd_orbit)

    p = sub.add_parser("sweep", help="run a disturbance-bound series")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("report", help="re-summarize an output directory")
    p.add_argument("--dir", default="out", help="output directory to read")
    p.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoSafeSetError as exc:
        print(f"no safe set: {exc}", file=sys.stderr)
        return EXIT_NO_SAFE_SET


if __name__ == "__main__":
    sys.exit(main())
