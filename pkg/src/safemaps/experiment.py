"""Experiment orchestration: single runs, disturbance sweeps, summaries.

run_experiment executes the full pipeline (safety function, safe set,
optional sculpting cross-check, orbits, escape ensemble) and writes the
enabled exports.  Every report field is recomputable from the exported CSVs.
"""

from __future__ import annotations

import os

import numpy as np

from . import io as out_io
from .config import ExperimentConfig
from .control_sim import escape_census, run_controlled, run_uncontrolled
from .disturbance import build_sample_set
from .dynamics import GridRegion, map_from_name
from .safe_sets import count_components, extract_safe_set, sculpt_safe_set
from .solver import compute_safety_function, set_workers

__all__ = ["run_experiment", "run_sweep", "summarize_outputs"]


def _setup(config: ExperimentConfig):
    map_ = map_from_name(config.map_name, **config.map_params)
    region = GridRegion(config.lower, config.upper, config.points)
    spacing = config.spacing if config.spacing is not None else region.spacing
    model = build_sample_set(config.xi0, region.dimension, config.norm,
                             spacing)
    return map_, region, model


def run_experiment(config: ExperimentConfig, subdir: str = "") -> dict:
    """Full pipeline for one configuration; returns the report mapping.

    Non-convergence is reported (converged=False) with whatever outputs were
    produced, not raised.  A control bound below min(U) raises NoSafeSetError.
    """
    set_workers(config.workers)
    map_, region, model = _setup(config)
    out_dir = os.path.join(config.out_dir, subdir) if subdir else config.out_dir
    files: list[str] = []
    report: dict = {
        "map": config.map_name,
        "params": dict(config.map_params),
        "points": list(config.points),
        "xi0": config.xi0,
        "norm": config.norm,
        "n_samples": model.n_samples,
    }

    sf = compute_safety_function(map_, region, model, config.max_sweeps)
    report["min_U"] = sf.min_value
    report["sweeps"] = sf.sweeps
    report["converged"] = sf.converged
    if config.csv:
        files.append(out_io.write_safety_csv(
            os.path.join(out_dir, "safety.csv"), sf))
        files.append(out_io.write_samples_csv(
            os.path.join(out_dir, "samples.csv"), model.samples))
    if config.pgm:
        files.append(out_io.write_safety_pgm(
            os.path.join(out_dir, "safety.pgm"), sf))
    if not sf.converged:
        report["files"] = files
        return report

    u0 = sf.min_value if config.u0 is None else config.u0
    safe_set = extract_safe_set(sf, u0)
    report["u0"] = u0
    report["member_count"] = safe_set.member_count
    report["components"] = count_components(safe_set)
    if config.csv:
        files.append(out_io.write_safeset_csv(
            os.path.join(out_dir, "safeset.csv"), safe_set))
    if config.pgm:
        files.append(out_io.write_safeset_pgm(
            os.path.join(out_dir, "safeset.pgm"), safe_set))

    if config.sculpt_check:
        sculpted = sculpt_safe_set(map_, region, model, u0)
        report["sculpt_agrees"] = bool(
            np.array_equal(sculpted.member_mask, safe_set.member_mask))

    if config.orbit_steps > 0:
        if config.start is not None:
            start = np.asarray(config.start, dtype=np.float64)
        else:
            start = region.index_to_point(int(safe_set.member_indices[0]))
        orbit = run_controlled(map_, region, model, safe_set, start,
                               config.orbit_steps, config.seed)
        report["orbit_steps"] = orbit.n_steps
        report["orbit_max_control"] = orbit.max_control_norm
        report["orbit_escaped"] = orbit.escaped_at is not None
        if config.csv:
            files.append(out_io.write_orbit_csv(
                os.path.join(out_dir, "orbit.csv"), orbit))

    if config.ensemble_runs > 0:
        times = escape_census(map_, region, model, config.ensemble_runs,
                              config.ensemble_max_steps, config.ensemble_seed0)
        escaped = times >= 0
        report["ensemble_runs"] = int(config.ensemble_runs)
        report["escape_fraction"] = float(escaped.mean())
        report["median_escape_time"] = (
            float(np.median(times[escaped])) if escaped.any() else None)
        if config.csv:
            files.append(out_io.write_ensemble_csv(
                os.path.join(out_dir, "ensemble.csv"),
                config.ensemble_seed0, times))

    report["files"] = files
    return report


def run_sweep(config: ExperimentConfig) -> dict:
    """run_experiment per sweep value; failures recorded, sweep continues."""
    if not config.sweep_xi0:
        raise ValueError("sweep requires a nonempty xi0 list")
    rows = []
    reports = []
    for xi0 in config.sweep_xi0:
        item = config.with_xi0(xi0)
        row = {"xi0": xi0, "u0": None, "member_count": None,
               "components": None, "sweeps": None, "status": "ok"}
        try:
            rep = run_experiment(item, subdir=f"xi0_{xi0:g}")
            reports.append(rep)
            row["sweeps"] = rep.get("sweeps")
            if rep.get("converged"):
                row["u0"] = rep.get("u0")
                row["member_count"] = rep.get("member_count")
                row["components"] = rep.get("components")
            else:
                row["status"] = "not converged"
        except Exception as exc:  # recorded, sweep continues
            row["status"] = f"error: {exc}"
        rows.append(row)
    path = out_io.write_sweep_csv(
        os.path.join(config.out_dir, "sweep_summary.csv"), rows)
    return {"rows": rows, "summary_csv": path, "reports": reports}


def summarize_outputs(out_dir: str) -> dict:
    """Recompute the report quantities from a run's exported CSVs."""
    summary: dict = {}
    safety = os.path.join(out_dir, "safety.csv")
    if os.path.exists(safety):
        vals = np.loadtxt(safety, delimiter=",", skiprows=1, ndmin=2)
        summary["grid_points"] = int(vals.shape[0])
        summary["min_U"] = float(vals[:, -1].min())
    safeset = os.path.join(out_dir, "safeset.csv")
    if os.path.exists(safeset):
        with open(safeset) as fh:
            summary["member_count"] = sum(1 for _ in fh) - 1
    orbit = os.path.join(out_dir, "orbit.csv")
    if os.path.exists(orbit):
        with open(orbit) as fh:
            header = fh.readline().rstrip("\n").split(",")
            col = header.index("u_norm")
            norms = [float(parts[col]) for parts in
                     (line.rstrip("\n").split(",") for line in fh)
                     if parts[col]]
        summary["orbit_steps"] = len(norms)
        summary["orbit_max_control"] = max(norms) if norms else 0.0
    ensemble = os.path.join(out_dir, "ensemble.csv")
    if os.path.exists(ensemble):
        with open(ensemble) as fh:
            fh.readline()
            times = [line.rstrip("\n").split(",")[1] for line in fh]
        escaped = [int(t) for t in times if t]
        summary["ensemble_runs"] = len(times)
        summary["escape_fraction"] = (len(escaped) / len(times)) if times else 0.0
        if escaped:
            summary["median_escape_time"] = float(np.median(escaped))
    sweep = os.path.join(out_dir, "sweep_summary.csv")
    if os.path.exists(sweep):
        with open(sweep) as fh:
            summary["sweep_rows"] = sum(1 for _ in fh) - 1
    return summary
