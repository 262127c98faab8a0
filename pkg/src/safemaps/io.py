"""Flat-file exports: CSV tables and 8-bit PGM images.

Floats are serialized with 17 significant digits so every CSV round-trips
bit-exactly; identical runs therefore produce byte-identical files.  PGM
images are binary P5, pixel-aligned with grid indices: column = x index,
row 0 = highest y index.
"""

from __future__ import annotations

import os

import numpy as np

from .control_sim import ControlledOrbit
from .safe_sets import SafeSet
from .solver import SafetyFunction

__all__ = [
    "fmt",
    "write_safety_csv",
    "write_safety_pgm",
    "write_safeset_csv",
    "write_safeset_pgm",
    "write_orbit_csv",
    "write_ensemble_csv",
    "write_sweep_csv",
    "write_samples_csv",
]

PGM_LOG_EPS = 1e-12


def fmt(x: float) -> str:
    """17 significant digits; enough for exact float64 round trips."""
    return format(float(x), ".17g")


def _write_rows(path: str, header: list[str], rows) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return path


def _coord_header(dim: int, prefix: str = "") -> list[str]:
    names = ["x", "y"][:dim]
    return [prefix + n for n in names]


def write_safety_csv(path: str, sf: SafetyFunction) -> str:
    region = sf.region
    dim = region.dimension
    pts = region.grid_points()
    rows = (
        [str(i)] + [fmt(c) for c in pts[i]] + [fmt(sf.values[i])]
        for i in range(region.n_points)
    )
    return _write_rows(path, ["index"] + _coord_header(dim) + ["U"], rows)


def _to_pgm_bytes(img: np.ndarray) -> bytes:
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode() + img.astype(np.uint8).tobytes()


def write_safety_pgm(path: str, sf: SafetyFunction) -> str:
    """Log-scaled safety function: round(255 * (log10(U+eps) - min)/(max - min))."""
    vals = np.log10(sf.values + PGM_LOG_EPS)
    lo, hi = vals.min(), vals.max()
    if hi > lo:
        pix = np.rint(255.0 * (vals - lo) / (hi - lo))
    else:
        pix = np.zeros_like(vals)
    if sf.region.dimension == 1:
        img = pix[None, :]
    else:
        img = pix.reshape(sf.region.points_per_axis).T[::-1]
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_to_pgm_bytes(img))
    return path


def write_safeset_csv(path: str, safe_set: SafeSet) -> str:
    region = safe_set.region
    pts = region.grid_points()
    rows = (
        [str(i)] + [fmt(c) for c in pts[i]]
        for i in safe_set.member_indices
    )
    return _write_rows(path, ["index"] + _coord_header(region.dimension), rows)


def write_safeset_pgm(path: str, safe_set: SafeSet) -> str:
    """Members black (0) on a white background, aligned with the heatmap."""
    pix = np.where(safe_set.member_mask, 0, 255)
    if safe_set.region.dimension == 1:
        img = pix[None, :]
    else:
        img = pix.reshape(safe_set.region.points_per_axis).T[::-1]
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_to_pgm_bytes(img))
    return path


def write_orbit_csv(path: str, orbit: ControlledOrbit) -> str:
    dim = orbit.region.dimension
    header = (["step"] + _coord_header(dim) + _coord_header(dim, "xi_")
              + _coord_header(dim, "u_") + ["u_norm"])

    def rows():
        for n in range(orbit.n_steps + 1):
            row = [str(n)] + [fmt(c) for c in orbit.states[n]]
            if n < orbit.n_steps:
                row += [fmt(c) for c in orbit.disturbances[n]]
                row += [fmt(c) for c in orbit.controls[n]]
                row += [fmt(orbit.control_norms[n])]
            else:
                row += [""] * (2 * dim + 1)
            yield row

    return _write_rows(path, header, rows())


def write_ensemble_csv(path: str, seed0: int, escaped_at: np.ndarray) -> str:
    rows = (
        [str(seed0 + k), "" if e < 0 else str(int(e))]
        for k, e in enumerate(escaped_at)
    )
    return _write_rows(path, ["seed", "escaped_at"], rows)


def write_sweep_csv(path: str, rows: list[dict]) -> str:
    header = ["xi0", "u0", "member_count", "components", "sweeps", "status"]

    def render():
        for r in rows:
            yield [fmt(r["xi0"]),
                   fmt(r["u0"]) if r.get("u0") is not None else "",
                   str(r["member_count"]) if r.get("member_count") is not None else "",
                   str(r["components"]) if r.get("components") is not None else "",
                   str(r["sweeps"]) if r.get("sweeps") is not None else "",
                   r.get("status", "ok")]

    return _write_rows(path, header, render())


def write_samples_csv(path: str, samples: np.ndarray) -> str:
    dim = samples.shape[1]
    rows = (
        [str(i)] + [fmt(c) for c in samples[i]]
        for i in range(len(samples))
    )
    return _write_rows(path, ["index"] + _coord_header(dim, "xi_"), rows)
