"""Bounded disturbance: the norm ball, its finite sample set, random draws.

The solver sees the disturbance through a finite set of samples on a regular
grid inside the closed ball of radius xi0.  Ball membership is tested on
squared norms so boundary samples like (xi0, 0) survive rounding.  Simulation
draws are uniform over the continuous ball via rejection sampling from the
bounding box; the generator is owned by the caller.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DisturbanceModel",
    "build_sample_set",
    "draw_disturbance",
    "NORMS",
]

NORMS = ("euclidean", "chebyshev")


def _norm_code(norm: str) -> int:
    if norm not in NORMS:
        raise ValueError(f"unknown norm '{norm}'; choose from {NORMS}")
    return NORMS.index(norm)


def _inside_ball(v: np.ndarray, bound: float, norm: str) -> bool:
    if norm == "chebyshev":
        return bool(np.max(np.abs(v)) <= bound)
    # squared comparison; exact for the boundary lattice points we generate
    return bool(np.sum(v * v) <= bound * bound)


@dataclass(frozen=True)
class DisturbanceModel:
    """Disturbance ball of radius bound with a finite grid sample set.

    samples is (M, d); cell_offsets is the same set in integer lattice steps
    (samples = cell_offsets * spacing, per axis).  Immutable and freely
    shareable.
    """

    bound: float
    norm: str
    spacing: np.ndarray
    samples: np.ndarray
    cell_offsets: np.ndarray

    @property
    def dimension(self) -> int:
        return self.samples.shape[1]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    def contains(self, v: np.ndarray) -> bool:
        return _inside_ball(np.atleast_1d(v), self.bound, self.norm)


def build_sample_set(xi0: float, dimension: int, norm: str = "euclidean",
                     spacing=None) -> DisturbanceModel:
    """All points of a regular grid with the given spacing inside the ball.

    spacing is a scalar or one value per axis.  The grid is centered at the
    origin, so the zero vector is always a sample and the set is exactly
    symmetric under negation.  A spacing wider than the ball leaves only the
    origin; that is legal but usually means a misconfiguration, so it warns.
    """
    if xi0 < 0:
        raise ValueError("disturbance bound must be nonnegative")
    if dimension not in (1, 2):
        raise ValueError("only 1D and 2D disturbances are supported")
    _norm_code(norm)
    if spacing is None:
        spacing = xi0 if xi0 > 0 else 1.0
    spacing = np.broadcast_to(
        np.asarray(spacing, dtype=np.float64), (dimension,)).copy()
    if np.any(spacing <= 0):
        raise ValueError("sample spacing must be positive")

    cells = []
    if xi0 > 0:
        bounds = [int(np.floor(xi0 / spacing[d])) + 1 for d in range(dimension)]
    else:
        bounds = [0] * dimension
    if dimension == 1:
        for i in range(-bounds[0], bounds[0] + 1):
            if _inside_ball(np.array([i * spacing[0]]), xi0, norm):
                cells.append((i,))
    else:
        for i in range(-bounds[0], bounds[0] + 1):
            for j in range(-bounds[1], bounds[1] + 1):
                v = np.array([i * spacing[0], j * spacing[1]])
                if _inside_ball(v, xi0, norm):
                    cells.append((i, j))
    cell_offsets = np.array(sorted(cells), dtype=np.int64)
    samples = cell_offsets.astype(np.float64) * spacing
    if xi0 > 0 and len(samples) == 1:
        warnings.warn(
            f"sample spacing {spacing} exceeds the ball diameter; "
            "the sample set degenerates to {0}", UserWarning)
    return DisturbanceModel(float(xi0), norm, spacing, samples, cell_offsets)


def draw_disturbance(model: DisturbanceModel,
                     rng: np.random.Generator) -> np.ndarray:
    """One draw, uniform over the continuous closed ball of radius bound."""
    b = model.bound
    if b == 0.0:
        return np.zeros(model.dimension)
    if model.dimension == 1 or model.norm == "chebyshev":
        return rng.uniform(-b, b, size=model.dimension)
    while True:  # rejection from the box; acceptance ~ pi/4 in 2D
        v = rng.uniform(-b, b, size=2)
        if v[0] * v[0] + v[1] * v[1] <= b * b:
            return v
