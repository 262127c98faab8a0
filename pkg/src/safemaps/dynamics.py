"""Phase-space region, grid discretization and the built-in maps.

The region Q is a closed box discretized into a regular grid that includes
both endpoints of every axis (points_per_axis - 1 intervals).  Axes are
stored as explicit coordinate arrays and every kernel reads those arrays, so
there is a single source of truth for grid geometry.

Where the box is symmetric (sum of bounds 0, or 1 as for the unit interval),
axis coordinates are snapped so that mirrored pairs sum to the bound total
exactly in floating point.  Symmetric maps then produce bit-identical images
for mirrored grid points, which keeps symmetric safety functions exactly
symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GridRegion",
    "MapSystem",
    "tent_apply",
    "henon_apply",
    "lozi_apply",
    "tent_map",
    "henon_map",
    "lozi_map",
    "map_from_name",
    "index_to_point",
    "point_to_index",
    "escapes",
]


def _build_axis(lo: float, hi: float, n: int) -> np.ndarray:
    """Uniform axis including both endpoints, with exact mirror pairs.

    The raw coordinates lo + i*h are adjusted so that axis[i] + axis[n-1-i]
    equals lo + hi exactly whenever that subtraction is exact in float64
    (always when lo + hi is 0; for the unit interval as well).  The snap
    moves points by at most one ulp of the bound total.
    """
    h = (hi - lo) / (n - 1)
    ax = lo + np.arange(n, dtype=np.float64) * h
    ax[0] = lo
    ax[-1] = hi
    total = lo + hi
    for i in range(n // 2):
        hi_val = total - ax[i]
        lo_val = total - hi_val
        if lo_val + hi_val == total:  # mirrored pair is exactly representable
            ax[i] = lo_val
            ax[n - 1 - i] = hi_val
    if not np.all(np.diff(ax) > 0):
        raise ValueError("axis coordinates are not strictly increasing")
    return ax


@dataclass(frozen=True)
class GridRegion:
    """Rectangular region Q with a regular grid of candidate states.

    Flat indices are C-ordered: in 2D, index = ix * points_per_axis[1] + iy.
    """

    lower: np.ndarray
    upper: np.ndarray
    points_per_axis: tuple[int, ...]
    axes: tuple[np.ndarray, ...] = field(init=False, repr=False)

    def __init__(self, lower: Sequence[float], upper: Sequence[float],
                 points_per_axis: Sequence[int]):
        lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
        upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
        pts = tuple(int(p) for p in np.atleast_1d(points_per_axis))
        if lower.shape != upper.shape or len(pts) != lower.size:
            raise ValueError("lower, upper and points_per_axis sizes disagree")
        if lower.size not in (1, 2):
            raise ValueError("only 1D and 2D regions are supported")
        if not np.all(lower < upper):
            raise ValueError("every axis needs lower < upper")
        if any(p < 2 for p in pts):
            raise ValueError("need at least 2 points per axis")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "points_per_axis", pts)
        axes = tuple(_build_axis(lower[d], upper[d], pts[d])
                     for d in range(lower.size))
        object.__setattr__(self, "axes", axes)

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def n_points(self) -> int:
        n = 1
        for p in self.points_per_axis:
            n *= p
        return n

    @property
    def spacing(self) -> np.ndarray:
        """Nominal grid spacing per axis."""
        return (self.upper - self.lower) / (np.array(self.points_per_axis) - 1)

    def grid_points(self) -> np.ndarray:
        """All grid coordinates as an (N, dimension) array in index order."""
        if self.dimension == 1:
            return self.axes[0][:, None].copy()
        X, Y = np.meshgrid(self.axes[0], self.axes[1], indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def index_to_point(self, i: int) -> np.ndarray:
        if not 0 <= i < self.n_points:
            raise IndexError(f"grid index {i} out of range [0, {self.n_points})")
        if self.dimension == 1:
            return np.array([self.axes[0][i]])
        ny = self.points_per_axis[1]
        return np.array([self.axes[0][i // ny], self.axes[1][i % ny]])

    def point_to_index(self, q: Sequence[float]) -> int:
        """Flat index of the grid point nearest to q (exact on grid points)."""
        q = np.atleast_1d(np.asarray(q, dtype=np.float64))
        idx = 0
        for d in range(self.dimension):
            ax = self.axes[d]
            j = int(np.searchsorted(ax, q[d]))
            if j >= len(ax):
                j = len(ax) - 1
            elif j > 0 and (q[d] - ax[j - 1]) <= (ax[j] - q[d]):
                j -= 1
            idx = idx * self.points_per_axis[d] + j
        return idx

    def escapes(self, q: Sequence[float]) -> bool:
        """True iff q lies outside the closed box; the boundary belongs to Q."""
        q = np.atleast_1d(np.asarray(q, dtype=np.float64))
        return bool(np.any(q < self.lower) or np.any(q > self.upper))

    def escapes_batch(self, pts: np.ndarray) -> np.ndarray:
        return np.any((pts < self.lower) | (pts > self.upper), axis=1)


def index_to_point(region: GridRegion, i: int) -> np.ndarray:
    return region.index_to_point(i)


def point_to_index(region: GridRegion, q: Sequence[float]) -> int:
    return region.point_to_index(q)


def escapes(region: GridRegion, q: Sequence[float]) -> bool:
    return region.escapes(q)


# --- built-in maps ----------------------------------------------------------

def tent_apply(x: float, mu: float) -> float:
    """Deterministic part of the tent map: mu*x below 1/2, mu*(1-x) above."""
    if x <= 0.5:
        return mu * x
    return mu * (1.0 - x)


def henon_apply(q: Sequence[float], a: float, b: float) -> np.ndarray:
    x, y = q[0], q[1]
    return np.array([a - b * y - x * x, x])


def lozi_apply(q: Sequence[float], a: float, b: float) -> np.ndarray:
    x, y = q[0], q[1]
    return np.array([1.0 - a * abs(x) + b * y, x])


@dataclass(frozen=True)
class MapSystem:
    """A deterministic map f with named parameters.

    apply takes and returns a state vector; apply_batch maps an (N, d) array
    to an (N, d) array and must agree with apply bit for bit (both are pure,
    so they are safe to call concurrently).
    """

    name: str
    dimension: int
    parameters: dict[str, float]
    apply: Callable[[np.ndarray], np.ndarray]
    apply_batch: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("only 1D and 2D maps are supported")


def tent_map(mu: float = 3.0) -> MapSystem:
    def apply(q):
        return np.array([tent_apply(float(q[0]), mu)])

    def apply_batch(P):
        x = P[:, 0]
        return np.where(x <= 0.5, mu * x, mu * (1.0 - x))[:, None]

    return MapSystem("tent", 1, {"mu": mu}, apply, apply_batch)


def henon_map(a: float = 6.0, b: float = 0.4) -> MapSystem:
    def apply(q):
        return henon_apply(q, a, b)

    def apply_batch(P):
        x = P[:, 0]
        y = P[:, 1]
        return np.column_stack([a - b * y - x * x, x])

    return MapSystem("henon", 2, {"a": a, "b": b}, apply, apply_batch)


def lozi_map(a: float = 2.0, b: float = 0.5) -> MapSystem:
    def apply(q):
        return lozi_apply(q, a, b)

    def apply_batch(P):
        x = P[:, 0]
        y = P[:, 1]
        return np.column_stack([1.0 - a * np.abs(x) + b * y, x])

    return MapSystem("lozi", 2, {"a": a, "b": b}, apply, apply_batch)


_BUILTINS = {"tent": tent_map, "henon": henon_map, "lozi": lozi_map}


def map_from_name(name: str, **params: float) -> MapSystem:
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown map '{name}'; available: {sorted(_BUILTINS)}")
    return factory(**params)
