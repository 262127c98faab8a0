"""Safety-function solver: minimax value iteration on the grid.

The update operator is

    U_{k+1}[i] = max_s ( min_j ( max( dist(f(q_i) + xi_s, q_j), U_k[j] ) ) )

iterated from U_0 = 0 until the value array repeats exactly.  Exact equality
is reachable because every value is a selection: max(d, U[j]) is bitwise one
of its two arguments, so by induction every entry of every iterate is either
0.0 or one of the finitely many image-to-gridpoint distances, and the
iteration is monotone nondecreasing in that finite set.

The N x M x N distance table the update suggests is never materialized (it
would not fit in memory at production resolutions); only the N mapped grid
points and the M disturbance offsets are stored, and distances are recomputed
inside pruned searches.  Pruning never changes values: see _kernels for the
bit-exactness argument.

A per-sweep pointer field on an extended lattice covering all disturbed
images supplies each inner search with a near-optimal starting candidate;
combined with monotonicity of the iteration this removes almost all search
work away from cells that are still changing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .disturbance import DisturbanceModel, NORMS
from .dynamics import GridRegion, MapSystem

__all__ = [
    "ImageTable",
    "SafetyFunction",
    "image_table",
    "update_sweep",
    "compute_safety_function",
    "pruned_inner_min",
    "set_workers",
]


def set_workers(n: int) -> int:
    """Set the number of solver threads; returns the effective count."""
    import numba

    eff = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(eff)
    return eff


# --- images ------------------------------------------------------------------

@dataclass(frozen=True)
class ImageTable:
    """The N*M disturbed images f(q_i) + xi_s, stored factored.

    base holds the N mapped grid points (computed once); offsets the M
    disturbance samples.  Entry (i, s) is base[i] + offsets[s]; storing the
    factors instead of the products keeps production grids in memory and
    loses nothing, the sum is a single rounding either way.
    """

    region: GridRegion
    base: np.ndarray      # (N, d) mapped grid points
    offsets: np.ndarray   # (M, d) disturbance samples
    cell_offsets: np.ndarray  # (M, d) same samples in integer grid steps
    norm: str

    @property
    def shape(self) -> tuple[int, int]:
        return self.base.shape[0], self.offsets.shape[0]

    @property
    def n_entries(self) -> int:
        n, m = self.shape
        return n * m

    def get(self, i: int, s: int) -> np.ndarray:
        return self.base[i] + self.offsets[s]

    def images_for(self, i: int) -> np.ndarray:
        """All M disturbed images of grid point i, shape (M, d)."""
        return self.base[i] + self.offsets


def image_table(map_: MapSystem, region: GridRegion,
                model: DisturbanceModel) -> ImageTable:
    """Map every grid point once and attach the disturbance offsets."""
    if map_.dimension != region.dimension:
        raise ValueError("map and region dimensions disagree")
    if model.dimension != region.dimension:
        raise ValueError("disturbance and region dimensions disagree")
    base = np.ascontiguousarray(map_.apply_batch(region.grid_points()),
                                dtype=np.float64)
    if base.shape != (region.n_points, region.dimension):
        raise ValueError("apply_batch returned a wrong shape")
    # sample offsets in grid steps; only a search heuristic, need not be exact
    cells = np.rint(model.samples / region.spacing).astype(np.int64)
    return ImageTable(region, base, np.ascontiguousarray(model.samples),
                      cells, model.norm)


# --- pyramid + extended lattice ---------------------------------------------

def _build_pyramid_2d(U2: np.ndarray):
    levels = [U2]
    cx, cy = U2.shape
    while cx > 2 or cy > 2:
        px, py = (cx + 1) // 2, (cy + 1) // 2
        pad = np.full((px * 2, py * 2), np.inf)
        pad[:cx, :cy] = levels[-1]
        levels.append(np.minimum(
            np.minimum(pad[0::2, 0::2], pad[1::2, 0::2]),
            np.minimum(pad[0::2, 1::2], pad[1::2, 1::2])))
        cx, cy = px, py
    dims = np.array([lv.shape for lv in levels], dtype=np.int64)
    offs = np.zeros(len(levels) + 1, dtype=np.int64)
    for i, lv in enumerate(levels):
        offs[i + 1] = offs[i] + lv.size
    return np.concatenate([lv.ravel() for lv in levels]), offs, dims


def _build_pyramid_1d(U: np.ndarray):
    levels = [U]
    n = U.shape[0]
    while n > 4:
        p = (n + 1) // 2
        pad = np.full(p * 2, np.inf)
        pad[:n] = levels[-1]
        levels.append(np.minimum(pad[0::2], pad[1::2]))
        n = p
    dims = np.array([lv.shape[0] for lv in levels], dtype=np.int64)
    offs = np.zeros(len(levels) + 1, dtype=np.int64)
    for i, lv in enumerate(levels):
        offs[i + 1] = offs[i] + lv.size
    return np.concatenate(levels), offs, dims


def _extend_axis(axis: np.ndarray, lo_need: float, hi_need: float):
    """Grow a grid axis outward with its own spacing until it covers a range.

    The original coordinates are kept verbatim so indices in the overlap
    translate by a constant offset.
    """
    h = (axis[-1] - axis[0]) / (len(axis) - 1)
    n_lo = int(np.ceil((axis[0] - lo_need) / h)) + 1 if lo_need < axis[0] else 0
    n_hi = int(np.ceil((hi_need - axis[-1]) / h)) + 1 if hi_need > axis[-1] else 0
    left = axis[0] - h * np.arange(n_lo, 0, -1)
    right = axis[-1] + h * np.arange(1, n_hi + 1)
    return np.concatenate([left, axis, right]), n_lo


def _nearest_indices(axis: np.ndarray, x: np.ndarray) -> np.ndarray:
    idx = np.clip(np.searchsorted(axis, x), 0, len(axis) - 1)
    step_back = (idx > 0) & ((x - axis[np.maximum(idx - 1, 0)])
                             <= (axis[idx] - x))
    return (idx - step_back).astype(np.int64)


class _SweepEngine:
    """Private driver holding the extended pointer field between sweeps.

    monotone=True is only valid when successive calls feed the iterates of
    the monotone iteration (each input is >= the previous one elementwise);
    it lets the previous value floor each cell and the previous pointers seed
    the field.  With monotone=False every call is self-contained and exact
    for arbitrary input.
    """

    def __init__(self, images: ImageTable, monotone: bool):
        self.images = images
        self.monotone = monotone
        region = images.region
        self.dim = region.dimension
        self.norm_code = NORMS.index(images.norm)
        xi = float(np.max(np.abs(images.offsets))) if images.offsets.size else 0.0
        if self.dim == 1:
            ax = region.axes[0]
            self.ax = ax
            self.ax_e, koff = _extend_axis(
                ax, images.base[:, 0].min() - xi, images.base[:, 0].max() + xi)
            self.ix_base = _nearest_indices(self.ax_e, images.base[:, 0])
            self._gcell = np.clip(np.arange(len(self.ax_e)) - koff,
                                  0, len(ax) - 1).astype(np.int64)
        else:
            ax, ay = region.axes
            self.ax, self.ay = ax, ay
            self.ax_e, koffx = _extend_axis(
                ax, images.base[:, 0].min() - xi, images.base[:, 0].max() + xi)
            self.ay_e, koffy = _extend_axis(
                ay, images.base[:, 1].min() - xi, images.base[:, 1].max() + xi)
            self.ix_base = _nearest_indices(self.ax_e, images.base[:, 0])
            self.iy_base = _nearest_indices(self.ay_e, images.base[:, 1])
            self._gx = np.clip(np.arange(len(self.ax_e)) - koffx,
                               0, len(ax) - 1).astype(np.int32)
            self._gy = np.clip(np.arange(len(self.ay_e)) - koffy,
                               0, len(ay) - 1).astype(np.int32)
        self._ptr = None
        self._G = None

    def _reset_pointers(self):
        """Self-seeded pointers: nearest in-grid cell per extended cell."""
        if self.dim == 1:
            self._ptr = self._gcell.copy()
            self._G = np.full(len(self.ax_e), -np.inf)
        else:
            nxe, nye = len(self.ax_e), len(self.ay_e)
            self._ptr = (np.repeat(self._gx, nye).reshape(nxe, nye).copy(),
                         np.tile(self._gy, nxe).reshape(nxe, nye).copy())
            self._G = np.full((nxe, nye), -np.inf)

    def step(self, U: np.ndarray, U_floor: np.ndarray | None = None):
        """One exact application of the update operator to U."""
        region = self.images.region
        N = region.n_points
        if U.shape != (N,):
            raise ValueError("value array has wrong length")
        if U_floor is None:
            U_floor = np.full(N, -np.inf)
        if self._ptr is None or not self.monotone:
            self._reset_pointers()
        U_out = np.empty(N)
        if self.dim == 1:
            buf, offs, dims = _build_pyramid_1d(U)
            if np.all(U == 0.0):
                # every cell is a distance-argmin already; field is analytic
                G = np.abs(self.ax_e - self.ax[self._gcell])
                ptr = self._gcell.copy()
            else:
                G = np.empty(len(self.ax_e))
                ptr = np.empty(len(self.ax_e), dtype=np.int64)
                K.ext_field_1d(self.ax, self.ax_e, U, buf, offs, dims,
                               self._ptr, self._G, G, ptr)
            self._ptr, self._G = ptr, G
            K.sweep_1d(self.images.base, self.images.offsets,
                       self.images.cell_offsets, self.ix_base, self.ax,
                       U, U_floor, ptr, buf, offs, dims, U_out)
        else:
            U2 = np.ascontiguousarray(U.reshape(region.points_per_axis))
            buf, offs, dims = _build_pyramid_2d(U2)
            ptr_x, ptr_y = self._ptr
            if np.all(U == 0.0):
                DX = self.ax_e[:, None] - self.ax[self._gx][:, None]
                DY = self.ay_e[None, :] - self.ay[self._gy][None, :]
                if self.norm_code == 0:
                    G = np.sqrt(DX * DX + DY * DY)
                else:
                    G = np.maximum(np.abs(DX), np.abs(DY))
                px_out, py_out = self._ptr
            else:
                G = np.empty_like(self._G)
                px_out = np.empty_like(ptr_x)
                py_out = np.empty_like(ptr_y)
                K.ext_field_2d(self.ax, self.ay, self.ax_e, self.ay_e, U2,
                               buf, offs, dims, self.norm_code,
                               ptr_x, ptr_y, self._G, G, px_out, py_out)
            self._ptr, self._G = (px_out, py_out), G
            K.sweep_2d(self.images.base, self.images.offsets,
                       self.images.cell_offsets, self.ix_base, self.iy_base,
                       self.ax, self.ay, U2, U_floor, px_out, py_out,
                       buf, offs, dims, self.norm_code, U_out)
        return U_out


def update_sweep(U: np.ndarray, images: ImageTable) -> np.ndarray:
    """One exact update of the value array (standalone, any input allowed)."""
    U = np.ascontiguousarray(np.asarray(U, dtype=np.float64))
    if np.any(U < 0):
        raise ValueError("value array entries must be nonnegative")
    return _SweepEngine(images, monotone=False).step(U)


# --- the solver --------------------------------------------------------------

@dataclass(frozen=True)
class SafetyFunction:
    """Converged (or capped) safety function on the grid.

    sweeps counts update applications, including the final one that changed
    nothing and thereby established convergence.
    """

    region: GridRegion
    values: np.ndarray
    sweeps: int
    converged: bool
    min_value: float
    argmin_indices: np.ndarray

    def values_grid(self) -> np.ndarray:
        """Values reshaped to the grid (2D) or returned flat (1D)."""
        if self.region.dimension == 1:
            return self.values
        return self.values.reshape(self.region.points_per_axis)


def compute_safety_function(map_: MapSystem, region: GridRegion,
                            model: DisturbanceModel,
                            max_sweeps: int = 1000) -> SafetyFunction:
    """Iterate the update from U_0 = 0 to the exact fixed point.

    Non-convergence within max_sweeps updates is reported via the converged
    flag, not an exception.  Monotonicity of the iterates is asserted every
    sweep; a violation would mean a solver defect, never a data condition.
    """
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be at least 1")
    images = image_table(map_, region, model)
    engine = _SweepEngine(images, monotone=True)
    U = np.zeros(region.n_points)
    sweeps = 0
    converged = False
    for _ in range(max_sweeps):
        U_next = engine.step(U, U_floor=U)
        sweeps += 1
        if not np.all(U_next >= U):
            raise RuntimeError("update operator lost monotonicity (solver bug)")
        if np.array_equal(U_next, U):
            converged = True
            break
        U = U_next
    min_value = float(U.min())
    argmin = np.flatnonzero(U == min_value)
    return SafetyFunction(region, U, sweeps, converged, min_value, argmin)


# --- reference pruned search (expanding rings) -------------------------------

def pruned_inner_min(image: np.ndarray, U: np.ndarray, region: GridRegion,
                     norm: str = "euclidean",
                     best_so_far: float = np.inf) -> float:
    """min_j max(dist(image, q_j), U[j]) by expanding-ring search.

    Visits grid points in expanding index rings around the cell containing
    the image and stops once no unvisited point can beat the best candidate:
    every skipped point is farther along some axis than the current ring,
    and max(d, U) >= d.  Identical to the exhaustive scan bit for bit.
    """
    image = np.atleast_1d(np.asarray(image, dtype=np.float64))
    U = np.asarray(U, dtype=np.float64)
    best = float(best_so_far)

    if region.dimension == 1:
        ax = region.axes[0]
        n = len(ax)
        c = _nearest_indices(ax, image[:1])[0]
        px = image[0]
        for r in range(max(c + 1, n - c)):
            lo_d = px - ax[c - r] if c - r >= 0 else np.inf
            hi_d = ax[c + r] - px if c + r < n else np.inf
            if min(lo_d, hi_d) >= best:
                break
            for j in ((c - r, c + r) if r else (c,)):
                if 0 <= j < n:
                    d = abs(px - ax[j])
                    v = d if d > U[j] else U[j]
                    if v < best:
                        best = v
        return best

    ax, ay = region.axes
    nx, ny = region.points_per_axis
    U2 = U.reshape(nx, ny)
    px, py = image
    cx = _nearest_indices(ax, image[:1])[0]
    cy = _nearest_indices(ay, image[1:])[0]
    eucl = norm == "euclidean"
    for r in range(max(cx + 1, nx - cx) + max(cy + 1, ny - cy)):
        gaps = [px - ax[cx - r] if cx - r >= 0 else np.inf,
                ax[cx + r] - px if cx + r < nx else np.inf,
                py - ay[cy - r] if cy - r >= 0 else np.inf,
                ay[cy + r] - py if cy + r < ny else np.inf]
        g = min(gaps)
        if g == np.inf:
            break
        ring_bound = np.sqrt(g * g + 0.0) if eucl else g
        if ring_bound >= best:
            break
        # ring r: cells at Chebyshev index distance exactly r, clipped
        cells_x, cells_y = [], []
        x0, x1 = cx - r, cx + r
        y0, y1 = cy - r, cy + r
        if r == 0:
            cells_x, cells_y = [cx], [cy]
        else:
            for jx in range(max(x0, 0), min(x1, nx - 1) + 1):
                if y0 >= 0:
                    cells_x.append(jx)
                    cells_y.append(y0)
                if y1 < ny:
                    cells_x.append(jx)
                    cells_y.append(y1)
            for jy in range(max(y0 + 1, 0), min(y1 - 1, ny - 1) + 1):
                if x0 >= 0:
                    cells_x.append(x0)
                    cells_y.append(jy)
                if x1 < nx:
                    cells_x.append(x1)
                    cells_y.append(jy)
        jx = np.array(cells_x, dtype=np.int64)
        jy = np.array(cells_y, dtype=np.int64)
        dx = px - ax[jx]
        dy = py - ay[jy]
        if eucl:
            d = np.sqrt(dx * dx + dy * dy)
        else:
            d = np.maximum(np.abs(dx), np.abs(dy))
        v = np.maximum(d, U2[jx, jy])
        m = v.min() if len(v) else np.inf
        if m < best:
            best = float(m)
    return best
