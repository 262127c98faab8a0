"""Safe sets: sublevel extraction, the sculpting oracle, components.

A safe set is the sublevel set {q : U(q) <= u0}.  Membership uses a relative
tolerance of 1e-9 to absorb last-bit noise in the selection values; the
sculpting algorithm applies the same threshold to its recapture test, so the
two constructions agree as exact index sets (each sculpting survivor set is
invariant, every invariant set lies in the sublevel set, and conversely).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels as K
from .disturbance import DisturbanceModel, NORMS
from .dynamics import GridRegion, MapSystem
from .solver import SafetyFunction, _build_pyramid_1d, _build_pyramid_2d, \
    image_table

__all__ = [
    "SafeSet",
    "NoSafeSetError",
    "membership_threshold",
    "extract_safe_set",
    "sculpt_safe_set",
    "count_components",
    "asymptotic_safe_set",
]


class NoSafeSetError(ValueError):
    """No grid point satisfies the control bound; below min(U) no safe set exists."""


def membership_threshold(u0: float) -> float:
    """Inclusive membership cutoff for the control bound u0."""
    return u0 + 1e-9 * max(1.0, u0)


@dataclass(frozen=True)
class SafeSet:
    """Subset of grid points sustainable with controls bounded by u0.

    For extracted and sculpted sets member_mask[i] holds iff the point
    survives with bound u0; empirical sets (visited-orbit sets) reuse the
    container without that semantics.
    """

    region: GridRegion
    u0: float
    member_mask: np.ndarray

    @property
    def member_count(self) -> int:
        return int(np.count_nonzero(self.member_mask))

    @property
    def member_indices(self) -> np.ndarray:
        return np.flatnonzero(self.member_mask)

    def mask_grid(self) -> np.ndarray:
        if self.region.dimension == 1:
            return self.member_mask
        return self.member_mask.reshape(self.region.points_per_axis)


def extract_safe_set(sf: SafetyFunction, u0: float) -> SafeSet:
    """Sublevel set {U <= u0 (+ tolerance)}; u0 = min(U) gives the minimum set."""
    mask = sf.values <= membership_threshold(u0)
    if not mask.any():
        raise NoSafeSetError(
            f"no safe set exists at control bound {u0}; min(U) = {sf.min_value}")
    return SafeSet(sf.region, float(u0), mask)


def sculpt_safe_set(map_: MapSystem, region: GridRegion,
                    model: DisturbanceModel, u0: float,
                    max_rounds: int = 10_000) -> SafeSet:
    """Iterative removal: drop points some disturbance makes unrecapturable.

    Starting from the full grid, each round removes every point q for which
    some sample xi has no surviving point within u0 of f(q) + xi; removals
    take effect between rounds, so rounds are order-independent.  The fixed
    point equals extract_safe_set on the converged safety function computed
    with the same samples and norm.  An empty result is a valid outcome.
    """
    if u0 < 0:
        raise ValueError("control bound must be nonnegative")
    images = image_table(map_, region, model)
    thresh = membership_threshold(u0)
    N = region.n_points
    alive = np.ones(N, dtype=np.bool_)
    removed = np.empty(N, dtype=np.bool_)
    norm_code = NORMS.index(model.norm)
    for _ in range(max_rounds):
        W = np.where(alive, 0.0, np.inf)
        if region.dimension == 1:
            buf, offs, dims = _build_pyramid_1d(W)
            K.sculpt_round_1d(images.base, images.offsets, region.axes[0],
                              W, buf, offs, dims, alive, thresh, removed)
        else:
            W2 = np.ascontiguousarray(W.reshape(region.points_per_axis))
            buf, offs, dims = _build_pyramid_2d(W2)
            K.sculpt_round_2d(images.base, images.offsets,
                              region.axes[0], region.axes[1], W2,
                              buf, offs, dims, norm_code, alive, thresh,
                              removed)
        if not removed.any():
            break
        alive &= ~removed
        if not alive.any():
            break
    return SafeSet(region, float(u0), alive)


def count_components(safe_set: SafeSet) -> int:
    """Connected components of the member mask.

    1D: maximal runs of consecutive members.  2D: 8-neighbor connectivity
    (the strips are thin diagonal curves that 4-connectivity fragments).
    """
    mask = safe_set.mask_grid()
    if not mask.any():
        raise ValueError("component count of an empty set is undefined")
    if safe_set.region.dimension == 1:
        padded = np.concatenate([[False], mask, [False]])
        return int(np.sum(~padded[:-1] & padded[1:]))
    _, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    return int(n)


def asymptotic_safe_set(orbit, burn_in: int) -> SafeSet:
    """Grid points an orbit visits after discarding its first burn_in steps.

    Empirical stand-in for the set controlled orbits settle into; states must
    be grid points (controlled orbits are).
    """
    states = orbit.states
    if len(states) <= burn_in:
        raise ValueError("orbit not longer than burn_in")
    region = orbit.region
    mask = np.zeros(region.n_points, dtype=np.bool_)
    for q in states[burn_in:]:
        mask[region.point_to_index(q)] = True
    return SafeSet(region, float(orbit.u0), mask)
