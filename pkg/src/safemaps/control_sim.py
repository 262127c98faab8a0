"""Controlled and uncontrolled noisy orbits.

Each controlled step applies the map, draws a disturbance, then moves the
state to the nearest safe-set member (lowest flat index on exact ties).
Controlled states are therefore always grid points.  The stored control is
fitted in ulps so that (f(q_n) + xi_n) + u_n reproduces q_{n+1} bit for bit,
keeping the map identity exactly re-derivable from the stored sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .disturbance import DisturbanceModel, NORMS, draw_disturbance
from .dynamics import GridRegion, MapSystem
from .safe_sets import SafeSet, membership_threshold
from .solver import _build_pyramid_1d, _build_pyramid_2d

__all__ = [
    "ControlledOrbit",
    "control_step",
    "run_controlled",
    "run_uncontrolled",
    "escape_census",
]


@dataclass(frozen=True)
class ControlledOrbit:
    """Orbit time series; q_{n+1} = (f(q_n) + xi_n) + u_n holds bitwise."""

    region: GridRegion
    states: np.ndarray        # (n+1, d)
    disturbances: np.ndarray  # (n, d)
    controls: np.ndarray      # (n, d)
    control_norms: np.ndarray  # (n,)
    escaped_at: int | None
    seed: int
    u0: float = field(default=np.nan)

    @property
    def n_steps(self) -> int:
        return len(self.disturbances)

    @property
    def max_control_norm(self) -> float:
        return float(self.control_norms.max()) if len(self.control_norms) else 0.0


def _norm_of(v: np.ndarray, norm: str) -> float:
    if norm == "chebyshev" or v.size == 1:
        return float(np.max(np.abs(v)))
    return float(np.sqrt(v[0] * v[0] + v[1] * v[1]))


class _MemberIndex:
    """Nearest-member queries against a fixed safe set (pyramid-backed)."""

    def __init__(self, safe_set: SafeSet, norm: str):
        self.region = safe_set.region
        self.norm_code = NORMS.index(norm)
        W = np.where(safe_set.member_mask, 0.0, np.inf)
        if self.region.dimension == 1:
            self.W = W
            self.pyr = _build_pyramid_1d(W)
        else:
            self.W = np.ascontiguousarray(W.reshape(self.region.points_per_axis))
            self.pyr = _build_pyramid_2d(self.W)

    def nearest(self, p: np.ndarray) -> tuple[float, int]:
        buf, offs, dims = self.pyr
        if self.region.dimension == 1:
            d, j = K.nearest_member_1d(p[0], self.region.axes[0], self.W,
                                       buf, offs, dims)
        else:
            d, j = K.nearest_member_2d(p[0], p[1], self.region.axes[0],
                                       self.region.axes[1], self.W,
                                       buf, offs, dims, self.norm_code)
        return float(d), int(j)


def _fit_control(disturbed: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Control u with (disturbed + u) == target bitwise, componentwise.

    The naive difference can miss by an ulp after the final rounding; nudge
    each component until the sum lands exactly.
    """
    u = target - disturbed
    for d in range(len(u)):
        for _ in range(64):
            s = disturbed[d] + u[d]
            if s == target[d]:
                break
            u[d] = np.nextafter(u[d], np.inf if s < target[d] else -np.inf)
        else:
            raise RuntimeError("control fit did not converge (solver bug)")
    return u


def control_step(disturbed_image: np.ndarray,
                 safe_set: SafeSet,
                 norm: str = "euclidean") -> tuple[np.ndarray, np.ndarray]:
    """Snap a disturbed image to the nearest safe point.

    Returns (next_state, control); ties in distance go to the lowest grid
    index.  The safe set must be nonempty (guaranteed by construction).
    """
    p = np.atleast_1d(np.asarray(disturbed_image, dtype=np.float64))
    index = _MemberIndex(safe_set, norm)
    _, j = index.nearest(p)
    if j < 0:
        raise ValueError("safe set is empty")
    target = safe_set.region.index_to_point(j)
    control = _fit_control(p, target)
    return target, control


def run_controlled(map_: MapSystem, region: GridRegion,
                   model: DisturbanceModel, safe_set: SafeSet,
                   q_start, n_steps: int, seed: int,
                   disturbances_from: str = "samples") -> ControlledOrbit:
    """Simulate map -> disturbance -> snap-to-nearest-safe for n_steps.

    q_start snaps to its nearest grid point, which must be a member.

    disturbances_from chooses the noise model: "samples" draws uniformly from
    the model's sample set, the adversary the safety function is computed
    against, so the control bound u0 is a guarantee; "ball" draws from the
    continuous ball, where recapture may exceed u0 by up to half the sample
    spacing (the net slack of the discretization).  The control bound check
    allows exactly that slack, and exceeding it raises: it would mean an
    internal inconsistency, not a data condition.
    """
    if disturbances_from not in ("samples", "ball"):
        raise ValueError("disturbances_from must be 'samples' or 'ball'")
    q_start = np.atleast_1d(np.asarray(q_start, dtype=np.float64))
    start_idx = region.point_to_index(q_start)
    if not safe_set.member_mask[start_idx]:
        raise ValueError("start point is not a safe-set member")
    index = _MemberIndex(safe_set, model.norm)
    bound = membership_threshold(safe_set.u0) * (1.0 + 1e-12)
    if disturbances_from == "ball":
        half_diag = _norm_of(model.spacing / 2.0, model.norm)
        bound += half_diag
    rng = np.random.default_rng(seed)
    d = region.dimension
    states = np.empty((n_steps + 1, d))
    disturbances = np.empty((n_steps, d))
    controls = np.empty((n_steps, d))
    control_norms = np.empty(n_steps)
    q = region.index_to_point(start_idx)
    states[0] = q
    for n in range(n_steps):
        if disturbances_from == "samples":
            xi = model.samples[rng.integers(model.n_samples)]
        else:
            xi = draw_disturbance(model, rng)
        disturbed = map_.apply(q) + xi
        _, j = index.nearest(disturbed)
        target = region.index_to_point(j)
        u = _fit_control(disturbed, target)
        un = _norm_of(u, model.norm)
        if not un <= bound:
            raise RuntimeError(
                f"control norm {un} exceeds bound {safe_set.u0} at step {n} "
                "(internal inconsistency)")
        disturbances[n] = xi
        controls[n] = u
        control_norms[n] = un
        q = target
        states[n + 1] = q
    return ControlledOrbit(region, states, disturbances, controls,
                           control_norms, None, seed, safe_set.u0)


def run_uncontrolled(map_: MapSystem, region: GridRegion,
                     model: DisturbanceModel, q_start, max_steps: int,
                     seed: int) -> ControlledOrbit:
    """Simulate with u = 0 until escape from Q or max_steps."""
    rng = np.random.default_rng(seed)
    d = region.dimension
    q = np.atleast_1d(np.asarray(q_start, dtype=np.float64))
    states = [q]
    disturbances = []
    escaped_at = 0 if region.escapes(q) else None
    if escaped_at is None:
        for n in range(max_steps):
            xi = draw_disturbance(model, rng)
            q = (map_.apply(q) + xi) + np.zeros(d)
            states.append(q)
            disturbances.append(xi)
            if region.escapes(q):
                escaped_at = n + 1
                break
    n = len(disturbances)
    return ControlledOrbit(region, np.array(states).reshape(n + 1, d),
                           np.array(disturbances).reshape(n, d),
                           np.zeros((n, d)), np.zeros(n), escaped_at, seed)


def escape_census(map_: MapSystem, region: GridRegion,
                  model: DisturbanceModel, n_runs: int, max_steps: int,
                  seed0: int = 0) -> np.ndarray:
    """Escape times of n_runs uncontrolled orbits from random starts.

    Runs are independent, one generator per run (seed0 + k); start points are
    uniform in Q.  Returns escaped_at per run, -1 where the orbit survived.
    """
    out = np.empty(n_runs, dtype=np.int64)
    span = region.upper - region.lower
    for k in range(n_runs):
        start_rng = np.random.default_rng(np.random.SeedSequence([seed0, k]))
        q0 = region.lower + span * start_rng.uniform(size=region.dimension)
        orb = run_uncontrolled(map_, region, model, q0, max_steps, seed0 + k)
        out[k] = -1 if orb.escaped_at is None else orb.escaped_at
    return out
