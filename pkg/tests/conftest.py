"""Shared fixtures. NUMBA_NUM_THREADS must be set before numba loads so the
worker-count determinism test can use up to 4 threads on any machine."""

import os

os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import numpy as np
import pytest

import safemaps as sm


@pytest.fixture(scope="session")
def tent_setup():
    """The tent reference configuration: mu=3, Q=[0,1], 1001 points, xi0=0.05."""
    region = sm.GridRegion([0.0], [1.0], [1001])
    model = sm.build_sample_set(0.05, 1, "euclidean", region.spacing)
    return sm.tent_map(3.0), region, model


@pytest.fixture(scope="session")
def tent_sf(tent_setup):
    map_, region, model = tent_setup
    return sm.compute_safety_function(map_, region, model)


def small_region_1d(n=11, lo=0.0, hi=1.0):
    return sm.GridRegion([lo], [hi], [n])


def small_region_2d(nx=9, ny=9, lo=(-1.0, -1.0), hi=(1.0, 1.0)):
    return sm.GridRegion(list(lo), list(hi), [nx, ny])


def brute_force_inner_min(image, U, region, norm="euclidean"):
    """Independent exhaustive oracle for min_j max(dist(image, q_j), U[j])."""
    pts = region.grid_points()
    diff = image - pts
    if region.dimension == 1:
        d = np.abs(diff[:, 0])
    elif norm == "euclidean":
        d = np.sqrt(diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1])
    else:
        d = np.maximum(np.abs(diff[:, 0]), np.abs(diff[:, 1]))
    return np.minimum.reduce(np.maximum(d, U))


def brute_force_update(U, map_, region, model):
    """Independent exhaustive oracle for one value-iteration update."""
    base = map_.apply_batch(region.grid_points())
    out = np.empty(region.n_points)
    for i in range(region.n_points):
        vals = [brute_force_inner_min(base[i] + xi, U, region, model.norm)
                for xi in model.samples]
        out[i] = max(vals)
    return out


def brute_force_safety(map_, region, model, max_sweeps=500):
    """Independent fixed-point iteration built on the exhaustive oracle."""
    U = np.zeros(region.n_points)
    sweeps = 0
    for _ in range(max_sweeps):
        U_next = brute_force_update(U, map_, region, model)
        sweeps += 1
        if np.array_equal(U_next, U):
            return U, sweeps, True
        U = U_next
    return U, sweeps, False
