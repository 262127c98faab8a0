"""Numba kernels for the safety-function solver and nearest-member queries.

All kernels implement the same value semantics: the inner minimization
min_j max(dist(p, q_j), U[j]) is computed exactly, and every distance goes
through one fixed arithmetic pipeline (difference, square, left-to-right sum,
sqrt for the euclidean norm; absolute differences and max for chebyshev).
Pruning bounds are pushed through the identical pipeline, which makes them
monotone against true cell distances in floating point, so no branch can
discard a cell whose value would have been smaller than the running best.
Results are therefore bit-identical to an exhaustive scan regardless of
traversal order or thread count.

The search structure is a block-min pyramid: level 0 is the value grid, each
higher level halves the resolution and stores 2x2 (2 in 1D) block minima.
A branch-and-bound descent prunes blocks by max(distance-to-block-box,
block-min).  Never enable fastmath here: bit-exactness of the selection
semantics is what makes the fixed-point test reach exact equality.

norm codes: 0 = euclidean, 1 = chebyshev.
"""

import numpy as np
from numba import njit, prange

_BLOCK = 256  # grid points per parallel work unit


# --- shared distance pipeline ------------------------------------------------

@njit(cache=True, inline="always")
def _dist_2d(dx, dy, norm_code):
    if norm_code == 0:
        return np.sqrt(dx * dx + dy * dy)
    adx = dx if dx >= 0.0 else -dx
    ady = dy if dy >= 0.0 else -dy
    return adx if adx > ady else ady


@njit(cache=True, inline="always")
def _axis_gap(p, lo, hi):
    """Clamped axis distance from p to the interval [lo, hi]."""
    if p < lo:
        return lo - p
    if p > hi:
        return p - hi
    return 0.0


# =============================================================================
# 2D kernels
# =============================================================================

@njit(cache=True, inline="always")
def _node_bound_2d(px, py, ax, ay, buf, offs, dims, lev, bx, by, norm_code):
    """Lower bound of max(dist, U) over the node's cells; inf for padding."""
    nx = dims[0, 0]
    ny = dims[0, 1]
    span = 1 << lev
    x0 = bx * span
    y0 = by * span
    if x0 >= nx or y0 >= ny:
        return np.inf
    x1 = x0 + span - 1
    if x1 >= nx:
        x1 = nx - 1
    y1 = y0 + span - 1
    if y1 >= ny:
        y1 = ny - 1
    mu = buf[offs[lev] + bx * dims[lev, 1] + by]
    d = _dist_2d(_axis_gap(px, ax[x0], ax[x1]), _axis_gap(py, ay[y0], ay[y1]),
                 norm_code)
    return d if d > mu else mu


@njit(cache=True)
def _query_min_2d(px, py, ax, ay, U2, buf, offs, dims, norm_code, best, stack):
    """Exact min_j max(dist(p, q_j), U[j]), never above the seed best."""
    nlev = dims.shape[0]
    nx = dims[0, 0]
    ny = dims[0, 1]
    top = 0
    L = nlev - 1
    for bx in range(dims[L, 0]):
        for by in range(dims[L, 1]):
            stack[top, 0] = L
            stack[top, 1] = bx
            stack[top, 2] = by
            top += 1
    while top > 0:
        top -= 1
        lev = stack[top, 0]
        bx = stack[top, 1]
        by = stack[top, 2]
        span = 1 << lev
        x0 = bx * span
        y0 = by * span
        if x0 >= nx or y0 >= ny:
            continue
        mu = buf[offs[lev] + bx * dims[lev, 1] + by]
        if mu >= best:
            continue
        x1 = x0 + span - 1
        if x1 >= nx:
            x1 = nx - 1
        y1 = y0 + span - 1
        if y1 >= ny:
            y1 = ny - 1
        dbox = _dist_2d(_axis_gap(px, ax[x0], ax[x1]),
                        _axis_gap(py, ay[y0], ay[y1]), norm_code)
        lb = dbox if dbox > mu else mu
        if lb >= best:
            continue
        if lev <= 1:
            for cx in range(x0, x1 + 1):
                dx = px - ax[cx]
                for cy in range(y0, y1 + 1):
                    u = U2[cx, cy]
                    if u >= best:
                        continue
                    d = _dist_2d(dx, py - ay[cy], norm_code)
                    v = d if d > u else u
                    if v < best:
                        best = v
        else:
            clev = lev - 1
            b0 = _node_bound_2d(px, py, ax, ay, buf, offs, dims, clev,
                                2 * bx, 2 * by, norm_code)
            b1 = _node_bound_2d(px, py, ax, ay, buf, offs, dims, clev,
                                2 * bx, 2 * by + 1, norm_code)
            b2 = _node_bound_2d(px, py, ax, ay, buf, offs, dims, clev,
                                2 * bx + 1, 2 * by, norm_code)
            b3 = _node_bound_2d(px, py, ax, ay, buf, offs, dims, clev,
                                2 * bx + 1, 2 * by + 1, norm_code)
            # push children worst-first so the most promising pops first
            for _rep in range(4):
                wi = -1
                wb = -1.0
                if b0 > wb:
                    wb = b0
                    wi = 0
                if b1 > wb:
                    wb = b1
                    wi = 1
                if b2 > wb:
                    wb = b2
                    wi = 2
                if b3 > wb:
                    wb = b3
                    wi = 3
                if wi == 0:
                    b0 = -1.0
                elif wi == 1:
                    b1 = -1.0
                elif wi == 2:
                    b2 = -1.0
                else:
                    b3 = -1.0
                if wb == np.inf or wb >= best or wb < 0.0:
                    continue
                stack[top, 0] = clev
                stack[top, 1] = 2 * bx + (1 if wi >= 2 else 0)
                stack[top, 2] = 2 * by + (wi & 1)
                top += 1
    return best


@njit(cache=True)
def _query_argmin_2d(px, py, ax, ay, U2, buf, offs, dims, norm_code,
                     best, bjx, bjy, stack):
    """Like _query_min_2d but also returns one attaining cell (first found)."""
    nlev = dims.shape[0]
    nx = dims[0, 0]
    ny = dims[0, 1]
    top = 0
    L = nlev - 1
    for bx in range(dims[L, 0]):
        for by in range(dims[L, 1]):
            stack[top, 0] = L
            stack[top, 1] = bx
            stack[top, 2] = by
            top += 1
    while top > 0:
        top -= 1
        lev = stack[top, 0]
        bx = stack[top, 1]
        by = stack[top, 2]
        span = 1 << lev
        x0 = bx * span
        y0 = by * span
        if x0 >= nx or y0 >= ny:
            continue
        mu = buf[offs[lev] + bx * dims[lev, 1] + by]
        if mu >= best:
            continue
        x1 = x0 + span - 1
        if x1 >= nx:
            x1 = nx - 1
        y1 = y0 + span - 1
        if y1 >= ny:
            y1 = ny - 1
        dbox = _dist_2d(_axis_gap(px, ax[x0], ax[x1]),
                        _axis_gap(py, ay[y0], ay[y1]), norm_code)
        lb = dbox if dbox > mu else mu
        if lb >= best:
            continue
        if lev <= 1:
            for cx in range(x0, x1 + 1):
                dx = px - ax[cx]
                for cy in range(y0, y1 + 1):
                    u = U2[cx, cy]
                    if u >= best:
                        continue
                    d = _dist_2d(dx, py - ay[cy], norm_code)
                    v = d if d > u else u
                    if v < best:
                        best = v
                        bjx = cx
                        bjy = cy
        else:
            clev = lev - 1
            b0 = _node_bound_2d(px, py, ax, ay, buf, offs, dims, clev,
                                2 * bx, 2 * by, norm_code)
            b1 = _node_bound_2d(px, py, ax, ay, buf, offs, dims, clev,
                                2 * bx, 2 * by + 1, norm_code)
            b2 = _node_bound_2d(px, py, ax, ay, buf, offs, dims, clev,
                                2 * bx + 1, 2 * by, norm_code)
            b3 = _node_bound_2d(px, py, ax, ay, buf, offs, dims, clev,
                                2 * bx + 1, 2 * by + 1, norm_code)
            for _rep in range(4):
                wi = -1
                wb = -1.0
                if b0 > wb:
                    wb = b0
                    wi = 0
                if b1 > wb:
                    wb = b1
                    wi = 1
                if b2 > wb:
                    wb = b2
                    wi = 2
                if b3 > wb:
                    wb = b3
                    wi = 3
                if wi == 0:
                    b0 = -1.0
                elif wi == 1:
                    b1 = -1.0
                elif wi == 2:
                    b2 = -1.0
                else:
                    b3 = -1.0
                if wb == np.inf or wb >= best or wb < 0.0:
                    continue
                stack[top, 0] = clev
                stack[top, 1] = 2 * bx + (1 if wi >= 2 else 0)
                stack[top, 2] = 2 * by + (wi & 1)
                top += 1
    return best, bjx, bjy


@njit(cache=True, inline="always")
def _site_val_2d(px, py, ax, ay, U2, wx, wy, norm_code):
    u = U2[wx, wy]
    d = _dist_2d(px - ax[wx], py - ay[wy], norm_code)
    return d if d > u else u


@njit(cache=True, parallel=True)
def ext_field_2d(ax, ay, ax_e, ay_e, U2, buf, offs, dims, norm_code,
                 ptr_x, ptr_y, G_prev, G_out, px_out, py_out):
    """Exact inner-min value and an attaining cell at every extended cell.

    Rows are independent; inside a row the scan runs both directions so each
    cell is seeded by its neighbor's pointer.  G_prev must be a valid lower
    bound of the new value (use -inf when no such bound is known); when a
    seed candidate already matches it, the descent is skipped entirely.
    """
    nxe = ax_e.shape[0]
    nye = ay_e.shape[0]
    nlev = dims.shape[0]
    for cx in prange(nxe):
        stack = np.empty((8 * (nlev + 2) + 8, 3), dtype=np.int64)
        px = ax_e[cx]
        for direction in range(2):
            lx = -1
            ly = -1
            if direction == 0:
                cy = 0
                cend = nye
                step = 1
            else:
                cy = nye - 1
                cend = -1
                step = -1
            while cy != cend:
                py = ay_e[cy]
                best = np.inf
                bx = -1
                by = -1
                wx = ptr_x[cx, cy]
                if wx >= 0:
                    wy = ptr_y[cx, cy]
                    v = _site_val_2d(px, py, ax, ay, U2, wx, wy, norm_code)
                    if v < best:
                        best = v
                        bx = wx
                        by = wy
                if lx >= 0:
                    v = _site_val_2d(px, py, ax, ay, U2, lx, ly, norm_code)
                    if v < best:
                        best = v
                        bx = lx
                        by = ly
                if direction == 1:
                    vb = G_out[cx, cy]  # first pass result
                    if vb <= best:
                        best = vb
                        bx = px_out[cx, cy]
                        by = py_out[cx, cy]
                if best > G_prev[cx, cy]:
                    best, bx, by = _query_argmin_2d(
                        px, py, ax, ay, U2, buf, offs, dims, norm_code,
                        best, bx, by, stack)
                G_out[cx, cy] = best
                px_out[cx, cy] = bx
                py_out[cx, cy] = by
                lx = bx
                ly = by
                cy += step


@njit(cache=True, parallel=True)
def sweep_2d(base, offsets, icell, ix_base, iy_base, ax, ay, U2, U_prev,
             ptr_x, ptr_y, buf, offs, dims, norm_code, U_out):
    """One exact update U_out[i] = max_s min_j max(dist(f_i + xi_s, q_j), U[j]).

    U_prev must be a valid elementwise lower bound of the result; pass -inf
    when the input is not part of a monotone iteration.  Each sample first
    gets a true candidate value from the extended pointer field; only samples
    whose candidate exceeds the running maximum need an exact descent.
    """
    N = base.shape[0]
    M = offsets.shape[0]
    nxe = ptr_x.shape[0]
    nye = ptr_x.shape[1]
    nlev = dims.shape[0]
    nblocks = (N + _BLOCK - 1) // _BLOCK
    for blk in prange(nblocks):
        stack = np.empty((8 * (nlev + 2) + 8, 3), dtype=np.int64)
        ubs = np.empty(M)
        i0 = blk * _BLOCK
        i1 = min(i0 + _BLOCK, N)
        for i in range(i0, i1):
            bxv = base[i, 0]
            byv = base[i, 1]
            ix0 = ix_base[i]
            iy0 = iy_base[i]
            cur = U_prev[i]
            smax = 0
            ubmax = -np.inf
            for s in range(M):
                jx = ix0 + icell[s, 0]
                if jx < 0:
                    jx = 0
                elif jx >= nxe:
                    jx = nxe - 1
                jy = iy0 + icell[s, 1]
                if jy < 0:
                    jy = 0
                elif jy >= nye:
                    jy = nye - 1
                ub = _site_val_2d(bxv + offsets[s, 0], byv + offsets[s, 1],
                                  ax, ay, U2, ptr_x[jx, jy], ptr_y[jx, jy],
                                  norm_code)
                ubs[s] = ub
                if ub > ubmax:
                    ubmax = ub
                    smax = s
            if ubmax > cur:
                v = _query_min_2d(bxv + offsets[smax, 0], byv + offsets[smax, 1],
                                  ax, ay, U2, buf, offs, dims, norm_code,
                                  ubs[smax], stack)
                if v > cur:
                    cur = v
                for s in range(M):
                    if s == smax or ubs[s] <= cur:
                        continue
                    v = _query_min_2d(bxv + offsets[s, 0], byv + offsets[s, 1],
                                      ax, ay, U2, buf, offs, dims, norm_code,
                                      ubs[s], stack)
                    if v > cur:
                        cur = v
            U_out[i] = cur


@njit(cache=True)
def nearest_member_2d(px, py, ax, ay, W2, buf, offs, dims, norm_code):
    """Nearest member cell (W == 0) with lowest flat index on exact ties.

    Returns (distance, flat index); (inf, -1) when the mask is empty.
    Exact-tie candidates are all visited because pruning is strict.
    """
    nlev = dims.shape[0]
    nx = dims[0, 0]
    ny = dims[0, 1]
    stack = np.empty((8 * (nlev + 2) + 8, 3), dtype=np.int64)
    best = np.inf
    bidx = np.int64(-1)
    top = 0
    L = nlev - 1
    for bx in range(dims[L, 0]):
        for by in range(dims[L, 1]):
            stack[top, 0] = L
            stack[top, 1] = bx
            stack[top, 2] = by
            top += 1
    while top > 0:
        top -= 1
        lev = stack[top, 0]
        bx = stack[top, 1]
        by = stack[top, 2]
        span = 1 << lev
        x0 = bx * span
        y0 = by * span
        if x0 >= nx or y0 >= ny:
            continue
        if buf[offs[lev] + bx * dims[lev, 1] + by] > 0.0:
            continue  # no members in this block
        x1 = x0 + span - 1
        if x1 >= nx:
            x1 = nx - 1
        y1 = y0 + span - 1
        if y1 >= ny:
            y1 = ny - 1
        dbox = _dist_2d(_axis_gap(px, ax[x0], ax[x1]),
                        _axis_gap(py, ay[y0], ay[y1]), norm_code)
        if dbox > best:
            continue
        if lev <= 1:
            for cx in range(x0, x1 + 1):
                dx = px - ax[cx]
                for cy in range(y0, y1 + 1):
                    if W2[cx, cy] > 0.0:
                        continue
                    d = _dist_2d(dx, py - ay[cy], norm_code)
                    j = np.int64(cx) * ny + cy
                    if d < best or (d == best and j < bidx):
                        best = d
                        bidx = j
        else:
            for cx in range(2):
                for cy in range(2):
                    stack[top, 0] = lev - 1
                    stack[top, 1] = 2 * bx + cx
                    stack[top, 2] = 2 * by + cy
                    top += 1
    return best, bidx


@njit(cache=True, parallel=True)
def sculpt_round_2d(base, offsets, ax, ay, W2, buf, offs, dims, norm_code,
                    alive, thresh, removed):
    """Mark alive cells that some disturbance sample leaves unrecapturable.

    A cell survives the round iff for every sample there is an alive cell
    within thresh of the disturbed image.  Removals are recorded in `removed`
    and applied by the caller between rounds.
    """
    N = base.shape[0]
    M = offsets.shape[0]
    nblocks = (N + _BLOCK - 1) // _BLOCK
    for blk in prange(nblocks):
        i0 = blk * _BLOCK
        i1 = min(i0 + _BLOCK, N)
        for i in range(i0, i1):
            removed[i] = False
            if not alive[i]:
                continue
            for s in range(M):
                d, j = nearest_member_2d(base[i, 0] + offsets[s, 0],
                                         base[i, 1] + offsets[s, 1],
                                         ax, ay, W2, buf, offs, dims,
                                         norm_code)
                if not d <= thresh:
                    removed[i] = True
                    break


# =============================================================================
# 1D kernels
# =============================================================================

@njit(cache=True, inline="always")
def _dist_1d(dx):
    return dx if dx >= 0.0 else -dx


@njit(cache=True, inline="always")
def _node_bound_1d(px, ax, buf, offs, dims, lev, bx):
    nx = dims[0]
    span = 1 << lev
    x0 = bx * span
    if x0 >= nx:
        return np.inf
    x1 = x0 + span - 1
    if x1 >= nx:
        x1 = nx - 1
    mu = buf[offs[lev] + bx]
    d = _axis_gap(px, ax[x0], ax[x1])
    return d if d > mu else mu


@njit(cache=True)
def _query_min_1d(px, ax, U, buf, offs, dims, best, stack):
    nlev = dims.shape[0]
    nx = dims[0]
    top = 0
    L = nlev - 1
    for bx in range(dims[L]):
        stack[top, 0] = L
        stack[top, 1] = bx
        top += 1
    while top > 0:
        top -= 1
        lev = stack[top, 0]
        bx = stack[top, 1]
        span = 1 << lev
        x0 = bx * span
        if x0 >= nx:
            continue
        mu = buf[offs[lev] + bx]
        if mu >= best:
            continue
        x1 = x0 + span - 1
        if x1 >= nx:
            x1 = nx - 1
        d = _axis_gap(px, ax[x0], ax[x1])
        lb = d if d > mu else mu
        if lb >= best:
            continue
        if lev <= 2:
            for cx in range(x0, x1 + 1):
                u = U[cx]
                if u >= best:
                    continue
                dd = _dist_1d(px - ax[cx])
                v = dd if dd > u else u
                if v < best:
                    best = v
        else:
            clev = lev - 1
            b0 = _node_bound_1d(px, ax, buf, offs, dims, clev, 2 * bx)
            b1 = _node_bound_1d(px, ax, buf, offs, dims, clev, 2 * bx + 1)
            if b0 >= b1:
                if b0 < best and b0 != np.inf:
                    stack[top, 0] = clev
                    stack[top, 1] = 2 * bx
                    top += 1
                if b1 < best and b1 != np.inf:
                    stack[top, 0] = clev
                    stack[top, 1] = 2 * bx + 1
                    top += 1
            else:
                if b1 < best and b1 != np.inf:
                    stack[top, 0] = clev
                    stack[top, 1] = 2 * bx + 1
                    top += 1
                if b0 < best and b0 != np.inf:
                    stack[top, 0] = clev
                    stack[top, 1] = 2 * bx
                    top += 1
    return best


@njit(cache=True)
def _query_argmin_1d(px, ax, U, buf, offs, dims, best, bj, stack):
    nlev = dims.shape[0]
    nx = dims[0]
    top = 0
    L = nlev - 1
    for bx in range(dims[L]):
        stack[top, 0] = L
        stack[top, 1] = bx
        top += 1
    while top > 0:
        top -= 1
        lev = stack[top, 0]
        bx = stack[top, 1]
        span = 1 << lev
        x0 = bx * span
        if x0 >= nx:
            continue
        mu = buf[offs[lev] + bx]
        if mu >= best:
            continue
        x1 = x0 + span - 1
        if x1 >= nx:
            x1 = nx - 1
        d = _axis_gap(px, ax[x0], ax[x1])
        lb = d if d > mu else mu
        if lb >= best:
            continue
        if lev <= 2:
            for cx in range(x0, x1 + 1):
                u = U[cx]
                if u >= best:
                    continue
                dd = _dist_1d(px - ax[cx])
                v = dd if dd > u else u
                if v < best:
                    best = v
                    bj = cx
        else:
            clev = lev - 1
            b0 = _node_bound_1d(px, ax, buf, offs, dims, clev, 2 * bx)
            b1 = _node_bound_1d(px, ax, buf, offs, dims, clev, 2 * bx + 1)
            if b0 >= b1:
                if b0 < best and b0 != np.inf:
                    stack[top, 0] = clev
                    stack[top, 1] = 2 * bx
                    top += 1
                if b1 < best and b1 != np.inf:
                    stack[top, 0] = clev
                    stack[top, 1] = 2 * bx + 1
                    top += 1
            else:
                if b1 < best and b1 != np.inf:
                    stack[top, 0] = clev
                    stack[top, 1] = 2 * bx + 1
                    top += 1
                if b0 < best and b0 != np.inf:
                    stack[top, 0] = clev
                    stack[top, 1] = 2 * bx
                    top += 1
    return best, bj


@njit(cache=True, inline="always")
def _site_val_1d(px, ax, U, w):
    u = U[w]
    d = _dist_1d(px - ax[w])
    return d if d > u else u


@njit(cache=True)
def ext_field_1d(ax, ax_e, U, buf, offs, dims, ptr, G_prev, G_out, p_out):
    nxe = ax_e.shape[0]
    nlev = dims.shape[0]
    stack = np.empty((2 * (nlev + 2) + 4, 2), dtype=np.int64)
    for direction in range(2):
        last = -1
        if direction == 0:
            cx = 0
            cend = nxe
            step = 1
        else:
            cx = nxe - 1
            cend = -1
            step = -1
        while cx != cend:
            px = ax_e[cx]
            best = np.inf
            bj = -1
            w = ptr[cx]
            if w >= 0:
                v = _site_val_1d(px, ax, U, w)
                if v < best:
                    best = v
                    bj = w
            if last >= 0:
                v = _site_val_1d(px, ax, U, last)
                if v < best:
                    best = v
                    bj = last
            if direction == 1:
                vb = G_out[cx]
                if vb <= best:
                    best = vb
                    bj = p_out[cx]
            if best > G_prev[cx]:
                best, bj = _query_argmin_1d(px, ax, U, buf, offs, dims,
                                            best, bj, stack)
            G_out[cx] = best
            p_out[cx] = bj
            last = bj
            cx += step


@njit(cache=True, parallel=True)
def sweep_1d(base, offsets, icell, ix_base, ax, U, U_prev, ptr,
             buf, offs, dims, U_out):
    N = base.shape[0]
    M = offsets.shape[0]
    nxe = ptr.shape[0]
    nlev = dims.shape[0]
    nblocks = (N + _BLOCK - 1) // _BLOCK
    for blk in prange(nblocks):
        stack = np.empty((2 * (nlev + 2) + 4, 2), dtype=np.int64)
        ubs = np.empty(M)
        i0 = blk * _BLOCK
        i1 = min(i0 + _BLOCK, N)
        for i in range(i0, i1):
            bxv = base[i, 0]
            ix0 = ix_base[i]
            cur = U_prev[i]
            smax = 0
            ubmax = -np.inf
            for s in range(M):
                jx = ix0 + icell[s, 0]
                if jx < 0:
                    jx = 0
                elif jx >= nxe:
                    jx = nxe - 1
                ub = _site_val_1d(bxv + offsets[s, 0], ax, U, ptr[jx])
                ubs[s] = ub
                if ub > ubmax:
                    ubmax = ub
                    smax = s
            if ubmax > cur:
                v = _query_min_1d(bxv + offsets[smax, 0], ax, U,
                                  buf, offs, dims, ubs[smax], stack)
                if v > cur:
                    cur = v
                for s in range(M):
                    if s == smax or ubs[s] <= cur:
                        continue
                    v = _query_min_1d(bxv + offsets[s, 0], ax, U,
                                      buf, offs, dims, ubs[s], stack)
                    if v > cur:
                        cur = v
            U_out[i] = cur


@njit(cache=True)
def nearest_member_1d(px, ax, W, buf, offs, dims):
    """Nearest member cell (W == 0), lowest index on exact ties."""
    nlev = dims.shape[0]
    nx = dims[0]
    stack = np.empty((2 * (nlev + 2) + 4, 2), dtype=np.int64)
    best = np.inf
    bidx = np.int64(-1)
    top = 0
    L = nlev - 1
    for bx in range(dims[L]):
        stack[top, 0] = L
        stack[top, 1] = bx
        top += 1
    while top > 0:
        top -= 1
        lev = stack[top, 0]
        bx = stack[top, 1]
        span = 1 << lev
        x0 = bx * span
        if x0 >= nx:
            continue
        if buf[offs[lev] + bx] > 0.0:
            continue
        x1 = x0 + span - 1
        if x1 >= nx:
            x1 = nx - 1
        d = _axis_gap(px, ax[x0], ax[x1])
        if d > best:
            continue
        if lev <= 2:
            for cx in range(x0, x1 + 1):
                if W[cx] > 0.0:
                    continue
                dd = _dist_1d(px - ax[cx])
                j = np.int64(cx)
                if dd < best or (dd == best and j < bidx):
                    best = dd
                    bidx = j
        else:
            stack[top, 0] = lev - 1
            stack[top, 1] = 2 * bx
            top += 1
            stack[top, 0] = lev - 1
            stack[top, 1] = 2 * bx + 1
            top += 1
    return best, bidx


@njit(cache=True, parallel=True)
def sculpt_round_1d(base, offsets, ax, W, buf, offs, dims, alive, thresh,
                    removed):
    N = base.shape[0]
    M = offsets.shape[0]
    nblocks = (N + _BLOCK - 1) // _BLOCK
    for blk in prange(nblocks):
        i0 = blk * _BLOCK
        i1 = min(i0 + _BLOCK, N)
        for i in range(i0, i1):
            removed[i] = False
            if not alive[i]:
                continue
            for s in range(M):
                d, j = nearest_member_1d(base[i, 0] + offsets[s, 0],
                                         ax, W, buf, offs, dims)
                if not d <= thresh:
                    removed[i] = True
                    break
