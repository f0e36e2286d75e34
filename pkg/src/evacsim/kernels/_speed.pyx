# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid kernels. Mirrors evacsim.kernels.pure operation for
operation; both backends must return bit-identical results."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

STATUS_IDLE = 0
STATUS_EVACUATING = 1
STATUS_ESCAPED = 2
STATUS_TRAPPED = 3

cdef int[4] _DR = [-1, 0, 1, 0]
cdef int[4] _DC = [0, -1, 0, 1]


def dist_field(const cnp.uint8_t[:, :] passable, int src_r, int src_c):
    """Breadth-first step distance from (src_r, src_c); -1 = unreachable."""
    cdef int h = passable.shape[0]
    cdef int w = passable.shape[1]
    dist_arr = np.full((h, w), -1, dtype=np.int32)
    cdef cnp.int32_t[:, :] dist = dist_arr
    if src_r < 0 or src_r >= h or src_c < 0 or src_c >= w or not passable[src_r, src_c]:
        return dist_arr
    queue_arr = np.empty(h * w, dtype=np.int32)
    cdef cnp.int32_t[:] queue = queue_arr
    cdef int head = 0, tail = 0, cur, r, c, nr, nc, k, d
    dist[src_r, src_c] = 0
    queue[tail] = src_r * w + src_c
    tail += 1
    while head < tail:
        cur = queue[head]
        head += 1
        r = cur // w
        c = cur % w
        d = dist[r, c] + 1
        for k in range(4):
            nr = r + _DR[k]
            nc = c + _DC[k]
            if 0 <= nr < h and 0 <= nc < w and passable[nr, nc] and dist[nr, nc] < 0:
                dist[nr, nc] = d
                queue[tail] = nr * w + nc
                tail += 1
    return dist_arr


def greedy_path(const cnp.int32_t[:, :] dist, int start_r, int start_c):
    """Descend the field from (start_r, start_c), preferring up, left,
    down, right at each step. None when unreachable."""
    cdef int h = dist.shape[0]
    cdef int w = dist.shape[1]
    if start_r < 0 or start_r >= h or start_c < 0 or start_c >= w:
        return None
    cdef int d = dist[start_r, start_c]
    if d < 0:
        return None
    cells_arr = np.empty((d + 1, 2), dtype=np.int32)
    cdef cnp.int32_t[:, :] cells = cells_arr
    cdef int r = start_r, c = start_c, i, k, nr, nc, want
    cdef bint found
    cells[0, 0] = r
    cells[0, 1] = c
    for i in range(1, d + 1):
        want = d - i
        found = False
        for k in range(4):
            nr = r + _DR[k]
            nc = c + _DC[k]
            if 0 <= nr < h and 0 <= nc < w and dist[nr, nc] == want:
                r = nr
                c = nc
                found = True
                break
        if not found:
            raise AssertionError("inconsistent distance field")
        cells[i, 0] = r
        cells[i, 1] = c
    return cells_arr


def fire_front(const cnp.uint8_t[:, :] burning, const cnp.uint8_t[:, :] passable):
    """Passable, not-yet-burning cells 4-adjacent to a burning cell, in
    row-major order."""
    cdef int h = burning.shape[0]
    cdef int w = burning.shape[1]
    out_arr = np.empty((h * w, 2), dtype=np.int32)
    cdef cnp.int32_t[:, :] out = out_arr
    cdef int n = 0, r, c
    for r in range(h):
        for c in range(w):
            if burning[r, c] or not passable[r, c]:
                continue
            if (
                (r > 0 and burning[r - 1, c])
                or (c > 0 and burning[r, c - 1])
                or (r + 1 < h and burning[r + 1, c])
                or (c + 1 < w and burning[r, c + 1])
            ):
                out[n, 0] = r
                out[n, 1] = c
                n += 1
    return out_arr[:n].copy()


def advance_agents(
    const cnp.int32_t[:] route_cells,
    const cnp.int32_t[:] route_offs,
    cnp.int32_t[:] pos,
    cnp.float64_t[:] progress,
    const cnp.float64_t[:] speed,
    const cnp.float64_t[:] stair_factor,
    cnp.uint8_t[:] status,
    cnp.int32_t[:] occupancy,
    const cnp.uint8_t[:] stair_mask,
    const cnp.uint8_t[:] exit_mask,
    const cnp.uint8_t[:] burning_mask,
    double cell_size,
    double dt,
):
    """Advance every evacuating agent by one tick, ascending index order.
    Same stepping, blocking and escape rules as the pure backend."""
    cdef int n = pos.shape[0]
    cdef int i, off, last, p, cur, nxt
    cdef double prog, left, eff, tneed
    for i in range(n):
        if status[i] != 1:
            continue
        off = route_offs[i]
        last = route_offs[i + 1] - off - 1
        p = pos[i]
        cur = route_cells[off + p]
        prog = progress[i]
        left = dt
        while left > 1e-12 and p < last:
            nxt = route_cells[off + p + 1]
            eff = speed[i] * (stair_factor[i] if stair_mask[nxt] else 1.0)
            tneed = (cell_size - prog) / eff
            if tneed <= left + 1e-12:
                if occupancy[nxt] != -1 or burning_mask[nxt]:
                    prog = cell_size  # wait at the boundary until the way clears
                    break
                left -= tneed
                occupancy[cur] = -1
                p += 1
                prog = 0.0
                cur = nxt
                if exit_mask[nxt]:
                    status[i] = 2
                    break
                occupancy[nxt] = i
            else:
                prog += eff * left
                left = 0.0
        pos[i] = p
        progress[i] = prog
