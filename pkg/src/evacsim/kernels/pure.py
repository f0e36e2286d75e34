"""Pure-Python grid kernels.

This module is the reference implementation of the kernel contract; the
compiled backend (``evacsim.kernels._speed``) mirrors it operation for
operation. Both must produce bit-identical output: same cells in the same
order and the same float arithmetic sequence, so that a simulation run is
reproducible regardless of which backend happens to be importable.

Conventions: coordinates are (row, col); flattened cell ids are
``row * width + col``; all grids are C-contiguous numpy arrays.
"""

from __future__ import annotations

from collections import deque

import numpy as np

STATUS_IDLE = 0
STATUS_EVACUATING = 1
STATUS_ESCAPED = 2
STATUS_TRAPPED = 3

# Fixed step preference for equal-cost choices: up, left, down, right.
STEP_ORDER = ((-1, 0), (0, -1), (1, 0), (0, 1))


def dist_field(passable, src_r, src_c):
    """Breadth-first step distance from (src_r, src_c) over passable cells.

    ``passable`` is uint8 (H, W); nonzero means walkable. Returns an int32
    (H, W) array holding -1 for unreachable cells. If the source itself is
    not passable every cell is unreachable.
    """
    h, w = passable.shape
    dist = np.full((h, w), -1, dtype=np.int32)
    if not (0 <= src_r < h and 0 <= src_c < w) or not passable[src_r, src_c]:
        return dist
    dist[src_r, src_c] = 0
    queue = deque([(src_r, src_c)])
    while queue:
        r, c = queue.popleft()
        d = dist[r, c] + 1
        for dr, dc in STEP_ORDER:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and passable[nr, nc] and dist[nr, nc] < 0:
                dist[nr, nc] = d
                queue.append((nr, nc))
    return dist


def greedy_path(dist, start_r, start_c):
    """Walk from (start_r, start_c) down a distance field to its zero cell.

    At every cell the first direction in (up, left, down, right) whose
    distance is exactly one less is taken, which pins a single deterministic
    route among all equal-cost ones. Returns int32 (n, 2) including both
    endpoints, or None when the start cannot reach the field's source.
    """
    h, w = dist.shape
    if not (0 <= start_r < h and 0 <= start_c < w):
        return None
    d = int(dist[start_r, start_c])
    if d < 0:
        return None
    cells = np.empty((d + 1, 2), dtype=np.int32)
    r, c = start_r, start_c
    cells[0, 0] = r
    cells[0, 1] = c
    for i in range(1, d + 1):
        want = d - i
        for dr, dc in STEP_ORDER:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and dist[nr, nc] == want:
                r, c = nr, nc
                break
        else:  # a well-formed BFS field always has a descending neighbour
            raise AssertionError("inconsistent distance field")
        cells[i, 0] = r
        cells[i, 1] = c
    return cells


def fire_front(burning, passable):
    """Cells ignited by one spread step.

    Returns every passable cell 4-adjacent to a burning cell that is not
    already burning, as int32 (k, 2) in row-major order. Inputs are uint8
    (H, W) masks and are not modified.
    """
    h, w = burning.shape
    out = []
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
                out.append((r, c))
    res = np.empty((len(out), 2), dtype=np.int32)
    for i, (r, c) in enumerate(out):
        res[i, 0] = r
        res[i, 1] = c
    return res


def advance_agents(
    route_cells,
    route_offs,
    pos,
    progress,
    speed,
    stair_factor,
    status,
    occupancy,
    stair_mask,
    exit_mask,
    burning_mask,
    cell_size,
    dt,
):
    """Advance every evacuating agent by one tick, in ascending index order.

    Agent ``i`` owns the flattened cell ids
    ``route_cells[route_offs[i]:route_offs[i + 1]]`` and stands on the cell
    at offset ``pos[i]`` of that slice, with ``progress[i]`` metres already
    covered toward the next cell. A step whose destination is a stair cell
    runs at ``speed * stair_factor``. When a hop's destination is occupied
    or burning, progress saturates at the step boundary and the remainder of
    the tick is forfeited. Entering an exit cell escapes the agent: status
    becomes 2, its cell is freed and it stops consuming route.

    ``occupancy`` is a flat int32 array over the grid (-1 = free, otherwise
    the occupant's index; values >= len(pos) denote external blockers such
    as the player). ``stair_mask``/``exit_mask``/``burning_mask`` are flat
    uint8 arrays. ``pos``, ``progress``, ``status`` and ``occupancy`` are
    mutated in place.
    """
    n = len(pos)
    for i in range(n):
        if status[i] != STATUS_EVACUATING:
            continue
        off = int(route_offs[i])
        last = int(route_offs[i + 1]) - off - 1
        p = int(pos[i])
        cur = int(route_cells[off + p])
        prog = float(progress[i])
        left = float(dt)
        while left > 1e-12 and p < last:
            nxt = int(route_cells[off + p + 1])
            eff = float(speed[i]) * (float(stair_factor[i]) if stair_mask[nxt] else 1.0)
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
                    status[i] = STATUS_ESCAPED
                    break
                occupancy[nxt] = i
            else:
                prog += eff * left
                left = 0.0
        pos[i] = p
        progress[i] = prog
