#!/usr/bin/env python3
"""Generate the bundled dei-analog scenario.

Regenerates src/evacsim/data/dei-analog.scn from the layout constants below
and aborts if the geometry stops matching the declared calibration path
lengths (P1 24 m, P2 31 m, P3 72 m at 0.5 m cells). Run from the repo root:

    python3 tools/make_dei_analog.py
"""

from collections import deque
from pathlib import Path

H, W = 21, 98
CELL_SIZE = 0.5

OFFICES = [  # (id, c0, c1, door_col) on rows 1-3, doors on row 4
    ("r101", 6, 16, 11),
    ("r102", 18, 28, 23),
    ("r103", 30, 40, 35),
    ("r104", 42, 50, 46),
    ("lab", 52, 64, 58),
    ("r105", 66, 76, 71),
    ("r106", 78, 88, 83),
    ("r107", 90, 95, 92),
]
GROUND_ROOMS = [  # (id, c0, c1, door_col) on rows 18-19, doors on row 17
    ("g01", 6, 20, 13),
    ("g02", 24, 38, 31),
    ("g03", 42, 56, 49),
    ("g04", 60, 74, 67),
    ("g05", 78, 92, 85),
]
CORRIDOR1_ROWS = (5, 6)     # first floor, cols 6..95
CORRIDOR0_ROW = 16          # ground floor, cols 3..95
EM_SHAFT_COL, EM_STAIR_ROWS, EM_EXIT = 6, range(7, 12), (12, 6)
MAIN_SHAFT_COL, MAIN_STAIR_ROWS, MAIN_EXIT = 95, range(7, 16), (16, 2)
SPAWN_LAB = [(r, c) for r in (1, 2, 3) for c in range(54, 61)]
SPAWN_OFFICES = (
    [(2, c) for c in (8, 9, 10)]
    + [(2, c) for c in (20, 21, 22)]
    + [(2, c) for c in (32, 33, 34)]
    + [(2, c) for c in (44, 45)]
    + [(2, c) for c in (68, 69, 70)]
    + [(2, c) for c in (80, 81, 82)]
)
DEFAULT_SPAWN = (2, 58)
SIGNS = [
    ((5, 10), "em"),
    ((5, 35), "em"),
    ((5, 57), "em"),
    ((6, 70), "em"),
    ((16, 50), "main"),
    ((16, 88), "main"),
]
PATHS = [
    ("P1", (5, 20), (5, 68), 24.0, 17.53),
    ("P2", (2, 58), (12, 6), 31.0, 21.50),
    ("P3", (2, 58), (16, 2), 72.0, 55.91),
]


def build_grid():
    g = [["#"] * W for _ in range(H)]
    for rid, c0, c1, door in OFFICES:
        for r in (1, 2, 3):
            for c in range(c0, c1 + 1):
                g[r][c] = "."
        g[4][door] = "D"
    for r in CORRIDOR1_ROWS:
        for c in range(6, 96):
            g[r][c] = "."
    for r in EM_STAIR_ROWS:
        g[r][EM_SHAFT_COL] = "S"
    g[EM_EXIT[0]][EM_EXIT[1]] = "E"
    for r in MAIN_STAIR_ROWS:
        g[r][MAIN_SHAFT_COL] = "S"
    for c in range(3, 96):
        g[CORRIDOR0_ROW][c] = "."
    g[MAIN_EXIT[0]][MAIN_EXIT[1]] = "E"
    for rid, c0, c1, door in GROUND_ROOMS:
        for r in (18, 19):
            for c in range(c0, c1 + 1):
                g[r][c] = "."
        g[17][door] = "D"
    for cell in SPAWN_LAB + SPAWN_OFFICES:
        g[cell[0]][cell[1]] = "@"
    return g


def bfs_steps(g, src, dst):
    passable = {".", "D", "S", "E", "@"}
    dist = {src: 0}
    q = deque([src])
    while q:
        r, c = q.popleft()
        if (r, c) == dst:
            return dist[(r, c)]
        for nr, nc in ((r - 1, c), (r, c - 1), (r + 1, c), (r, c + 1)):
            if 0 <= nr < H and 0 <= nc < W and g[nr][nc] in passable and (nr, nc) not in dist:
                dist[(nr, nc)] = dist[(r, c)] + 1
                q.append((nr, nc))
    return None


def entry_route_cells():
    cells = [(16, c) for c in range(2, 96)]
    cells += [(r, 95) for r in range(15, 6, -1)]
    cells += [(6, c) for c in range(95, 57, -1)]
    cells += [(5, 58), (4, 58), (3, 58), (2, 58)]
    return cells


def main():
    g = build_grid()
    route = entry_route_cells()
    for a, b in zip(route, route[1:]):
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1, f"entry route break at {a}->{b}"
    assert route[0] == MAIN_EXIT and route[-1] == DEFAULT_SPAWN
    assert len(route) - 1 == 144, len(route) - 1

    for pid, frm, to, length, _ in PATHS:
        steps = bfs_steps(g, frm, to)
        want = round(length / CELL_SIZE)
        assert steps == want, f"{pid}: measured {steps} steps, want {want}"
        print(f"{pid}: {steps} steps = {steps * CELL_SIZE} m  OK")

    em_steps = bfs_steps(g, DEFAULT_SPAWN, EM_EXIT)
    main_steps = bfs_steps(g, DEFAULT_SPAWN, MAIN_EXIT)
    assert em_steps == 62 and main_steps == 144
    print(f"default spawn: em exit {em_steps} steps, main exit {main_steps} steps")

    lines = ["# Synthetic two-exit, two-storey office building (flattened).",
             "# Upper band: first-floor rooms and corridor; lower band: ground",
             "# corridor with the main entrance. Stair shafts join the bands.",
             "name: dei-analog",
             f"cell_size: {CELL_SIZE}",
             "",
             "grid:"]
    lines += ["".join(row) for row in g]
    lines.append("")
    for rid, c0, c1, _ in OFFICES:
        lines.append(f"room {rid} ignitable=false rect=1,{c0},3,{c1}")
    for rid, c0, c1, _ in GROUND_ROOMS:
        lines.append(f"room {rid} ignitable=true rect=18,{c0},19,{c1}")
    lines.append(f"exit em kind=emergency cells={EM_EXIT[0]},{EM_EXIT[1]}")
    lines.append(f"exit main kind=main cells={MAIN_EXIT[0]},{MAIN_EXIT[1]}")
    for (r, c), to in SIGNS:
        lines.append(f"sign at={r},{c} to={to}")
    lines.append(
        "entry_route cells=16,2..16,95;15,95..7,95;6,95..6,58;5,58;4,58..2,58"
    )
    for pid, frm, to, length, rt in PATHS:
        lines.append(
            f"path {pid} from={frm[0]},{frm[1]} to={to[0]},{to[1]} length={length} real_time={rt}"
        )
    out = Path(__file__).resolve().parents[1] / "src" / "evacsim" / "data" / "dei-analog.scn"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
