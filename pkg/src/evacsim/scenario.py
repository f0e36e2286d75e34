"""Building scenarios: parsing, validation and grid path queries.

A scenario is a line-oriented text document:

    name: <scenario name>
    cell_size: <metres per cell edge>

    grid:
    <one line per row, terminated by an empty line or end of file>

    room <id> ignitable=<true|false> rect=<r0,c0,r1,c1>
    exit <id> kind=<main|emergency> cells=<cell-list>
    sign at=<r,c> to=<exit-id>
    entry_route cells=<cell-list>
    path <id> from=<r,c> to=<r,c> length=<metres> [real_time=<seconds>]

Grid characters: ``.`` floor, ``#`` wall, ``D`` door, ``S`` stair, ``E``
exit cell, ``@`` spawn point (a floor cell), space = void. Rows shorter
than the widest row are padded with void. A cell-list is a ``;``-separated
sequence of ``r,c`` cells or ``r,c..r,c`` straight inclusive segments,
where consecutive entries must chain into a 4-connected sequence. Outside
the grid block, blank lines and lines starting with ``#`` are ignored.
Unknown directives are rejected.

Coordinates are (row, col), 0-based, row 0 at the top. Movement and fire
use 4-adjacency; a route's length is its step count times ``cell_size``.
Path queries break ties deterministically: among equal-cost routes, each
step prefers up, then left, then down, then right.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources

import numpy as np

from evacsim import kernels
from evacsim.errors import ScenarioSemanticError, ScenarioSyntaxError

# Cell kinds (values shared with the kernel masks).
VOID, WALL, FLOOR, DOOR, STAIR, EXIT = range(6)

KIND_NAMES = {VOID: "void", WALL: "wall", FLOOR: "floor", DOOR: "door", STAIR: "stair", EXIT: "exit"}
_CHAR_TO_KIND = {" ": VOID, "#": WALL, ".": FLOOR, "D": DOOR, "S": STAIR, "E": EXIT, "@": FLOOR}
_KIND_TO_CHAR = {VOID: " ", WALL: "#", FLOOR: ".", DOOR: "D", STAIR: "S", EXIT: "E"}

PASSABLE_KINDS = frozenset({FLOOR, DOOR, STAIR, EXIT})

Cell2 = tuple[int, int]


@dataclass(frozen=True)
class Cell:
    kind: int
    room_id: str | None = None

    @property
    def passable(self) -> bool:
        return self.kind in PASSABLE_KINDS


@dataclass(frozen=True)
class Room:
    id: str
    cells: frozenset[Cell2]
    ignitable: bool


@dataclass(frozen=True)
class Exit:
    id: str
    cells: frozenset[Cell2]
    kind: str  # "main" | "emergency"


@dataclass(frozen=True)
class Sign:
    cell: Cell2
    points_to: str


@dataclass(frozen=True)
class PathDefinition:
    id: str
    frm: Cell2
    to: Cell2
    declared_length: float
    real_time: float | None = None


@dataclass(frozen=True)
class Route:
    """An ordered 4-connected cell sequence.

    ``length`` is steps * cell_size; ``stair_steps`` counts steps whose
    destination is a stair cell (those run at the profile's stair speed).
    """

    cells: tuple[Cell2, ...]
    length: float
    stair_steps: int

    @property
    def steps(self) -> int:
        return len(self.cells) - 1


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    message: str
    where: Cell2 | None = None

    def __str__(self) -> str:
        loc = f" at {self.where}" if self.where is not None else ""
        return f"{self.severity}: {self.code}: {self.message}{loc}"


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def add(self, severity: str, code: str, message: str, where: Cell2 | None = None) -> None:
        self.findings.append(Finding(severity, code, message, where))


@dataclass(frozen=True)
class ScenarioSpec:
    """Immutable building description. Safe to share across threads; all
    query helpers are pure reads."""

    name: str
    cell_size: float
    grid: tuple[tuple[Cell, ...], ...]
    rooms: tuple[Room, ...]
    exits: tuple[Exit, ...]
    signs: tuple[Sign, ...]
    spawns: tuple[Cell2, ...]  # default spawn first
    entry_route: tuple[Cell2, ...]
    calibration_paths: tuple[PathDefinition, ...]

    @property
    def height(self) -> int:
        return len(self.grid)

    @property
    def width(self) -> int:
        return len(self.grid[0]) if self.grid else 0

    def in_bounds(self, cell: Cell2) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def cell(self, cell: Cell2) -> Cell:
        return self.grid[cell[0]][cell[1]]

    def is_passable_kind(self, cell: Cell2) -> bool:
        return self.in_bounds(cell) and self.cell(cell).passable

    @property
    def default_spawn(self) -> Cell2:
        return self.spawns[0]

    def room_by_id(self, room_id: str) -> Room | None:
        for room in self.rooms:
            if room.id == room_id:
                return room
        return None

    def exit_by_id(self, exit_id: str) -> Exit | None:
        for ex in self.exits:
            if ex.id == exit_id:
                return ex
        return None

    def exit_at(self, cell: Cell2) -> str | None:
        """Id of the exit containing ``cell``, if any."""
        return self._exit_cell_index.get(cell)

    # Cached numpy views used by the kernels. Marked read-only: the spec is
    # immutable and may be shared between concurrently running sessions.
    @cached_property
    def kind_grid(self) -> np.ndarray:
        arr = np.empty((self.height, self.width), dtype=np.uint8)
        for r, row in enumerate(self.grid):
            for c, cell in enumerate(row):
                arr[r, c] = cell.kind
        arr.flags.writeable = False
        return arr

    @cached_property
    def passable_grid(self) -> np.ndarray:
        arr = (
            (self.kind_grid == FLOOR)
            | (self.kind_grid == DOOR)
            | (self.kind_grid == STAIR)
            | (self.kind_grid == EXIT)
        ).astype(np.uint8)
        arr.flags.writeable = False
        return arr

    @cached_property
    def stair_flat(self) -> np.ndarray:
        arr = (self.kind_grid == STAIR).astype(np.uint8).ravel()
        arr.flags.writeable = False
        return arr

    @cached_property
    def exit_flat(self) -> np.ndarray:
        arr = (self.kind_grid == EXIT).astype(np.uint8).ravel()
        arr.flags.writeable = False
        return arr

    @cached_property
    def _exit_cell_index(self) -> dict[Cell2, str]:
        index: dict[Cell2, str] = {}
        for ex in self.exits:
            for cell in ex.cells:
                index[cell] = ex.id
        return index

    @cached_property
    def exit_distance_fields(self) -> tuple[tuple[str, np.ndarray], ...]:
        """Per-exit step-distance fields over the empty building (exits in
        id order, distance = min over the exit's cells, -1 unreachable).
        Computed once per spec and shared by every session built from it."""
        fields = []
        for ex in sorted(self.exits, key=lambda e: e.id):
            best = None
            for cell in sorted(ex.cells):
                if not self.in_bounds(cell):
                    continue
                d = kernels.dist_field(self.passable_grid, cell[0], cell[1])
                if best is None:
                    best = d.copy()
                else:
                    merge = (d >= 0) & ((best < 0) | (d < best))
                    best[merge] = d[merge]
            if best is not None:
                best.flags.writeable = False
                fields.append((ex.id, best))
        return tuple(fields)


# ---------------------------------------------------------------------------
# Parsing

_ROOM_RE = re.compile(
    r"^room\s+(?P<id>\S+)\s+ignitable=(?P<ign>true|false)\s+rect=(?P<rect>-?\d+,-?\d+,-?\d+,-?\d+)\s*$"
)
_EXIT_RE = re.compile(r"^exit\s+(?P<id>\S+)\s+kind=(?P<kind>main|emergency)\s+cells=(?P<cells>\S+)\s*$")
_SIGN_RE = re.compile(r"^sign\s+at=(?P<at>-?\d+,-?\d+)\s+to=(?P<to>\S+)\s*$")
_ENTRY_RE = re.compile(r"^entry_route\s+cells=(?P<cells>\S+)\s*$")
_PATH_RE = re.compile(
    r"^path\s+(?P<id>\S+)\s+from=(?P<frm>-?\d+,-?\d+)\s+to=(?P<to>-?\d+,-?\d+)"
    r"\s+length=(?P<length>[0-9.]+)(?:\s+real_time=(?P<rt>[0-9.]+))?\s*$"
)


def _parse_cell(token: str, lineno: int) -> Cell2:
    parts = token.split(",")
    if len(parts) != 2:
        raise ScenarioSyntaxError(f"expected 'r,c', got {token!r}", lineno)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ScenarioSyntaxError(f"non-integer cell coordinate {token!r}", lineno) from None


def _parse_cell_list(text: str, lineno: int) -> list[Cell2]:
    """Parse ``r,c`` entries and ``r,c..r,c`` straight segments into one
    chained cell sequence."""
    cells: list[Cell2] = []
    for chunk in text.split(";"):
        if ".." in chunk:
            a_txt, b_txt = chunk.split("..", 1)
            a = _parse_cell(a_txt, lineno)
            b = _parse_cell(b_txt, lineno)
            if a[0] != b[0] and a[1] != b[1]:
                raise ScenarioSyntaxError(f"segment {chunk!r} is not axis-aligned", lineno)
            dr = (b[0] > a[0]) - (b[0] < a[0])
            dc = (b[1] > a[1]) - (b[1] < a[1])
            cur = a
            cells.append(cur)
            while cur != b:
                cur = (cur[0] + dr, cur[1] + dc)
                cells.append(cur)
        else:
            cells.append(_parse_cell(chunk, lineno))
    return cells


def parse_scenario(document: str, check: bool = True) -> ScenarioSpec:
    """Parse a scenario document.

    Raises ScenarioSyntaxError for malformed text. With ``check=True`` (the
    default) the parsed spec is also validated and ScenarioSemanticError is
    raised when any error-severity finding exists; ``check=False`` returns
    the structurally parsed spec so callers can inspect findings themselves.
    """
    name: str | None = None
    cell_size: float | None = None
    grid_rows: list[str] | None = None
    room_specs: list[tuple[str, bool, tuple[int, int, int, int], int]] = []
    exit_specs: list[tuple[str, str, list[Cell2]]] = []
    signs: list[Sign] = []
    entry_route: list[Cell2] = []
    entry_seen = False
    paths: list[PathDefinition] = []

    lines = document.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i]
        stripped = line.strip()
        i += 1
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("name:"):
            name = stripped[len("name:"):].strip()
            continue
        if stripped.startswith("cell_size:"):
            raw = stripped[len("cell_size:"):].strip()
            try:
                cell_size = float(raw)
            except ValueError:
                raise ScenarioSyntaxError(f"bad cell_size {raw!r}", i) from None
            continue
        if stripped == "grid:":
            if grid_rows is not None:
                raise ScenarioSyntaxError("duplicate grid block", i)
            grid_rows = []
            while i < len(lines) and lines[i] != "":
                row = lines[i].rstrip("\n")
                for col, ch in enumerate(row):
                    if ch not in _CHAR_TO_KIND:
                        raise ScenarioSyntaxError(f"unknown grid character {ch!r}", i + 1, col + 1)
                grid_rows.append(row)
                i += 1
            continue
        m = _ROOM_RE.match(stripped)
        if m:
            r0, c0, r1, c1 = (int(x) for x in m.group("rect").split(","))
            room_specs.append((m.group("id"), m.group("ign") == "true", (r0, c0, r1, c1), i))
            continue
        m = _EXIT_RE.match(stripped)
        if m:
            exit_specs.append((m.group("id"), m.group("kind"), _parse_cell_list(m.group("cells"), i)))
            continue
        m = _SIGN_RE.match(stripped)
        if m:
            signs.append(Sign(cell=_parse_cell(m.group("at"), i), points_to=m.group("to")))
            continue
        m = _ENTRY_RE.match(stripped)
        if m:
            if entry_seen:
                raise ScenarioSyntaxError("duplicate entry_route", i)
            entry_seen = True
            entry_route = _parse_cell_list(m.group("cells"), i)
            continue
        m = _PATH_RE.match(stripped)
        if m:
            rt = m.group("rt")
            paths.append(
                PathDefinition(
                    id=m.group("id"),
                    frm=_parse_cell(m.group("frm"), i),
                    to=_parse_cell(m.group("to"), i),
                    declared_length=float(m.group("length")),
                    real_time=float(rt) if rt is not None else None,
                )
            )
            continue
        word = stripped.split()[0]
        raise ScenarioSyntaxError(f"unknown directive {word!r}", i)

    if name is None:
        raise ScenarioSyntaxError("missing 'name:' header", len(lines))
    if cell_size is None:
        raise ScenarioSyntaxError("missing 'cell_size:' header", len(lines))
    if not grid_rows or not any(row.strip() for row in grid_rows):
        raise ScenarioSyntaxError("missing or empty grid block", len(lines))

    width = max(len(row) for row in grid_rows)
    height = len(grid_rows)

    # room membership per cell, then freeze the grid
    room_of: dict[Cell2, str] = {}
    rooms: list[Room] = []
    for rid, ignitable, (r0, c0, r1, c1), lineno in room_specs:
        cells = set()
        for r in range(min(r0, r1), max(r0, r1) + 1):
            for c in range(min(c0, c1), max(c0, c1) + 1):
                if 0 <= r < height and 0 <= c < width and c < len(grid_rows[r]):
                    kind = _CHAR_TO_KIND[grid_rows[r][c]]
                    if kind in (FLOOR, DOOR, STAIR):
                        cells.add((r, c))
                        room_of.setdefault((r, c), rid)
        rooms.append(Room(id=rid, cells=frozenset(cells), ignitable=ignitable))

    grid: list[tuple[Cell, ...]] = []
    spawn_cells: list[Cell2] = []
    for r in range(height):
        row_txt = grid_rows[r]
        row: list[Cell] = []
        for c in range(width):
            ch = row_txt[c] if c < len(row_txt) else " "
            kind = _CHAR_TO_KIND[ch]
            row.append(Cell(kind=kind, room_id=room_of.get((r, c))))
            if ch == "@":
                spawn_cells.append((r, c))
        grid.append(tuple(row))

    # the default spawn is the entry route's final cell when given,
    # otherwise the first spawn in row-major order
    spawns: list[Cell2] = list(spawn_cells)
    if entry_route and entry_route[-1] in spawns:
        spawns.remove(entry_route[-1])
        spawns.insert(0, entry_route[-1])

    exits = tuple(
        Exit(id=eid, kind=kind, cells=frozenset(cells)) for eid, kind, cells in exit_specs
    )

    spec = ScenarioSpec(
        name=name,
        cell_size=cell_size,
        grid=tuple(grid),
        rooms=tuple(rooms),
        exits=exits,
        signs=tuple(signs),
        spawns=tuple(spawns),
        entry_route=tuple(entry_route),
        calibration_paths=tuple(paths),
    )
    if check:
        report = validate(spec)
        if not report.ok:
            raise ScenarioSemanticError(report.errors)
    return spec


def serialize_scenario(spec: ScenarioSpec) -> str:
    """Render a spec back to document text. parse(serialize(spec)) equals
    ``spec`` for every spec produced by parse_scenario."""
    spawn_set = set(spec.spawns)
    out = [f"name: {spec.name}", f"cell_size: {spec.cell_size}", "", "grid:"]
    for r in range(spec.height):
        chars = []
        for c in range(spec.width):
            if (r, c) in spawn_set:
                chars.append("@")
            else:
                chars.append(_KIND_TO_CHAR[spec.grid[r][c].kind])
        out.append("".join(chars).rstrip() if all(ch == " " for ch in chars) else "".join(chars))
    out.append("")
    for room in spec.rooms:
        rs = [c[0] for c in room.cells] or [0]
        cs = [c[1] for c in room.cells] or [0]
        rect = f"{min(rs)},{min(cs)},{max(rs)},{max(cs)}"
        out.append(f"room {room.id} ignitable={'true' if room.ignitable else 'false'} rect={rect}")
    for ex in spec.exits:
        cells = ";".join(f"{r},{c}" for r, c in sorted(ex.cells))
        out.append(f"exit {ex.id} kind={ex.kind} cells={cells}")
    for sign in spec.signs:
        out.append(f"sign at={sign.cell[0]},{sign.cell[1]} to={sign.points_to}")
    if spec.entry_route:
        cells = ";".join(f"{r},{c}" for r, c in spec.entry_route)
        out.append(f"entry_route cells={cells}")
    for p in spec.calibration_paths:
        line = (
            f"path {p.id} from={p.frm[0]},{p.frm[1]} to={p.to[0]},{p.to[1]} "
            f"length={p.declared_length}"
        )
        if p.real_time is not None:
            line += f" real_time={p.real_time}"
        out.append(line)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Validation

def validate(spec: ScenarioSpec) -> ValidationReport:
    """Check every structural invariant; findings are data, not failures."""
    rep = ValidationReport()
    if spec.cell_size <= 0:
        rep.add("error", "bad_cell_size", f"cell_size must be positive, got {spec.cell_size}")
    if spec.height == 0 or spec.width == 0:
        rep.add("error", "empty_grid", "grid has no cells")
        return rep

    seen_rooms: set[str] = set()
    claimed: dict[Cell2, str] = {}
    for room in spec.rooms:
        if room.id in seen_rooms:
            rep.add("error", "duplicate_room", f"room id {room.id!r} declared twice")
        seen_rooms.add(room.id)
        if not room.cells:
            rep.add("error", "empty_room", f"room {room.id!r} has no passable cells")
        for cell in room.cells:
            if not spec.in_bounds(cell):
                rep.add("error", "room_out_of_bounds", f"room {room.id!r} cell out of bounds", cell)
            elif spec.cell(cell).kind not in (FLOOR, DOOR, STAIR):
                rep.add("error", "room_bad_cell", f"room {room.id!r} contains a non-room cell", cell)
            if cell in claimed and claimed[cell] != room.id:
                rep.add("error", "room_overlap", f"rooms {claimed[cell]!r} and {room.id!r} share a cell", cell)
            claimed[cell] = room.id

    if not spec.exits:
        rep.add("error", "no_exit", "scenario declares no exit")
    seen_exits: set[str] = set()
    assigned_exit_cells: set[Cell2] = set()
    for ex in spec.exits:
        if ex.id in seen_exits:
            rep.add("error", "duplicate_exit", f"exit id {ex.id!r} declared twice")
        seen_exits.add(ex.id)
        if not ex.cells:
            rep.add("error", "empty_exit", f"exit {ex.id!r} has no cells")
        for cell in ex.cells:
            if not spec.in_bounds(cell):
                rep.add("error", "exit_out_of_bounds", f"exit {ex.id!r} cell out of bounds", cell)
            elif spec.cell(cell).kind != EXIT:
                rep.add("error", "exit_bad_cell", f"exit {ex.id!r} lists a cell that is not an exit cell", cell)
            assigned_exit_cells.add(cell)
    for r in range(spec.height):
        for c in range(spec.width):
            if spec.grid[r][c].kind == EXIT and (r, c) not in assigned_exit_cells:
                rep.add("warning", "unassigned_exit_cell", "exit cell not listed by any exit", (r, c))

    for sign in spec.signs:
        if not spec.in_bounds(sign.cell):
            rep.add("error", "sign_out_of_bounds", "sign cell out of bounds", sign.cell)
        if spec.exit_by_id(sign.points_to) is None:
            rep.add("error", "dangling_sign", f"sign points to unknown exit {sign.points_to!r}", sign.cell)

    if not any(room.ignitable for room in spec.rooms):
        rep.add("warning", "no_ignitable_room", "fire cannot ignite: no room is ignitable")

    for cell in spec.spawns:
        if not spec.in_bounds(cell):
            rep.add("error", "spawn_out_of_bounds", "spawn out of bounds", cell)
        elif not spec.cell(cell).passable:
            rep.add("error", "spawn_impassable", "spawn on an impassable cell", cell)
        elif spec.cell(cell).kind == EXIT:
            rep.add("warning", "spawn_on_exit", "spawn placed on an exit cell", cell)

    # spawn-to-exit reachability over passable cells
    if spec.exits and spec.spawns:
        exit_cells = [c for ex in spec.exits for c in sorted(ex.cells) if spec.in_bounds(c)]
        if exit_cells:
            dist = kernels.dist_field(spec.passable_grid, exit_cells[0][0], exit_cells[0][1])
            reach = dist >= 0
            for cell in exit_cells[1:]:
                d = kernels.dist_field(spec.passable_grid, cell[0], cell[1])
                reach |= d >= 0
            for cell in spec.spawns:
                if spec.in_bounds(cell) and spec.cell(cell).passable and not reach[cell[0], cell[1]]:
                    rep.add("error", "spawn_unreachable", "spawn cannot reach any exit", cell)

    if spec.entry_route:
        for cell in spec.entry_route:
            if not spec.in_bounds(cell) or not spec.cell(cell).passable:
                rep.add("error", "entry_route_impassable", "entry route crosses an impassable cell", cell)
                break
        for a, b in zip(spec.entry_route, spec.entry_route[1:]):
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                rep.add("error", "entry_route_disconnected", "entry route cells are not 4-adjacent", b)
                break
        if spec.spawns and spec.entry_route[-1] != spec.spawns[0]:
            rep.add("error", "entry_route_end", "entry route must end at the default spawn", spec.entry_route[-1])
    else:
        rep.add(
            "warning",
            "no_entry_route",
            "no entry route: retracing agents fall back to nearest-exit routing",
        )

    seen_paths: set[str] = set()
    for p in spec.calibration_paths:
        if p.id in seen_paths:
            rep.add("error", "duplicate_path", f"path id {p.id!r} declared twice")
        seen_paths.add(p.id)
        if p.declared_length <= 0:
            rep.add("error", "path_bad_length", f"path {p.id!r} has non-positive length")
        for cell, label in ((p.frm, "from"), (p.to, "to")):
            if not spec.in_bounds(cell) or not spec.cell(cell).passable:
                rep.add("error", "path_bad_endpoint", f"path {p.id!r} {label} endpoint impassable", cell)
        if rep.ok and spec.is_passable_kind(p.frm) and spec.is_passable_kind(p.to):
            route = shortest_path(spec, p.frm, p.to)
            if route is None:
                rep.add("error", "path_disconnected", f"path {p.id!r} endpoints are not connected")
            elif abs(route.length - p.declared_length) > 1e-9:
                rep.add(
                    "warning",
                    "path_length_mismatch",
                    f"path {p.id!r} declares {p.declared_length} m but measures {route.length} m",
                )
    return rep


# ---------------------------------------------------------------------------
# Path queries

def route_from_cells(spec: ScenarioSpec, cells: tuple[Cell2, ...]) -> Route:
    stair_steps = sum(1 for cell in cells[1:] if spec.cell(cell).kind == STAIR)
    return Route(cells=cells, length=(len(cells) - 1) * spec.cell_size, stair_steps=stair_steps)


def _blocked_passable(spec: ScenarioSpec, blocked) -> np.ndarray:
    passable = spec.passable_grid.copy()
    for r, c in blocked:
        if 0 <= r < spec.height and 0 <= c < spec.width:
            passable[r, c] = 0
    return passable


def shortest_path(spec: ScenarioSpec, frm: Cell2, to: Cell2, blocked=frozenset()) -> Route | None:
    """Minimum-step 4-connected route from ``frm`` to ``to`` avoiding walls,
    void and ``blocked`` cells; None when disconnected. Ties are broken by
    the fixed step preference (up, left, down, right), making the returned
    route identical across runs and platforms.
    """
    for cell, label in ((frm, "from"), (to, "to")):
        if not spec.in_bounds(cell):
            raise ValueError(f"{label} cell {cell} out of bounds")
        if not spec.cell(cell).passable:
            raise ValueError(f"{label} cell {cell} is not passable")
    if frm == to:
        return Route(cells=(frm,), length=0.0, stair_steps=0)
    passable = _blocked_passable(spec, blocked)
    dist = kernels.dist_field(passable, to[0], to[1])  # field grown from the target
    path = kernels.greedy_path(dist, frm[0], frm[1])
    if path is None:
        return None
    cells = tuple((int(r), int(c)) for r, c in path)
    return route_from_cells(spec, cells)


def nearest_exit(spec: ScenarioSpec, frm: Cell2, blocked=frozenset()) -> tuple[str, Route] | None:
    """The reachable exit with the shortest route from ``frm``.

    Ties between exits are broken by lexicographic exit id; ties between an
    exit's own cells by smallest (row, col). Returns (exit id, route), or
    None when no exit is reachable.
    """
    if not spec.in_bounds(frm):
        raise ValueError(f"cell {frm} out of bounds")
    if not spec.cell(frm).passable:
        raise ValueError(f"cell {frm} is not passable")
    passable = _blocked_passable(spec, blocked)
    dist = kernels.dist_field(passable, frm[0], frm[1])
    best: tuple[int, str, Cell2] | None = None
    for ex in sorted(spec.exits, key=lambda e: e.id):
        for cell in sorted(ex.cells):
            if not spec.in_bounds(cell):
                continue
            d = int(dist[cell[0], cell[1]])
            if d >= 0 and (best is None or d < best[0]):
                best = (d, ex.id, cell)
    if best is None:
        return None
    _, exit_id, target = best
    route = shortest_path(spec, frm, target, blocked)
    assert route is not None
    return exit_id, route


def nearest_exit_id_at(spec: ScenarioSpec, cell: Cell2) -> str | None:
    """Id of the exit nearest to ``cell`` on the empty building (no blocked
    cells), ties broken by exit id; None when no exit is reachable. Agrees
    with nearest_exit() but runs off per-spec cached distance fields."""
    best_d = None
    best_id = None
    for exit_id, dist in spec.exit_distance_fields:
        d = int(dist[cell[0], cell[1]])
        if d >= 0 and (best_d is None or d < best_d):
            best_d = d
            best_id = exit_id
    return best_id


# ---------------------------------------------------------------------------
# Scenario files

def grid_kind_rows(spec: ScenarioSpec) -> list[str]:
    """The grid as one string per row of kind characters (no spawn marks);
    the shape clients render from."""
    return [
        "".join(_KIND_TO_CHAR[spec.grid[r][c].kind] for c in range(spec.width))
        for r in range(spec.height)
    ]


def read_scenario_file(path, check: bool = True) -> ScenarioSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read(), check=check)


def bundled_scenario_names() -> list[str]:
    names = []
    for entry in resources.files("evacsim.data").iterdir():
        if entry.name.endswith(".scn"):
            names.append(entry.name[: -len(".scn")])
    return sorted(names)


def load_bundled_scenario(name: str, check: bool = True) -> ScenarioSpec:
    return parse_scenario(bundled_scenario_text(name), check=check)


def bundled_scenario_text(name: str) -> str:
    res = resources.files("evacsim.data").joinpath(f"{name}.scn")
    if not res.is_file():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return res.read_text(encoding="utf-8")
