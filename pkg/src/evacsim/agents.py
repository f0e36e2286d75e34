"""Evacuating occupants: route choice, movement, congestion, replanning.

Route choice depends on building familiarity: familiar occupants mostly
head for the nearest exit, unfamiliar ones mostly retrace the route they
came in by. The proportions are configurable (BehaviorParams); movement
runs at the profile speed with an optional stair slowdown. Cells hold one
agent; a blocked agent waits at the step boundary. When fire touches an
agent's remaining route it re-plans toward the nearest safe exit, and is
trapped when none is reachable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

import numpy as np

from evacsim import kernels
from evacsim.errors import ConfigurationError
from evacsim.fire import FireState
from evacsim.scenario import (
    EXIT,
    Cell2,
    Route,
    ScenarioSpec,
    nearest_exit,
    route_from_cells,
    shortest_path,
)

INTENT_NEAREST = "nearest_exit"
INTENT_RETRACE = "retrace_entry"

IDLE = "idle"
EVACUATING = "evacuating"
ESCAPED = "escaped"
TRAPPED = "trapped"

_STATUS_CODE = {IDLE: kernels.STATUS_IDLE, EVACUATING: kernels.STATUS_EVACUATING,
                ESCAPED: kernels.STATUS_ESCAPED, TRAPPED: kernels.STATUS_TRAPPED}
_CODE_STATUS = {v: k for k, v in _STATUS_CODE.items()}


@dataclass(frozen=True)
class AgentProfile:
    speed: float = 1.5  # adult walking speed, m/s
    familiar: bool = False
    gamer: bool = False  # recorded per occupant; no behavioural effect
    stair_factor: float = 1.0

    def __post_init__(self):
        if self.speed <= 0:
            raise ConfigurationError(f"speed must be positive, got {self.speed}")
        if not 0 < self.stair_factor <= 1:
            raise ConfigurationError(f"stair_factor must be in (0, 1], got {self.stair_factor}")


@dataclass(frozen=True)
class BehaviorParams:
    p_nearest_given_familiar: float = 11 / 13
    p_retrace_given_unfamiliar: float = 11 / 17

    def __post_init__(self):
        for name in ("p_nearest_given_familiar", "p_retrace_given_unfamiliar"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1], got {p}")


@dataclass
class AgentState:
    id: str
    profile: AgentProfile
    cell: Cell2
    progress: float = 0.0  # metres covered toward the next route cell
    intent: str = INTENT_NEAREST
    route: Route | None = None
    status: str = IDLE
    escape_time: float | None = None
    exit_id: str | None = None  # set on escape

    @property
    def route_index(self) -> int:
        """Index of the agent's cell within its route (0 when routeless)."""
        if self.route is None:
            return 0
        return self.route.cells.index(self.cell)


def choose_intent(profile: AgentProfile, params: BehaviorParams, rng: random.Random) -> str:
    """Draw an evacuation intent from the familiarity-conditioned behaviour
    distribution. One uniform draw per call."""
    if profile.familiar:
        return INTENT_NEAREST if rng.random() < params.p_nearest_given_familiar else INTENT_RETRACE
    return INTENT_RETRACE if rng.random() < params.p_retrace_given_unfamiliar else INTENT_NEAREST


def plan_route(agent: AgentState, spec: ScenarioSpec, fire: FireState | None) -> Route | None:
    """Plan the agent's route for its current intent.

    nearest_exit: shortest route to the closest reachable exit, avoiding
    burning cells. retrace_entry: the entry route walked backwards from the
    agent's cell; an agent that never walked the entry route heads for its
    building-entrance end by the shortest safe path instead. Returns None
    when the goal is unreachable.
    """
    blocked = fire.burning if fire is not None else frozenset()
    if agent.intent == INTENT_RETRACE and spec.entry_route:
        rev = tuple(reversed(spec.entry_route))
        if agent.cell in rev:
            # memorised route, walked as-is; fire on it is handled by replanning
            idx = rev.index(agent.cell)
            return route_from_cells(spec, rev[idx:])
        if not spec.is_passable_kind(agent.cell) or agent.cell in blocked:
            return None
        return shortest_path(spec, agent.cell, spec.entry_route[0], blocked)
    if not spec.is_passable_kind(agent.cell) or agent.cell in blocked:
        return None
    found = nearest_exit(spec, agent.cell, blocked)
    return found[1] if found is not None else None


def route_is_blocked(agent: AgentState, spec: ScenarioSpec, fire: FireState | None) -> bool:
    """True when the agent needs a new route: it has none, fire touches a
    not-yet-walked route cell (or its own), or the route ran out somewhere
    that is not an exit."""
    if agent.route is None:
        return True
    idx = agent.route_index
    if idx == len(agent.route.cells) - 1 and spec.cell(agent.cell).kind != EXIT:
        return True
    if fire is None or not fire.burning:
        return False
    return any(cell in fire.burning for cell in agent.route.cells[idx:])


def replan_if_blocked(agent: AgentState, spec: ScenarioSpec, fire: FireState | None) -> AgentState:
    """Re-plan when fire touches the agent's remaining route.

    A blocked agent abandons whatever it was doing and heads for the
    nearest safe exit; when no exit is reachable it becomes trapped.
    """
    if agent.status != EVACUATING:
        return agent
    if not route_is_blocked(agent, spec, fire):
        return agent
    forced = replace_intent(agent, INTENT_NEAREST)
    route = plan_route(forced, spec, fire)
    if route is None:
        return replace(agent, status=TRAPPED, route=None, progress=0.0)
    return replace(forced, route=route, progress=0.0)


def replace_intent(agent: AgentState, intent: str) -> AgentState:
    return replace(agent, intent=intent)


def agent_tick(agent: AgentState, world, dt: float, now: float | None = None) -> AgentState:
    """Advance one agent by ``dt`` seconds against a static world.

    ``world`` is (spec, fire, occupancy) where occupancy maps cells to the
    ids of *other* occupants (a set or mapping). This is a single-agent view
    of the same kernel the session tick uses, so standalone behaviour and
    in-session behaviour cannot drift apart.
    """
    spec, fire_state, occupancy = world
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if agent.status != EVACUATING or agent.route is None:
        return agent

    width = spec.width
    idx = agent.route_index
    flat = [r * width + c for r, c in agent.route.cells]
    route_cells = np.asarray(flat, dtype=np.int32)
    route_offs = np.asarray([0, len(flat)], dtype=np.int32)
    pos = np.asarray([idx], dtype=np.int32)
    progress = np.asarray([agent.progress], dtype=np.float64)
    speed = np.asarray([agent.profile.speed], dtype=np.float64)
    stair_factor = np.asarray([agent.profile.stair_factor], dtype=np.float64)
    status = np.asarray([kernels.STATUS_EVACUATING], dtype=np.uint8)

    occ = np.full(spec.height * spec.width, -1, dtype=np.int32)
    if occupancy:
        for cell in occupancy:
            if cell != agent.cell:
                occ[cell[0] * width + cell[1]] = 9999
    occ[agent.cell[0] * width + agent.cell[1]] = 0

    burning = np.zeros(spec.height * spec.width, dtype=np.uint8)
    if fire_state is not None:
        for r, c in fire_state.burning:
            burning[r * width + c] = 1

    kernels.advance_agents(
        route_cells, route_offs, pos, progress, speed, stair_factor, status,
        occ, spec.stair_flat, spec.exit_flat, burning, spec.cell_size, dt,
    )

    new_cell = agent.route.cells[int(pos[0])]
    new_status = _CODE_STATUS[int(status[0])]
    escaped_now = new_status == ESCAPED and agent.status != ESCAPED
    return replace(
        agent,
        cell=new_cell,
        progress=float(progress[0]),
        status=new_status,
        escape_time=(now if escaped_now else agent.escape_time),
        exit_id=(spec.exit_at(new_cell) if escaped_now else agent.exit_id),
    )
