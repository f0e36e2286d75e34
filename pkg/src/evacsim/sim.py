"""Session engine: clock, alarm and timer, inputs, per-tick orchestration,
scoring, event logging, calibration math and the batch experiment harness.

A session owns one run of a scenario. Time is discrete: the clock advances
by ``tick_dt`` per tick and every time stamp is derived from the integer
tick counter, so identical (scenario, config, seed, input trace) produce a
byte-identical event log. The timer starts when the fire-simulation input
arrives (the alarm); the score of an escaped player is the elapsed time
from alarm to exit, lower is better.

Event log format: one JSON object per line with keys ``tick``, ``t``,
``kind`` and ``payload``, serialized with sorted keys and no spaces.
Payloads by kind:

    session_start  scenario, mode, seed, population [fg, fn, ug, un],
                   config {tick_dt, spread_interval, fire_enabled, behavior
                   [p_nearest_familiar, p_retrace_unfamiliar], time_cap},
                   player (profile flags or null), scenario_doc
    input          input (move|jump|start_fire), dir?, seq?
    alarm          (empty)
    ignition       room, cell [r, c]
    fire_spread    step, cells [[r, c], ...] (row-major)
    agent_move     agent, from [r, c], to [r, c] (net move of one tick)
    agent_escaped  agent, exit, score
    agent_trapped  agent
    player_escaped exit, score
    session_end    outcome, score?, escaped, trapped, truncated
"""

from __future__ import annotations

import hashlib
import json
import random
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from evacsim import agents as agents_mod
from evacsim import fire as fire_mod
from evacsim import kernels
from evacsim.agents import (
    ESCAPED,
    EVACUATING,
    IDLE,
    INTENT_NEAREST,
    TRAPPED,
    AgentProfile,
    AgentState,
    BehaviorParams,
)
from evacsim.errors import ConfigurationError, SessionStateError
from evacsim.fire import FireConfig, FireState
from evacsim.scenario import (
    EXIT,
    STAIR,
    Cell2,
    Route,
    ScenarioSpec,
    nearest_exit,
    nearest_exit_id_at,
    serialize_scenario,
    shortest_path,
)

RUNNING = "running"
PLAYER_ESCAPED = "escaped"
PLAYER_TRAPPED = "trapped"
COMPLETED = "completed"  # headless: every agent terminal
TRUNCATED = "truncated"  # headless: time cap hit first

INTERACTIVE = "interactive"
HEADLESS = "headless"

DIRECTIONS = {"up": (-1, 0), "left": (0, -1), "down": (1, 0), "right": (0, 1)}

_EPS = 1e-12


def derive_seed(master: int, tag: str) -> int:
    """Stable sub-seed for an independent random stream."""
    return (int(master) ^ zlib.crc32(tag.encode("utf-8"))) & 0xFFFFFFFF


@dataclass(frozen=True)
class SimConfig:
    tick_dt: float = 0.1
    fire: FireConfig = field(default_factory=FireConfig)
    behavior: BehaviorParams = field(default_factory=BehaviorParams)
    seed: int = 0
    fire_enabled: bool = True
    time_cap: float = 600.0

    def __post_init__(self):
        if self.tick_dt <= 0:
            raise ConfigurationError(f"tick_dt must be positive, got {self.tick_dt}")
        if self.time_cap <= 0:
            raise ConfigurationError(f"time_cap must be positive, got {self.time_cap}")


@dataclass(frozen=True)
class PopulationSpec:
    """Occupant counts per (familiar, gamer) category."""

    familiar_gamers: int = 0
    familiar_nongamers: int = 0
    unfamiliar_gamers: int = 0
    unfamiliar_nongamers: int = 0

    @property
    def total(self) -> int:
        return (
            self.familiar_gamers
            + self.familiar_nongamers
            + self.unfamiliar_gamers
            + self.unfamiliar_nongamers
        )

    def categories(self) -> list[tuple[str, bool, bool, int]]:
        return [
            ("familiar_gamer", True, True, self.familiar_gamers),
            ("familiar_nongamer", True, False, self.familiar_nongamers),
            ("unfamiliar_gamer", False, True, self.unfamiliar_gamers),
            ("unfamiliar_nongamer", False, False, self.unfamiliar_nongamers),
        ]

    def counts(self) -> list[int]:
        return [c for _, _, _, c in self.categories()]

    @classmethod
    def survey_sample(cls) -> "PopulationSpec":
        """The 30-person reference population: 8/6/5/11 across
        (familiar, unfamiliar) x (gamer, non-gamer)."""
        return cls(8, 6, 5, 11)


@dataclass(frozen=True)
class EventRecord:
    tick: int
    t: float
    kind: str
    payload: dict

    def to_line(self) -> str:
        return json.dumps(
            {"tick": self.tick, "t": self.t, "kind": self.kind, "payload": self.payload},
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_line(cls, line: str) -> "EventRecord":
        d = json.loads(line)
        return cls(tick=d["tick"], t=d["t"], kind=d["kind"], payload=d["payload"])


def log_digest(lines) -> str:
    h = hashlib.sha256()
    for line in lines:
        h.update(line.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


@dataclass(frozen=True)
class PlayerInput:
    kind: str  # "move" | "jump" | "start_fire"
    direction: str | None = None
    seq: int | None = None


@dataclass(frozen=True)
class CalibrationRecord:
    """One path's measured traversal. ``error`` is 1 - game_time/real_time;
    the subject's speed is always recomputed from distance and time."""

    path_id: str
    distance: float
    real_time: float | None
    game_time: float | None
    error: float | None
    note: str = ""

    @property
    def subject_speed(self) -> float | None:
        if self.real_time is None or self.real_time <= 0:
            return None
        return self.distance / self.real_time


@dataclass
class ContingencyTable:
    """Exit choice by familiarity: was the nearest exit (from the agent's
    spawn, measured before any fire) the one actually used?"""

    familiar_nearest: int = 0
    familiar_other: int = 0
    unfamiliar_nearest: int = 0
    unfamiliar_other: int = 0

    def add(self, familiar: bool, nearest: bool, n: int = 1) -> None:
        if familiar and nearest:
            self.familiar_nearest += n
        elif familiar:
            self.familiar_other += n
        elif nearest:
            self.unfamiliar_nearest += n
        else:
            self.unfamiliar_other += n

    @property
    def familiar_total(self) -> int:
        return self.familiar_nearest + self.familiar_other

    @property
    def unfamiliar_total(self) -> int:
        return self.unfamiliar_nearest + self.unfamiliar_other

    def to_csv(self) -> str:
        lines = ["group,nearest_exit,other_exit,total"]
        lines.append(f"familiar,{self.familiar_nearest},{self.familiar_other},{self.familiar_total}")
        lines.append(
            f"unfamiliar,{self.unfamiliar_nearest},{self.unfamiliar_other},{self.unfamiliar_total}"
        )
        return "\n".join(lines) + "\n"


class Session:
    """One simulation run. Mutated only through apply_input()/tick();
    distinct sessions are independent and may run in parallel."""

    def __init__(
        self,
        spec: ScenarioSpec,
        config: SimConfig,
        mode: str,
        population: PopulationSpec,
        player_profile: AgentProfile | None = None,
    ):
        if mode not in (INTERACTIVE, HEADLESS):
            raise ConfigurationError(f"unknown mode {mode!r}")
        if population.total <= 0:
            raise ConfigurationError("population total must be positive")
        self.spec = spec
        self.config = config
        self.mode = mode
        self.population = population
        self.tick_no = 0
        self.alarm_tick: int | None = None
        self.fire: FireState | None = None
        self.outcome = RUNNING
        self.score: float | None = None
        self.log: list[EventRecord] = []
        self.rng_intent = random.Random(derive_seed(config.seed, "intents"))
        self.rng_ignite = random.Random(derive_seed(config.seed, "ignition"))

        spawns = list(spec.spawns)
        n_spawn_for_agents = len(spawns) - (1 if mode == INTERACTIVE else 0)
        if population.total > n_spawn_for_agents:
            raise ConfigurationError(
                f"population of {population.total} exceeds the {n_spawn_for_agents} available spawn cells"
            )

        self.player: AgentState | None = None
        self.player_dir: str | None = None
        agent_spawns = spawns
        if mode == INTERACTIVE:
            profile = player_profile if player_profile is not None else AgentProfile(familiar=False)
            self.player = AgentState(id="player", profile=profile, cell=spawns[0])
            agent_spawns = spawns[1:]

        self.agents: list[AgentState] = []
        self.initial_intents: list[str] = []
        i = 0
        for _, familiar, gamer, count in population.categories():
            for _ in range(count):
                profile = AgentProfile(familiar=familiar, gamer=gamer)
                intent = agents_mod.choose_intent(profile, config.behavior, self.rng_intent)
                self.agents.append(
                    AgentState(id=f"a{i:03d}", profile=profile, cell=agent_spawns[i], intent=intent)
                )
                self.initial_intents.append(intent)
                i += 1

        # nearest exit from each start cell, measured on the empty building
        self.nearest_at_spawn: list[str | None] = [
            nearest_exit_id_at(spec, a.cell) for a in self.agents
        ]
        self.player_nearest = nearest_exit_id_at(spec, spawns[0]) if self.player else None

        # kernel buffers
        h, w = spec.height, spec.width
        self._w = w
        self._burn_flat = np.zeros(h * w, dtype=np.uint8)
        self._occ = np.full(h * w, -1, dtype=np.int32)
        for idx, a in enumerate(self.agents):
            self._occ[a.cell[0] * w + a.cell[1]] = idx
        if self.player is not None:
            self._occ[self.player.cell[0] * w + self.player.cell[1]] = len(self.agents)
        self._routes_dirty = True
        self._fresh_routes: set[int] = set()
        self._route_cells = np.zeros(0, dtype=np.int32)
        self._route_offs = np.zeros(len(self.agents) + 1, dtype=np.int32)
        self._route_last = np.full(len(self.agents), -1, dtype=np.int32)
        self._pos = np.zeros(len(self.agents), dtype=np.int32)
        self._progress = np.zeros(len(self.agents), dtype=np.float64)
        self._speed = np.asarray([a.profile.speed for a in self.agents], dtype=np.float64)
        self._stairf = np.asarray([a.profile.stair_factor for a in self.agents], dtype=np.float64)
        self._status = np.asarray(
            [kernels.STATUS_IDLE] * len(self.agents), dtype=np.uint8
        )
        self._replan_pending = False

        self._log(
            "session_start",
            {
                "scenario": spec.name,
                "mode": mode,
                "seed": config.seed,
                "population": population.counts(),
                "config": {
                    "tick_dt": config.tick_dt,
                    "spread_interval": config.fire.spread_interval,
                    "fire_enabled": config.fire_enabled,
                    "behavior": [
                        config.behavior.p_nearest_given_familiar,
                        config.behavior.p_retrace_given_unfamiliar,
                    ],
                    "time_cap": config.time_cap,
                },
                "player": (
                    {"familiar": self.player.profile.familiar, "gamer": self.player.profile.gamer}
                    if self.player
                    else None
                ),
                "scenario_doc": serialize_scenario(spec),
            },
        )

    # -- time ------------------------------------------------------------

    @property
    def clock(self) -> float:
        return self._t(self.tick_no)

    @property
    def alarm_started(self) -> bool:
        return self.alarm_tick is not None

    @property
    def timer_origin(self) -> float | None:
        return self._t(self.alarm_tick) if self.alarm_tick is not None else None

    @property
    def elapsed(self) -> float:
        """Timer shown to the player: seconds since the alarm, 0 before it."""
        if self.alarm_tick is None:
            return 0.0
        return self._t(self.tick_no - self.alarm_tick)

    def _t(self, ticks: int) -> float:
        return round(ticks * self.config.tick_dt, 6)

    # -- helpers ----------------------------------------------------------

    def _log(self, kind: str, payload: dict) -> None:
        self.log.append(EventRecord(self.tick_no, self._t(self.tick_no), kind, payload))

    def event_lines(self) -> list[str]:
        return [e.to_line() for e in self.log]

    def digest(self) -> str:
        return log_digest(self.event_lines())

    def _flat(self, cell: Cell2) -> int:
        return cell[0] * self._w + cell[1]

    def _cell_of(self, flat: int) -> Cell2:
        return divmod(int(flat), self._w)

    # -- input ------------------------------------------------------------

    def apply_input(self, inp: PlayerInput) -> None:
        if self.outcome != RUNNING:
            raise SessionStateError(f"input after session ended ({self.outcome})")
        if inp.kind not in ("move", "jump", "start_fire"):
            raise ValueError(f"unknown input kind {inp.kind!r}")
        if inp.kind == "move":
            if self.player is None:
                raise SessionStateError("move input on a session without a player")
            if inp.direction not in DIRECTIONS:
                raise ValueError(f"unknown direction {inp.direction!r}")
        payload: dict = {"input": inp.kind}
        if inp.direction is not None:
            payload["dir"] = inp.direction
        if inp.seq is not None:
            payload["seq"] = inp.seq
        self._log("input", payload)
        if inp.kind == "jump":
            return  # accepted and logged; no grid meaning
        if inp.kind == "move":
            if inp.direction != self.player_dir:
                self.player_dir = inp.direction
                self.player.progress = 0.0  # turning re-aims at the new cell
            return
        # start_fire: only the first press ignites; later ones just log
        if self.alarm_started:
            return
        self.alarm_tick = self.tick_no
        self._log("alarm", {})
        if self.config.fire_enabled:
            self.fire = fire_mod.ignite(
                self.spec, self.config.fire, self.rng_ignite, now=self.clock
            )
            cell = next(iter(self.fire.burning))
            self._burn_flat[self._flat(cell)] = 1
            self._log("ignition", {"room": self.fire.ignition_room, "cell": list(cell)})
        if self.player is not None and self.player.status == IDLE:
            self.player.status = EVACUATING
        self._plan_initial_routes()

    def _plan_initial_routes(self) -> None:
        """Give every agent its first route, honouring the drawn intent;
        an agent whose intended goal is unreachable falls back to the
        nearest safe exit, and is trapped when there is none."""
        for idx, agent in enumerate(self.agents):
            if agent.status != IDLE:
                continue
            agent.status = EVACUATING
            route = agents_mod.plan_route(agent, self.spec, self.fire)
            if route is None and agent.intent != INTENT_NEAREST:
                agent.intent = INTENT_NEAREST
                route = agents_mod.plan_route(agent, self.spec, self.fire)
            if route is None:
                agent.status = TRAPPED
                self._status[idx] = kernels.STATUS_TRAPPED
                self._log("agent_trapped", {"agent": agent.id})
                continue
            agent.route = route
            agent.progress = 0.0
            self._fresh_routes.add(idx)
        self._routes_dirty = True

    # -- per-tick orchestration -------------------------------------------

    def tick(self, dt: float | None = None) -> None:
        if self.outcome != RUNNING:
            raise SessionStateError(f"tick on ended session ({self.outcome})")
        if dt is not None and abs(dt - self.config.tick_dt) > _EPS:
            raise ValueError(f"dt {dt} does not match configured tick_dt {self.config.tick_dt}")
        self.tick_no += 1
        if not self.alarm_started:
            return
        now = self.clock

        fire_grew = self._advance_fire(now)
        first_tick_after_alarm = self.tick_no == self.alarm_tick + 1
        if fire_grew or self._replan_pending:
            self._replan_agents()
            self._replan_pending = False
        self._advance_agents(now)
        player_check = fire_grew or first_tick_after_alarm
        if self.player is not None and self.outcome == RUNNING:
            escaped = self._player_tick(now)
            if escaped:
                return
            if player_check and self._player_is_trapped():
                self._end(PLAYER_TRAPPED)
                return
        if self.mode == HEADLESS and all(a.status in (ESCAPED, TRAPPED) for a in self.agents):
            self._end(COMPLETED)

    def _advance_fire(self, now: float) -> bool:
        if self.fire is None:
            return False
        target = int((now - self.fire.ignited_at) / self.config.fire.spread_interval)
        grew = False
        while self.fire.spread_count < target:
            self.fire, new_cells = fire_mod.spread_once(self.fire, self.spec)
            for cell in new_cells:
                self._burn_flat[self._flat(cell)] = 1
            self._log(
                "fire_spread",
                {"step": self.fire.spread_count, "cells": [list(c) for c in new_cells]},
            )
            if new_cells:
                grew = True
        return grew

    def _replan_agents(self) -> None:
        for idx, agent in enumerate(self.agents):
            if agent.status != EVACUATING:
                continue
            updated = agents_mod.replan_if_blocked(agent, self.spec, self.fire)
            if updated is agent and agent.route is not None:
                continue
            self.agents[idx] = updated
            self._routes_dirty = True
            if updated.status == TRAPPED:
                self._status[idx] = kernels.STATUS_TRAPPED
                self._log("agent_trapped", {"agent": updated.id})
            else:
                self._fresh_routes.add(idx)

    def _rebuild_routes(self) -> None:
        """Re-pack per-agent route slices for the movement kernel. Slices
        start at each agent's current cell; in-step progress is kept except
        for agents whose route was just replaced (_fresh_routes)."""
        cells: list[int] = []
        offs = [0]
        for idx, agent in enumerate(self.agents):
            if agent.status == EVACUATING and agent.route is not None:
                start = agent.route_index
                cells.extend(self._flat(c) for c in agent.route.cells[start:])
                self._pos[idx] = 0
                if idx in self._fresh_routes:
                    self._progress[idx] = agent.progress
                self._status[idx] = kernels.STATUS_EVACUATING
            else:
                cells.append(self._flat(agent.cell))
                self._pos[idx] = 0
                self._progress[idx] = 0.0
            offs.append(len(cells))
        self._route_cells = np.asarray(cells, dtype=np.int32)
        self._route_offs = np.asarray(offs, dtype=np.int32)
        self._route_last = self._route_offs[1:] - self._route_offs[:-1] - 1
        self._routes_dirty = False
        self._fresh_routes = set()

    def _advance_agents(self, now: float) -> None:
        if not self.agents:
            return
        if self._routes_dirty:
            self._rebuild_routes()
        old_pos = self._pos.copy()
        kernels.advance_agents(
            self._route_cells,
            self._route_offs,
            self._pos,
            self._progress,
            self._speed,
            self._stairf,
            self._status,
            self._occ,
            self.spec.stair_flat,
            self.spec.exit_flat,
            self._burn_flat,
            self.spec.cell_size,
            self.config.tick_dt,
        )
        for idx in np.flatnonzero(self._pos != old_pos):
            agent = self.agents[idx]
            flat = self._route_cells[self._route_offs[idx] + self._pos[idx]]
            new_cell = self._cell_of(flat)
            self._log("agent_move", {"agent": agent.id, "from": list(agent.cell), "to": list(new_cell)})
            agent.cell = new_cell
            if self._status[idx] == kernels.STATUS_ESCAPED:
                agent.status = ESCAPED
                agent.progress = 0.0
                agent.escape_time = now
                agent.exit_id = self.spec.exit_at(agent.cell)
                score = round(now - self.timer_origin, 6)
                self._log("agent_escaped", {"agent": agent.id, "exit": agent.exit_id, "score": score})
        # an evacuating agent whose route ran out somewhere that is not an
        # exit needs a fresh plan next tick
        stalled = (self._status == kernels.STATUS_EVACUATING) & (self._pos == self._route_last)
        for idx in np.flatnonzero(stalled):
            if self.spec.cell(self.agents[idx].cell).kind != EXIT:
                self._replan_pending = True
                break

    def _player_tick(self, now: float) -> bool:
        """Move the player by one tick; True when the session ended here."""
        p = self.player
        if p.status != EVACUATING or self.player_dir is None:
            return False
        dr, dc = DIRECTIONS[self.player_dir]
        pid = len(self.agents)
        left = self.config.tick_dt
        prog = p.progress
        moved_from = p.cell
        while left > _EPS:
            target = (p.cell[0] + dr, p.cell[1] + dc)
            if (
                not self.spec.in_bounds(target)
                or not self.spec.cell(target).passable
                or self._burn_flat[self._flat(target)]
            ):
                prog = 0.0  # facing a wall or fire: nowhere to lean
                break
            eff = p.profile.speed * (
                p.profile.stair_factor if self.spec.cell(target).kind == STAIR else 1.0
            )
            tneed = (self.spec.cell_size - prog) / eff
            if tneed <= left + _EPS:
                if self._occ[self._flat(target)] != -1:
                    prog = self.spec.cell_size  # queue behind the blocker
                    break
                left -= tneed
                self._occ[self._flat(p.cell)] = -1
                p.cell = target
                prog = 0.0
                if self.spec.cell(target).kind == EXIT:
                    p.status = ESCAPED
                    p.escape_time = now
                    p.exit_id = self.spec.exit_at(target)
                    break
                self._occ[self._flat(target)] = pid
            else:
                prog += eff * left
                left = 0.0
        p.progress = prog
        if p.cell != moved_from:
            self._log("agent_move", {"agent": "player", "from": list(moved_from), "to": list(p.cell)})
        if p.status == ESCAPED:
            self.score = round(now - self.timer_origin, 6)
            self._log("player_escaped", {"exit": p.exit_id, "score": self.score})
            self._end(PLAYER_ESCAPED)
            return True
        return False

    def _player_is_trapped(self) -> bool:
        p = self.player
        if p is None or p.status != EVACUATING:
            return False
        if self.fire is not None and p.cell in self.fire.burning:
            return True
        if not self.spec.cell(p.cell).passable:
            return True
        blocked = self.fire.burning if self.fire is not None else frozenset()
        return nearest_exit(self.spec, p.cell, blocked) is None

    def _end(self, outcome: str, truncated: bool = False) -> None:
        self.outcome = outcome
        payload = {
            "outcome": outcome,
            "escaped": sum(1 for a in self.agents if a.status == ESCAPED),
            "trapped": sum(1 for a in self.agents if a.status == TRAPPED),
            "truncated": truncated,
        }
        if self.score is not None:
            payload["score"] = self.score
        if self.player is not None:
            payload["player_status"] = self.player.status
        self._log("session_end", payload)

    def end_truncated(self) -> None:
        """Terminate a headless run that hit its time cap."""
        if self.outcome == RUNNING:
            self._end(TRUNCATED, truncated=True)


# ---------------------------------------------------------------------------
# Spec-level operations (functional wrappers around Session)

def new_session(
    spec: ScenarioSpec,
    config: SimConfig,
    mode: str = HEADLESS,
    population: PopulationSpec | None = None,
    player_profile: AgentProfile | None = None,
) -> Session:
    if population is None:
        population = PopulationSpec.survey_sample()
    return Session(spec, config, mode, population, player_profile)


def apply_input(session: Session, inp: PlayerInput) -> Session:
    session.apply_input(inp)
    return session


def tick(session: Session, dt: float | None = None) -> Session:
    session.tick(dt)
    return session


def score(session: Session) -> float:
    """Final score of an escaped interactive session; lower is better."""
    if session.outcome != PLAYER_ESCAPED or session.score is None:
        raise SessionStateError(f"score undefined for outcome {session.outcome!r}")
    return session.score


@dataclass(frozen=True)
class AgentResult:
    id: str
    familiar: bool
    gamer: bool
    intent: str  # the intent drawn at session start
    status: str
    exit_id: str | None
    escape_time: float | None  # seconds since the alarm
    nearest_exit_id: str | None

    @property
    def chose_nearest(self) -> bool | None:
        if self.status != ESCAPED or self.nearest_exit_id is None:
            return None
        return self.exit_id == self.nearest_exit_id


@dataclass(frozen=True)
class SessionResult:
    scenario: str
    seed: int
    population: PopulationSpec
    outcome: str
    truncated: bool
    agents: tuple[AgentResult, ...]
    events: tuple[EventRecord, ...]

    def event_lines(self) -> list[str]:
        return [e.to_line() for e in self.events]

    def digest(self) -> str:
        return log_digest(self.event_lines())


def run_headless(
    spec: ScenarioSpec,
    config: SimConfig,
    population: PopulationSpec | None = None,
    seed: int | None = None,
) -> SessionResult:
    """Batch analogue of an interactive run: the fire input fires at t=0 and
    ticks run until every agent escaped or was trapped, or the time cap.
    Identical seeds give bit-identical event logs."""
    cfg = replace(config, seed=seed) if seed is not None else config
    session = new_session(spec, cfg, HEADLESS, population)
    session.apply_input(PlayerInput("start_fire"))
    max_ticks = int(round(cfg.time_cap / cfg.tick_dt))
    while session.outcome == RUNNING and session.tick_no < max_ticks:
        session.tick()
    session.end_truncated()
    alarm_t = session.timer_origin or 0.0
    results = tuple(
        AgentResult(
            id=a.id,
            familiar=a.profile.familiar,
            gamer=a.profile.gamer,
            intent=session.initial_intents[i],
            status=a.status,
            exit_id=a.exit_id,
            escape_time=(round(a.escape_time - alarm_t, 6) if a.escape_time is not None else None),
            nearest_exit_id=session.nearest_at_spawn[i],
        )
        for i, a in enumerate(session.agents)
    )
    return SessionResult(
        scenario=spec.name,
        seed=cfg.seed,
        population=session.population,
        outcome=session.outcome,
        truncated=session.outcome == TRUNCATED,
        agents=results,
        events=tuple(session.log),
    )


# ---------------------------------------------------------------------------
# Calibration

def calibration_error(game_time: float, real_time: float) -> float:
    """Relative deviation of simulated from measured traversal time:
    1 - game_time / real_time."""
    if real_time <= 0:
        raise ValueError(f"real_time must be positive, got {real_time}")
    return 1.0 - game_time / real_time


def walk_route(spec: ScenarioSpec, route: Route, profile: AgentProfile, tick_dt: float = 0.1) -> float:
    """Time for a lone occupant to walk ``route`` (no fire, no congestion),
    using the exact per-tick movement kernel the simulation runs on."""
    if route.steps == 0:
        return 0.0
    w = spec.width
    flat = [r * w + c for r, c in route.cells]
    route_cells = np.asarray(flat, dtype=np.int32)
    route_offs = np.asarray([0, len(flat)], dtype=np.int32)
    pos = np.zeros(1, dtype=np.int32)
    progress = np.zeros(1, dtype=np.float64)
    speed = np.asarray([profile.speed], dtype=np.float64)
    stairf = np.asarray([profile.stair_factor], dtype=np.float64)
    status = np.asarray([kernels.STATUS_EVACUATING], dtype=np.uint8)
    occ = np.full(spec.height * spec.width, -1, dtype=np.int32)
    occ[flat[0]] = 0
    burning = np.zeros(spec.height * spec.width, dtype=np.uint8)
    last = len(flat) - 1
    cap = int(route.length / (profile.speed * profile.stair_factor * tick_dt) * 4) + 100
    ticks = 0
    while int(pos[0]) < last and int(status[0]) == kernels.STATUS_EVACUATING and ticks < cap:
        kernels.advance_agents(
            route_cells, route_offs, pos, progress, speed, stairf, status,
            occ, spec.stair_flat, spec.exit_flat, burning, spec.cell_size, tick_dt,
        )
        ticks += 1
    if int(pos[0]) < last and int(status[0]) != kernels.STATUS_ESCAPED:
        raise RuntimeError(f"route walk did not finish within {cap} ticks")
    return round(ticks * tick_dt, 6)


def calibration_report(
    spec: ScenarioSpec,
    paths=None,
    profile: AgentProfile | None = None,
    tick_dt: float = 0.1,
) -> list[CalibrationRecord]:
    """Traverse each calibration path headless (single occupant, no fire)
    and compare the measured game time against the recorded real time."""
    if paths is None:
        paths = spec.calibration_paths
    if profile is None:
        profile = AgentProfile()
    records = []
    for p in paths:
        route = shortest_path(spec, p.frm, p.to)
        if route is None:
            records.append(
                CalibrationRecord(p.id, p.declared_length, p.real_time, None, None, "endpoints disconnected")
            )
            continue
        game_time = walk_route(spec, route, profile, tick_dt)
        if p.real_time is None:
            records.append(
                CalibrationRecord(p.id, p.declared_length, None, game_time, None, "no real time recorded")
            )
            continue
        records.append(
            CalibrationRecord(
                p.id,
                p.declared_length,
                p.real_time,
                game_time,
                calibration_error(game_time, p.real_time),
            )
        )
    return records


def calibration_csv(records) -> str:
    lines = ["path,distance_m,real_time_s,subject_speed_mps,game_time_s,error_pct,note"]
    for r in records:
        rt = f"{r.real_time:.2f}" if r.real_time is not None else ""
        sp = f"{r.subject_speed:.3f}" if r.subject_speed is not None else ""
        gt = f"{r.game_time:.2f}" if r.game_time is not None else ""
        err = f"{r.error * 100:.2f}" if r.error is not None else ""
        lines.append(f"{r.path_id},{r.distance:.1f},{rt},{sp},{gt},{err},{r.note}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Experiment harness

@dataclass
class CategoryStats:
    count: int = 0
    escaped: int = 0
    trapped: int = 0
    truncated: int = 0
    escape_times: list[float] = field(default_factory=list)

    @property
    def mean_escape(self) -> float | None:
        return sum(self.escape_times) / len(self.escape_times) if self.escape_times else None

    @property
    def min_escape(self) -> float | None:
        return min(self.escape_times) if self.escape_times else None

    @property
    def max_escape(self) -> float | None:
        return max(self.escape_times) if self.escape_times else None


@dataclass
class ExperimentResult:
    table: ContingencyTable
    stats: dict[str, CategoryStats]
    trials: int
    seed: int

    def stats_csv(self) -> str:
        lines = ["category,count,escaped,trapped,truncated,mean_escape_s,min_escape_s,max_escape_s"]
        for name in ("familiar_gamer", "familiar_nongamer", "unfamiliar_gamer", "unfamiliar_nongamer"):
            s = self.stats[name]
            mean = f"{s.mean_escape:.2f}" if s.mean_escape is not None else ""
            mn = f"{s.min_escape:.2f}" if s.min_escape is not None else ""
            mx = f"{s.max_escape:.2f}" if s.max_escape is not None else ""
            lines.append(f"{name},{s.count},{s.escaped},{s.trapped},{s.truncated},{mean},{mn},{mx}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        return self.table.to_csv() + "\n" + self.stats_csv()


def run_experiment(
    spec: ScenarioSpec,
    config: SimConfig,
    population: PopulationSpec | None = None,
    trials: int = 1,
    seed: int = 0,
) -> ExperimentResult:
    """Run ``trials`` headless sessions and tally exit choice by familiarity
    plus per-category escape-time statistics. Per-trial seeds derive from
    the master seed, so results are reproducible and trial-order free."""
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    if population is None:
        population = PopulationSpec.survey_sample()
    table = ContingencyTable()
    stats = {
        name: CategoryStats() for name, _, _, _ in population.categories()
    }
    for t in range(trials):
        res = run_headless(spec, config, population, seed=derive_seed(seed, f"trial:{t}"))
        for a in res.agents:
            name = (
                ("familiar_" if a.familiar else "unfamiliar_")
                + ("gamer" if a.gamer else "nongamer")
            )
            s = stats[name]
            s.count += 1
            if a.status == ESCAPED:
                s.escaped += 1
                s.escape_times.append(a.escape_time)
            elif a.status == TRAPPED:
                s.trapped += 1
            else:
                s.truncated += 1
            if a.chose_nearest is not None:
                table.add(a.familiar, a.chose_nearest)
    return ExperimentResult(table=table, stats=stats, trials=trials, seed=seed)


# ---------------------------------------------------------------------------
# Replay

@dataclass(frozen=True)
class ReplayResult:
    outcome: str
    score: float | None
    digest: str
    stored_digest: str
    stored_score: float | None

    @property
    def matches(self) -> bool:
        return self.digest == self.stored_digest and self.score == self.stored_score


def replay_events(lines) -> ReplayResult:
    """Re-run a persisted event log from its stored seed and input trace;
    the replayed session must reproduce the original score and log digest."""
    lines = [line for line in lines if line.strip()]
    events = [EventRecord.from_line(line) for line in lines]
    if not events or events[0].kind != "session_start":
        raise ValueError("event log does not begin with session_start")
    start = events[0].payload
    from evacsim.scenario import parse_scenario

    spec = parse_scenario(start["scenario_doc"])
    cfgd = start["config"]
    config = SimConfig(
        tick_dt=cfgd["tick_dt"],
        fire=FireConfig(spread_interval=cfgd["spread_interval"]),
        behavior=BehaviorParams(*cfgd["behavior"]),
        seed=start["seed"],
        fire_enabled=cfgd["fire_enabled"],
        time_cap=cfgd["time_cap"],
    )
    population = PopulationSpec(*start["population"])
    player_profile = None
    if start["player"] is not None:
        player_profile = AgentProfile(
            familiar=start["player"]["familiar"], gamer=start["player"]["gamer"]
        )
    session = new_session(
        spec, config, start["mode"], population, player_profile=player_profile
    )
    inputs = [e for e in events[1:] if e.kind == "input"]
    last_tick = events[-1].tick
    for e in inputs:
        while session.tick_no < e.tick and session.outcome == RUNNING:
            session.tick()
        if session.outcome != RUNNING:
            break
        p = e.payload
        session.apply_input(PlayerInput(p["input"], p.get("dir"), p.get("seq")))
    max_ticks = max(last_tick, int(round(config.time_cap / config.tick_dt)))
    while session.outcome == RUNNING and session.tick_no < last_tick:
        session.tick()
    if session.outcome == RUNNING and session.tick_no >= int(round(config.time_cap / config.tick_dt)):
        session.end_truncated()
    stored_score = None
    for e in events:
        if e.kind == "session_end":
            stored_score = e.payload.get("score")
    return ReplayResult(
        outcome=session.outcome,
        score=session.score,
        digest=session.digest(),
        stored_digest=log_digest(lines),
        stored_score=stored_score,
    )
