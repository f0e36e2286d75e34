"""Session server: interactive play over a WebSocket, a small REST API and
a persistent store of finished sessions.

The server is authoritative: clients only send inputs; every state change
comes out of the session engine and is logged there. One connection hosts
at most one session. Messages are JSON, one object per WebSocket frame.

Client -> server (every message carries a per-connection ``seq`` that must
strictly increase; stale messages are dropped and counted):

    {"kind": "join", "scenario": "dei-analog",
     "profile": {"familiar": false, "gamer": false}, "seq": 1}
    {"kind": "input", "input": "move", "dir": "up", "seq": 2}
    {"kind": "input", "input": "jump", "seq": 3}
    {"kind": "input", "input": "start_fire", "seq": 4}
    {"kind": "leave", "seq": 5}

Server -> client:

    {"kind": "joined", "session": id, "scenario": {name, cell_size, rows,
     exits, signs, spawn}}
    {"kind": "state", "tick", "elapsed", "timer_running", "player" [r, c],
     "player_status", "agents" [[r, c], ...], "burning" [[r, c], ...],
     "dropped_inputs"}
    {"kind": "ended", "outcome", "score"}
    {"kind": "error", "code", "text"}

State snapshots are emitted every ``stride`` ticks, each a pure read of one
tick's session state. Completed sessions are persisted as one directory per
session holding ``summary.json`` and ``events.log`` (one event per line).

REST: GET /api/scenarios, /api/scenarios/{name}, /api/sessions,
/api/sessions/{id}, /api/sessions/{id}/events, /api/aggregate.
"""

from __future__ import annotations

import asyncio
import json
import logging
import secrets
import time
import uuid
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from evacsim import scenario as scenario_mod
from evacsim import sim as sim_mod
from evacsim.agents import AgentProfile
from evacsim.errors import EvacsimError
from evacsim.scenario import ScenarioSpec, grid_kind_rows, parse_scenario
from evacsim.sim import (
    RUNNING,
    ContingencyTable,
    PlayerInput,
    PopulationSpec,
    Session,
    SimConfig,
)

log = logging.getLogger("evacsim.server")

DIR_NAMES = frozenset(sim_mod.DIRECTIONS)


class ScenarioRegistry:
    """Named scenarios: everything bundled with the package plus any *.scn
    files from extra directories (which shadow bundled names)."""

    def __init__(self, extra_dirs=()):
        self._docs: dict[str, str] = {}
        self._specs: dict[str, ScenarioSpec] = {}
        for name in scenario_mod.bundled_scenario_names():
            self._docs[name] = scenario_mod.bundled_scenario_text(name)
        for d in extra_dirs:
            for path in sorted(Path(d).glob("*.scn")):
                text = path.read_text(encoding="utf-8")
                spec = parse_scenario(text)
                self._docs[spec.name] = text
                self._specs[spec.name] = spec

    def names(self) -> list[str]:
        return sorted(self._docs)

    def document(self, name: str) -> str:
        return self._docs[name]

    def spec(self, name: str) -> ScenarioSpec:
        if name not in self._specs:
            self._specs[name] = parse_scenario(self._docs[name])
        return self._specs[name]

    def __contains__(self, name: str) -> bool:
        return name in self._docs


class SessionStore:
    """Append-only store: one directory per terminal session. Safe for
    concurrent writers because every session owns its own directory."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def save(self, session_id: str, summary: dict, event_lines) -> Path:
        d = self.root / session_id
        d.mkdir(parents=True, exist_ok=True)
        (d / "events.log").write_text("\n".join(event_lines) + "\n", encoding="utf-8")
        (d / "summary.json").write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        return d

    def ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if (p / "summary.json").is_file())

    def load_summary(self, session_id: str) -> dict:
        return json.loads((self.root / session_id / "summary.json").read_text(encoding="utf-8"))

    def load_event_lines(self, session_id: str) -> list[str]:
        text = (self.root / session_id / "events.log").read_text(encoding="utf-8")
        return [line for line in text.splitlines() if line.strip()]

    def summaries(self) -> list[dict]:
        return [self.load_summary(i) for i in self.ids()]

    def aggregate(self) -> ContingencyTable:
        """Exit choice by familiarity over all stored escaped sessions."""
        table = ContingencyTable()
        for s in self.summaries():
            if s.get("outcome") != "escaped" or s.get("chose_nearest") is None:
                continue
            table.add(bool(s.get("familiar")), bool(s["chose_nearest"]))
        return table


@dataclass
class LiveSession:
    id: str
    session: Session
    stride: int = 1
    last_seq: int | None = None
    dropped_inputs: int = 0
    pending: list[PlayerInput] = field(default_factory=list)
    persisted: bool = False


class SessionHub:
    """Protocol logic, independent of any transport or clock: join checks,
    sequence filtering, input queueing, per-tick snapshots and persistence.
    The WebSocket layer is a thin async wrapper around this."""

    def __init__(
        self,
        registry: ScenarioRegistry,
        store: SessionStore | None = None,
        population: PopulationSpec | None = None,
        config: SimConfig | None = None,
        stride: int = 1,
        master_seed: int | None = None,
    ):
        self.registry = registry
        self.store = store
        self.population = population if population is not None else PopulationSpec(familiar_nongamers=1)
        self.config = config if config is not None else SimConfig()
        self.stride = max(1, int(stride))
        self.master_seed = master_seed
        self._counter = 0

    def _next_seed(self) -> int:
        self._counter += 1
        if self.master_seed is not None:
            return sim_mod.derive_seed(self.master_seed, f"session:{self._counter}")
        return secrets.randbits(32)

    # -- protocol ----------------------------------------------------------

    def check_seq(self, live: LiveSession | None, msg: dict) -> bool:
        """Enforce strictly increasing per-connection sequence numbers.
        Messages without usable seq, or stale ones, are dropped (counted
        against the live session when there is one)."""
        seq = msg.get("seq")
        if not isinstance(seq, int):
            if live is not None:
                live.dropped_inputs += 1
            return False
        if live is not None and live.last_seq is not None and seq <= live.last_seq:
            live.dropped_inputs += 1
            return False
        if live is not None:
            live.last_seq = seq
        return True

    def join(self, msg: dict) -> tuple[LiveSession, dict]:
        """Create an interactive session for a join message and build the
        joined reply (full scenario snapshot so the client renders locally).
        Raises KeyError for unknown scenarios."""
        name = msg.get("scenario")
        if not isinstance(name, str) or name not in self.registry:
            raise KeyError(name)
        profile_flags = msg.get("profile") or {}
        profile = AgentProfile(
            familiar=bool(profile_flags.get("familiar", False)),
            gamer=bool(profile_flags.get("gamer", False)),
        )
        spec = self.registry.spec(name)
        seed = self._next_seed()
        session = sim_mod.new_session(
            spec,
            dc_replace(self.config, seed=seed),
            sim_mod.INTERACTIVE,
            self.population,
            player_profile=profile,
        )
        live = LiveSession(
            id=f"{time.strftime('%Y%m%dT%H%M%S')}-{uuid.uuid4().hex[:8]}",
            session=session,
            stride=self.stride,
        )
        live.last_seq = msg.get("seq") if isinstance(msg.get("seq"), int) else None
        joined = {
            "kind": "joined",
            "session": live.id,
            "scenario": {
                "name": spec.name,
                "cell_size": spec.cell_size,
                "rows": grid_kind_rows(spec),
                "exits": [
                    {"id": ex.id, "kind": ex.kind, "cells": [list(c) for c in sorted(ex.cells)]}
                    for ex in sorted(spec.exits, key=lambda e: e.id)
                ],
                "signs": [
                    {"at": list(s.cell), "to": s.points_to} for s in spec.signs
                ],
                "spawn": list(session.player.cell),
            },
        }
        return live, joined

    def queue_input(self, live: LiveSession, msg: dict) -> dict | None:
        """Validate an input message and queue it for the next tick
        boundary. Returns an error message dict, or None when accepted."""
        if live.session.outcome != RUNNING:
            return error_msg("input_after_end", "session already ended")
        kind = msg.get("input")
        if kind == "move":
            d = msg.get("dir")
            if d not in DIR_NAMES:
                return error_msg("bad_message", f"unknown move direction {d!r}")
            live.pending.append(PlayerInput("move", d, msg.get("seq")))
        elif kind in ("jump", "start_fire"):
            live.pending.append(PlayerInput(kind, None, msg.get("seq")))
        else:
            return error_msg("bad_message", f"unknown input {kind!r}")
        return None

    def tick(self, live: LiveSession) -> list[dict]:
        """Apply queued inputs, advance one tick and return the messages to
        emit (a state snapshot every ``stride`` ticks, plus ended when the
        session just finished). Persists terminal sessions."""
        session = live.session
        if session.outcome != RUNNING:
            return []
        for inp in live.pending:
            if session.outcome != RUNNING:
                break
            try:
                session.apply_input(inp)
            except (EvacsimError, ValueError) as exc:
                log.warning("rejected input %s: %s", inp, exc)
        live.pending.clear()
        if session.outcome == RUNNING:
            session.tick()
        out: list[dict] = []
        if session.outcome == RUNNING:
            if session.tick_no % live.stride == 0:
                out.append(self.snapshot(live))
        else:
            out.append(self.snapshot(live))
            out.append({"kind": "ended", "outcome": session.outcome, "score": session.score})
            self.persist(live)
        return out

    def snapshot(self, live: LiveSession) -> dict:
        """A pure read of the current tick's session state."""
        s = live.session
        burning = s.fire.burning_sorted() if s.fire is not None else []
        return {
            "kind": "state",
            "tick": s.tick_no,
            "elapsed": s.elapsed,
            "timer_running": s.alarm_started and s.outcome == RUNNING,
            "outcome": s.outcome,
            "player": list(s.player.cell) if s.player else None,
            "player_status": s.player.status if s.player else None,
            "agents": [list(a.cell) for a in s.agents if a.status in ("evacuating", "idle", "trapped")],
            "burning": [list(c) for c in burning],
            "dropped_inputs": live.dropped_inputs,
        }

    def persist(self, live: LiveSession) -> None:
        if self.store is None or live.persisted or live.session.outcome == RUNNING:
            return
        s = live.session
        summary = {
            "id": live.id,
            "scenario": s.spec.name,
            "mode": s.mode,
            "seed": s.config.seed,
            "familiar": s.player.profile.familiar if s.player else None,
            "gamer": s.player.profile.gamer if s.player else None,
            "outcome": s.outcome,
            "score": s.score,
            "exit": s.player.exit_id if s.player else None,
            "nearest_exit": s.player_nearest,
            "chose_nearest": (
                (s.player.exit_id == s.player_nearest)
                if s.player and s.player.exit_id and s.player_nearest
                else None
            ),
            "started_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        try:
            self.store.save(live.id, summary, s.event_lines())
            live.persisted = True
        except OSError as exc:  # storage trouble must not kill the session
            log.error("failed to persist session %s: %s", live.id, exc)


def error_msg(code: str, text: str) -> dict:
    return {"kind": "error", "code": code, "text": text}


def _dump(msg: dict) -> str:
    return json.dumps(msg, sort_keys=True, separators=(",", ":"))


def create_app(
    scenario_dirs=(),
    data_dir=None,
    tick_hz: float = 10.0,
    stride: int = 1,
    population: PopulationSpec | None = None,
    config: SimConfig | None = None,
    master_seed: int | None = None,
    static_dir=None,
) -> FastAPI:
    """Build the ASGI app. ``tick_hz`` is the wall-clock tick rate for live
    sessions; the simulation step is config.tick_dt per tick regardless."""
    registry = ScenarioRegistry(scenario_dirs)
    store = SessionStore(data_dir) if data_dir is not None else None
    if config is None:
        config = SimConfig()
    hub = SessionHub(
        registry,
        store,
        population=population,
        config=config,
        stride=stride,
        master_seed=master_seed,
    )
    app = FastAPI(title="evacsim", version="0.1.0")
    app.state.hub = hub
    app.state.tick_period = 1.0 / tick_hz

    @app.get("/api/scenarios")
    def list_scenarios():
        return {"scenarios": registry.names()}

    @app.get("/api/scenarios/{name}")
    def get_scenario(name: str):
        if name not in registry:
            return JSONResponse({"error": "scenario_not_found"}, status_code=404)
        return {"name": name, "document": registry.document(name)}

    @app.get("/api/sessions")
    def list_sessions():
        if store is None:
            return {"sessions": []}
        return {"sessions": store.summaries()}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        if store is None or session_id not in store.ids():
            return JSONResponse({"error": "session_not_found"}, status_code=404)
        return store.load_summary(session_id)

    @app.get("/api/sessions/{session_id}/events")
    def get_session_events(session_id: str):
        if store is None or session_id not in store.ids():
            return JSONResponse({"error": "session_not_found"}, status_code=404)
        return PlainTextResponse("\n".join(store.load_event_lines(session_id)) + "\n")

    @app.get("/api/aggregate")
    def get_aggregate():
        table = store.aggregate() if store is not None else ContingencyTable()
        return {
            "familiar": {"nearest_exit": table.familiar_nearest, "other_exit": table.familiar_other},
            "unfamiliar": {
                "nearest_exit": table.unfamiliar_nearest,
                "other_exit": table.unfamiliar_other,
            },
        }

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        live: LiveSession | None = None
        send_q: asyncio.Queue = asyncio.Queue(maxsize=64)
        ticker_task: asyncio.Task | None = None

        async def offer(msg: dict) -> None:
            # bounded queue: drop the oldest snapshot for a slow client
            # (state is idempotent); ended/error always get through.
            if msg.get("kind") == "state" and send_q.full():
                try:
                    send_q.get_nowait()
                except asyncio.QueueEmpty:
                    pass
            await send_q.put(msg)

        async def sender() -> None:
            while True:
                msg = await send_q.get()
                await ws.send_text(_dump(msg))

        async def ticker() -> None:
            period = app.state.tick_period
            while live is not None and live.session.outcome == RUNNING:
                await asyncio.sleep(period)
                for msg in hub.tick(live):
                    await offer(msg)

        send_task = asyncio.create_task(sender())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("message must be an object")
                except ValueError:
                    await offer(error_msg("bad_message", "not a JSON object"))
                    continue
                if not hub.check_seq(live, msg):
                    continue
                kind = msg.get("kind")
                if kind == "join":
                    if live is not None:
                        await offer(error_msg("already_joined", "one session per connection"))
                        continue
                    try:
                        live, joined = hub.join(msg)
                    except KeyError:
                        await offer(error_msg("scenario_not_found", f"unknown scenario {msg.get('scenario')!r}"))
                        continue
                    await offer(joined)
                    ticker_task = asyncio.create_task(ticker())
                elif kind == "input":
                    if live is None:
                        await offer(error_msg("not_joined", "join a scenario first"))
                        continue
                    err = hub.queue_input(live, msg)
                    if err is not None:
                        await offer(err)
                elif kind == "leave":
                    break
                else:
                    await offer(error_msg("bad_message", f"unknown kind {kind!r}"))
        except WebSocketDisconnect:
            pass
        finally:
            if ticker_task is not None:
                ticker_task.cancel()
            send_task.cancel()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")

    return app


def serve(
    host: str = "127.0.0.1",
    port: int = 8000,
    **app_kwargs,
) -> None:
    """Run the server until interrupted."""
    import uvicorn

    app = create_app(**app_kwargs)
    uvicorn.run(app, host=host, port=port, log_level="info")
