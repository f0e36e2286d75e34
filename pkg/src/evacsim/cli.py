"""Operator command line.

Subcommands:

    evacsim validate <file>              check a scenario, print findings
    evacsim calibrate <file>             traverse calibration paths, CSV out
    evacsim experiment <file> [...]      batch sessions -> contingency CSV
    evacsim run <file> [...]             one headless session, summary out
    evacsim replay <events.log>          re-run a stored log, verify score
    evacsim serve [...]                  start the interactive game server

Exit status: 0 success, 1 findings or failed checks, 2 usage errors
(including missing files). Scenario arguments accept a path to a *.scn
file or the name of a bundled scenario. The data directory for persisted
sessions comes from --data or the EVACSIM_DATA environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from evacsim import __version__
from evacsim import scenario as scenario_mod
from evacsim import sim as sim_mod
from evacsim.agents import AgentProfile, BehaviorParams
from evacsim.errors import EvacsimError, ScenarioSemanticError, ScenarioSyntaxError
from evacsim.fire import FireConfig
from evacsim.scenario import parse_scenario, validate
from evacsim.sim import PopulationSpec, SimConfig


def _load_scenario_arg(parser: argparse.ArgumentParser, ref: str, check: bool = True):
    """Resolve a scenario argument: a readable file path or a bundled name.
    Unknown references are usage errors (exit 2)."""
    path = Path(ref)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    elif ref in scenario_mod.bundled_scenario_names():
        text = scenario_mod.bundled_scenario_text(ref)
    else:
        parser.error(f"scenario not found: {ref}")
    return text


def _population_from_args(args) -> PopulationSpec:
    counts = (
        args.familiar_gamers,
        args.familiar_nongamers,
        args.unfamiliar_gamers,
        args.unfamiliar_nongamers,
    )
    if all(c is None for c in counts):
        return PopulationSpec.survey_sample()
    return PopulationSpec(*(c or 0 for c in counts))


def _add_population_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--familiar-gamers", type=int, default=None, metavar="N")
    p.add_argument("--familiar-nongamers", type=int, default=None, metavar="N")
    p.add_argument("--unfamiliar-gamers", type=int, default=None, metavar="N")
    p.add_argument("--unfamiliar-nongamers", type=int, default=None, metavar="N")


def _add_behavior_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p-nearest-familiar", type=float, default=None, metavar="P",
                   help="probability a familiar occupant heads for the nearest exit")
    p.add_argument("--p-retrace-unfamiliar", type=float, default=None, metavar="P",
                   help="probability an unfamiliar occupant retraces the entry route")


def _behavior_from_args(args) -> BehaviorParams:
    defaults = BehaviorParams()
    return BehaviorParams(
        p_nearest_given_familiar=(
            args.p_nearest_familiar if args.p_nearest_familiar is not None
            else defaults.p_nearest_given_familiar
        ),
        p_retrace_given_unfamiliar=(
            args.p_retrace_unfamiliar if args.p_retrace_unfamiliar is not None
            else defaults.p_retrace_given_unfamiliar
        ),
    )


def cmd_validate(parser, args) -> int:
    text = _load_scenario_arg(parser, args.scenario)
    try:
        spec = parse_scenario(text, check=False)
    except ScenarioSyntaxError as exc:
        print(f"syntax error: {exc}")
        return 1
    report = validate(spec)
    for f in report.findings:
        print(str(f))
    if report.ok:
        print("OK" if not report.findings else "OK (warnings only)")
        return 0
    return 1


def cmd_calibrate(parser, args) -> int:
    text = _load_scenario_arg(parser, args.scenario)
    spec = _parse_or_fail(text)
    profile = AgentProfile(speed=args.speed, stair_factor=args.stair_factor)
    records = sim_mod.calibration_report(spec, profile=profile, tick_dt=args.tick_dt)
    if not records:
        print("warning: scenario declares no calibration paths", file=sys.stderr)
    sys.stdout.write(sim_mod.calibration_csv(records))
    return 0


def cmd_experiment(parser, args) -> int:
    text = _load_scenario_arg(parser, args.scenario)
    spec = _parse_or_fail(text)
    config = SimConfig(
        fire=FireConfig(spread_interval=args.spread_interval),
        behavior=_behavior_from_args(args),
        fire_enabled=args.fire,
        time_cap=args.time_cap,
    )
    result = sim_mod.run_experiment(
        spec, config, _population_from_args(args), trials=args.trials, seed=args.seed
    )
    sys.stdout.write(result.to_csv())
    return 0


def cmd_run(parser, args) -> int:
    text = _load_scenario_arg(parser, args.scenario)
    spec = _parse_or_fail(text)
    config = SimConfig(
        fire=FireConfig(spread_interval=args.spread_interval),
        fire_enabled=not args.no_fire,
        time_cap=args.time_cap,
    )
    result = sim_mod.run_headless(spec, config, _population_from_args(args), seed=args.seed)
    print(f"scenario:  {result.scenario}")
    print(f"seed:      {result.seed}")
    print(f"outcome:   {result.outcome}")
    counts = {"escaped": 0, "trapped": 0, "evacuating": 0}
    for a in result.agents:
        counts[a.status] = counts.get(a.status, 0) + 1
    print(f"agents:    {len(result.agents)} "
          f"(escaped {counts.get('escaped', 0)}, trapped {counts.get('trapped', 0)}, "
          f"unresolved {counts.get('evacuating', 0)})")
    for a in result.agents:
        esc = f"{a.escape_time:.1f}s via {a.exit_id}" if a.escape_time is not None else a.status
        print(f"  {a.id}  familiar={str(a.familiar).lower():5s} intent={a.intent:13s} {esc}")
    if args.save is not None:
        out = Path(args.save)
        out.mkdir(parents=True, exist_ok=True)
        log_path = out / "events.log"
        log_path.write_text("\n".join(result.event_lines()) + "\n", encoding="utf-8")
        print(f"log:       {log_path}")
        print(f"digest:    {result.digest()}")
    return 0


def cmd_replay(parser, args) -> int:
    path = Path(args.log)
    if path.is_dir():
        path = path / "events.log"
    if not path.is_file():
        parser.error(f"log not found: {args.log}")
    lines = path.read_text(encoding="utf-8").splitlines()
    result = sim_mod.replay_events(lines)
    print(f"outcome:   {result.outcome}")
    print(f"score:     {result.score if result.score is not None else '-'}")
    print(f"digest:    {result.digest}")
    if result.matches:
        print("replay matches the stored log")
        return 0
    print("MISMATCH: replay diverged from the stored log")
    print(f"  stored score:  {result.stored_score}")
    print(f"  stored digest: {result.stored_digest}")
    return 1


def cmd_serve(parser, args) -> int:
    from evacsim import server as server_mod

    host, _, port_txt = args.bind.rpartition(":")
    if not host or not port_txt.isdigit():
        parser.error(f"--bind must be HOST:PORT, got {args.bind!r}")
    data_dir = args.data or os.environ.get("EVACSIM_DATA")
    static_dir = args.static
    if static_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = candidate if candidate.is_dir() else None
    server_mod.serve(
        host=host,
        port=int(port_txt),
        scenario_dirs=([args.scenarios] if args.scenarios else ()),
        data_dir=data_dir,
        tick_hz=args.tick_hz,
        stride=args.stride,
        master_seed=args.seed,
        static_dir=static_dir,
    )
    return 0


def _parse_or_fail(text: str):
    try:
        return parse_scenario(text)
    except (ScenarioSyntaxError, ScenarioSemanticError) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evacsim",
        description="Deterministic building-evacuation simulator and serious game.",
    )
    parser.add_argument("--version", action="version", version=f"evacsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("scenario")

    p = sub.add_parser("calibrate", help="measure calibration paths, emit CSV")
    p.add_argument("scenario")
    p.add_argument("--speed", type=float, default=1.5, help="profile speed, m/s")
    p.add_argument("--stair-factor", type=float, default=1.0)
    p.add_argument("--tick-dt", type=float, default=0.1)

    p = sub.add_parser("experiment", help="batch sessions, emit contingency + stats CSV")
    p.add_argument("scenario")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fire", action="store_true",
                   help="ignite a random room each trial (default: off, pure route choice)")
    p.add_argument("--spread-interval", type=float, default=2.0)
    p.add_argument("--time-cap", type=float, default=600.0)
    _add_population_flags(p)
    _add_behavior_flags(p)

    p = sub.add_parser("run", help="run one headless session")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-cap", type=float, default=600.0)
    p.add_argument("--no-fire", action="store_true")
    p.add_argument("--spread-interval", type=float, default=2.0)
    p.add_argument("--save", metavar="DIR", default=None, help="persist the event log")
    _add_population_flags(p)

    p = sub.add_parser("replay", help="re-run a persisted event log")
    p.add_argument("log", help="events.log file or a session directory")

    p = sub.add_parser("serve", help="start the interactive session server")
    p.add_argument("--bind", default="127.0.0.1:8000", metavar="HOST:PORT")
    p.add_argument("--data", default=None, help="session store directory (or $EVACSIM_DATA)")
    p.add_argument("--scenarios", default=None, help="extra scenario directory")
    p.add_argument("--tick-hz", type=float, default=10.0)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="master seed for session seeds")
    p.add_argument("--static", default=None, help="static client assets to serve at /")

    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "calibrate": cmd_calibrate,
    "experiment": cmd_experiment,
    "run": cmd_run,
    "replay": cmd_replay,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](parser, args)
    except EvacsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
