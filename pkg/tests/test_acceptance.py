"""Acceptance suite: every release-gating criterion, each at its stated
tolerance. Run with ``pytest tests/test_acceptance.py -v -s`` to see one
PASS line per criterion."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from evacsim import kernels
from evacsim.agents import AgentProfile, BehaviorParams, choose_intent
from evacsim.fire import FireConfig, ignite, spread_once
from evacsim.scenario import parse_scenario, shortest_path
from evacsim.server import SessionStore
from evacsim.sim import (
    PopulationSpec,
    SimConfig,
    calibration_error,
    calibration_report,
    replay_events,
    run_headless,
)

import oracle

README = Path(__file__).resolve().parents[1] / "README.md"


def _ok(line: str) -> None:
    print(f"[PASS] {line}")


def test_error_formula_exact_on_recorded_inputs():
    # recorded (game, real) pairs must reproduce the published error
    # percentages to within 0.005 percentage points
    cases = [((15.86, 17.53), 9.53), ((19.28, 21.50), 10.33), ((48.08, 55.91), 14.00)]
    for (game, real), want_pct in cases:
        got_pct = calibration_error(game, real) * 100.0
        assert abs(got_pct - want_pct) <= 0.005, (game, real, got_pct, want_pct)
    _ok("error formula: 9.53 / 10.33 / 14.00 % reproduced from recorded inputs within ±0.005 pp")


def test_subject_speeds(dei):
    recs = {r.path_id: r for r in calibration_report(dei)}
    assert abs(recs["P2"].subject_speed - 1.44) <= 0.005
    assert abs(recs["P3"].subject_speed - 1.29) <= 0.005
    # the P1 speed computes to 1.369 m/s from 24 m / 17.53 s; the published
    # table says 1.34, a discrepancy we pin and document rather than copy
    assert round(recs["P1"].subject_speed, 3) == 1.369
    assert "1.369" in README.read_text(encoding="utf-8")
    _ok("subject speeds: P2 1.44, P3 1.29 (±0.005); P1 pinned at 1.369 and documented")


def test_kinematics_of_calibration_paths(dei):
    recs = {r.path_id: r for r in calibration_report(dei)}
    for pid, want in (("P1", 16.00), ("P2", 31.0 / 1.5), ("P3", 48.00)):
        assert abs(recs[pid].game_time - want) <= 0.1, (pid, recs[pid].game_time)
    _ok("kinematics: P1/P2/P3 traverse in 16.00 / 20.67 / 48.00 s ± one tick")


def test_behavior_proportions():
    rng = random.Random(20240817)
    params = BehaviorParams()
    n = 10_000
    fam = sum(
        1 for _ in range(n)
        if choose_intent(AgentProfile(familiar=True), params, rng) == "nearest_exit"
    )
    unf = sum(
        1 for _ in range(n)
        if choose_intent(AgentProfile(familiar=False), params, rng) == "retrace_entry"
    )
    assert abs(fam / n - 11 / 13) <= 0.02, fam / n
    assert abs(unf / n - 11 / 17) <= 0.02, unf / n
    _ok(f"behavior proportions: familiar nearest {fam / n:.3f} (want 0.846 ± 0.02), "
        f"unfamiliar retrace {unf / n:.3f} (want 0.647 ± 0.02) at n=10000")


def test_fire_property_suite():
    rng = random.Random(555)
    cases = 0
    while cases < 1000:
        h, w = rng.randint(3, 12), rng.randint(3, 12)
        doc = oracle.random_grid_doc(rng, h, w, wall_p=0.3)
        doc += f"room whole ignitable=true rect=0,0,{h - 1},{w - 1}\n"
        spec = parse_scenario(doc, check=False)
        cells = oracle.passable_cells(spec)
        floorish = [c for c in cells if spec.cell(c).kind != 5]
        if not floorish:
            continue
        cases += 1
        seed = rng.randrange(2**31)
        first = ignite(spec, FireConfig(), random.Random(seed))
        again = ignite(spec, FireConfig(), random.Random(seed))
        assert first.burning == again.burning  # seed determinism
        (start,) = first.burning
        state, other = first, again
        prev = state.burning
        for step in range(1, 6):
            state, _ = spread_once(state, spec)
            other, _ = spread_once(other, spec)
            assert state.burning == other.burning  # step determinism
            assert prev <= state.burning  # monotone growth
            assert all(spec.cell(c).passable for c in state.burning)  # containment
            assert all(
                oracle.grid_distance(c, start) <= step for c in state.burning
            )  # bounded radius
            prev = state.burning
    _ok(f"fire properties: {cases} randomized cases, zero violations "
        "(monotone, contained, bounded, deterministic)")


def test_path_oracle_on_200_random_grids():
    rng = random.Random(31337)
    checked_pairs = 0
    for _ in range(200):
        h, w = rng.randint(2, 12), rng.randint(2, 12)
        spec = parse_scenario(oracle.random_grid_doc(rng, h, w), check=False)
        cells = oracle.passable_cells(spec)
        for src in cells:
            want = oracle.bfs_field(spec, src)
            got = kernels.dist_field(spec.passable_grid, src[0], src[1])
            for dst in cells:
                want_d = want.get(dst, -1)
                assert int(got[dst[0], dst[1]]) == want_d
                checked_pairs += 1
        # structural spot-checks of full routes
        for _ in range(min(3, len(cells))):
            src, dst = rng.choice(cells), rng.choice(cells)
            route = shortest_path(spec, src, dst)
            want_d = oracle.bfs_field(spec, src).get(dst)
            if want_d is None:
                assert route is None
            else:
                assert route.steps == want_d
                assert route.cells[0] == src and route.cells[-1] == dst
                for a, b in zip(route.cells, route.cells[1:]):
                    assert oracle.grid_distance(a, b) == 1
                    assert spec.cell(b).passable
    _ok(f"path oracle: 200 random grids, {checked_pairs} endpoint pairs match BFS")


def test_rerouting_and_trapping(reroute, trap):
    cfg = SimConfig(behavior=BehaviorParams(1.0, 0.0))
    res = run_headless(reroute, cfg, PopulationSpec(familiar_nongamers=1), seed=5)
    (agent,) = res.agents
    assert agent.status == "escaped"
    assert agent.nearest_exit_id == "a" and agent.exit_id == "b"
    for seed in range(4):
        res = run_headless(trap, cfg, PopulationSpec(familiar_nongamers=1), seed=seed)
        assert res.agents[0].status == "trapped"
    _ok("re-routing: blocked nearest corridor forces the other exit (escaped); "
        "both corridors blocked reports trapped")


def test_replay_fidelity_50_sessions(dei, tmp_path):
    store = SessionStore(tmp_path / "store")
    rng = random.Random(808)
    for i in range(50):
        pop = PopulationSpec(
            familiar_gamers=rng.randint(0, 3),
            familiar_nongamers=rng.randint(0, 3),
            unfamiliar_gamers=rng.randint(0, 3),
            unfamiliar_nongamers=rng.randint(1, 3),
        )
        cfg = SimConfig(fire_enabled=rng.random() < 0.7)
        res = run_headless(dei, cfg, pop, seed=rng.randrange(2**31))
        sid = f"sess{i:03d}"
        store.save(sid, {"id": sid, "outcome": res.outcome, "digest": res.digest()}, res.event_lines())
        rep = replay_events(store.load_event_lines(sid))
        assert rep.matches, sid
        assert rep.digest == store.load_summary(sid)["digest"]
        assert rep.score == rep.stored_score  # None == None for headless runs
    _ok("replay fidelity: 50 persisted headless sessions replayed to identical "
        "scores and event-log digests")


def test_survey_tables_are_model_parameters():
    # the observed-proportion tables enter as parameters and output schema,
    # not as outcomes to reproduce at desk scale; pin them
    params = BehaviorParams()
    assert params.p_nearest_given_familiar == pytest.approx(11 / 13)
    assert params.p_retrace_given_unfamiliar == pytest.approx(11 / 17)
    pop = PopulationSpec.survey_sample()
    assert pop.counts() == [8, 6, 5, 11] and pop.total == 30
    text = README.read_text(encoding="utf-8")
    assert "11/13" in text and "11/17" in text
    _ok("survey tables: consumed as behaviour parameters (11/13, 11/17) and the "
        "30-person population split (8/6/5/11); documented, not re-measured")
