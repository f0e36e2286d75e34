"""Backend parity: the compiled kernels must reproduce the pure-Python
reference bit for bit, on primitives and on whole-session event logs."""

from __future__ import annotations

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from evacsim.kernels import BACKEND, pure

try:
    from evacsim.kernels import _speed
except ImportError:
    _speed = None

needs_compiled = pytest.mark.skipif(_speed is None, reason="compiled kernels not built")


def _random_passable(rng, h, w, p_wall=0.3):
    return (rng.random((h, w)) > p_wall).astype(np.uint8)


@needs_compiled
def test_dist_field_parity():
    rng = np.random.default_rng(1)
    for _ in range(60):
        h, w = int(rng.integers(2, 20)), int(rng.integers(2, 20))
        passable = _random_passable(rng, h, w)
        src = (int(rng.integers(0, h)), int(rng.integers(0, w)))
        a = pure.dist_field(passable, *src)
        b = _speed.dist_field(passable, *src)
        assert np.array_equal(a, b)


@needs_compiled
def test_greedy_path_parity():
    rng = np.random.default_rng(2)
    for _ in range(60):
        h, w = int(rng.integers(2, 16)), int(rng.integers(2, 16))
        passable = _random_passable(rng, h, w, p_wall=0.25)
        tgt = (int(rng.integers(0, h)), int(rng.integers(0, w)))
        if not passable[tgt]:
            continue
        dist = pure.dist_field(passable, *tgt)
        for _ in range(5):
            src = (int(rng.integers(0, h)), int(rng.integers(0, w)))
            a = pure.greedy_path(dist, *src)
            b = _speed.greedy_path(dist, *src)
            if a is None or b is None:
                assert a is None and b is None
            else:
                assert np.array_equal(a, b)


@needs_compiled
def test_fire_front_parity():
    rng = np.random.default_rng(3)
    for _ in range(60):
        h, w = int(rng.integers(2, 20)), int(rng.integers(2, 20))
        passable = _random_passable(rng, h, w)
        burning = ((rng.random((h, w)) < 0.15) & (passable > 0)).astype(np.uint8)
        a = pure.fire_front(burning, passable)
        b = _speed.fire_front(burning, passable)
        assert np.array_equal(a, b)


def _random_agent_batch(rng, h, w, n_agents):
    passable = _random_passable(rng, h, w, p_wall=0.2)
    flat_floor = np.flatnonzero(passable.ravel())
    if len(flat_floor) < n_agents + 2:
        return None
    cells = []
    offs = [0]
    starts = rng.choice(flat_floor, size=n_agents, replace=False)
    for s in starts:
        tgt = int(rng.choice(flat_floor))
        dist = pure.dist_field(passable, tgt // w, tgt % w)
        path = pure.greedy_path(dist, int(s) // w, int(s) % w)
        if path is None:
            cells.append(int(s))
        else:
            cells.extend(int(r) * w + int(c) for r, c in path)
        offs.append(len(cells))
    occupancy = np.full(h * w, -1, dtype=np.int32)
    pos = np.zeros(n_agents, dtype=np.int32)
    for i in range(n_agents):
        occupancy[cells[offs[i]]] = i
    return dict(
        route_cells=np.asarray(cells, dtype=np.int32),
        route_offs=np.asarray(offs, dtype=np.int32),
        pos=pos,
        progress=rng.random(n_agents) * 0.4,
        speed=0.5 + rng.random(n_agents) * 2.0,
        stair_factor=0.5 + rng.random(n_agents) * 0.5,
        status=np.ones(n_agents, dtype=np.uint8),
        occupancy=occupancy,
        stair_mask=(rng.random(h * w) < 0.1).astype(np.uint8),
        exit_mask=(rng.random(h * w) < 0.05).astype(np.uint8),
        burning_mask=(rng.random(h * w) < 0.03).astype(np.uint8),
    )


@needs_compiled
def test_advance_agents_parity():
    rng = np.random.default_rng(4)
    for _ in range(30):
        h, w = int(rng.integers(6, 18)), int(rng.integers(6, 18))
        batch = _random_agent_batch(rng, h, w, n_agents=int(rng.integers(1, 6)))
        if batch is None:
            continue
        a = {k: v.copy() for k, v in batch.items()}
        b = {k: v.copy() for k, v in batch.items()}
        for _ in range(40):
            pure.advance_agents(**a, cell_size=0.5, dt=0.1)
            _speed.advance_agents(**b, cell_size=0.5, dt=0.1)
            for key in ("pos", "progress", "status", "occupancy"):
                assert np.array_equal(a[key], b[key]), key


SESSION_SCRIPT = """
import json
from evacsim import KERNEL_BACKEND
from evacsim.scenario import load_bundled_scenario
from evacsim.sim import SimConfig, PopulationSpec, run_headless
spec = load_bundled_scenario("dei-analog")
res = run_headless(spec, SimConfig(), PopulationSpec.survey_sample(), seed=1234)
print(json.dumps({"backend": KERNEL_BACKEND, "digest": res.digest()}))
"""


@needs_compiled
def test_whole_session_digest_matches_across_backends():
    outs = {}
    for forced in ("0", "1"):
        env = dict(os.environ, EVACSIM_PURE=forced)
        proc = subprocess.run(
            [sys.executable, "-c", SESSION_SCRIPT], capture_output=True, text=True, env=env
        )
        assert proc.returncode == 0, proc.stderr
        outs[forced] = json.loads(proc.stdout)
    assert outs["0"]["backend"] == "compiled"
    assert outs["1"]["backend"] == "pure"
    assert outs["0"]["digest"] == outs["1"]["digest"]


def test_backend_reports_a_name():
    assert BACKEND in ("compiled", "pure")
