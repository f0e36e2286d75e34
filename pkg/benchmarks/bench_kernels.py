#!/usr/bin/env python3
"""Compare the compiled kernel backend against the pure-Python fallback.

Runs the three hot kernels (BFS distance field, fire frontier expansion,
batched agent advance) plus a whole headless session on identical inputs
and prints per-op timings and speedups. Usage:

    python3 benchmarks/bench_kernels.py [--grid 200] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from evacsim.kernels import pure

try:
    from evacsim.kernels import _speed
except ImportError:
    _speed = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_world(n):
    rng = np.random.default_rng(7)
    passable = (rng.random((n, n)) > 0.25).astype(np.uint8)
    passable[0, 0] = 1
    burning = np.zeros((n, n), dtype=np.uint8)
    burning[n // 2, n // 2] = passable[n // 2, n // 2] = 1
    for _ in range(n // 4):  # grow a realistic frontier
        front = pure.fire_front(burning, passable)
        for r, c in front:
            burning[r, c] = 1
    return passable, burning


def make_agents(passable, n_agents=200):
    h, w = passable.shape
    rng = np.random.default_rng(11)
    floor = np.flatnonzero(passable.ravel())
    cells, offs = [], [0]
    starts = rng.choice(floor, size=n_agents, replace=False)
    for s in starts:
        tgt = int(rng.choice(floor))
        dist = pure.dist_field(passable, tgt // w, tgt % w)
        path = pure.greedy_path(dist, int(s) // w, int(s) % w)
        if path is None:
            cells.append(int(s))
        else:
            cells.extend(int(r) * w + int(c) for r, c in path)
        offs.append(len(cells))
    occupancy = np.full(h * w, -1, dtype=np.int32)
    for i in range(n_agents):
        occupancy[cells[offs[i]]] = i
    return dict(
        route_cells=np.asarray(cells, dtype=np.int32),
        route_offs=np.asarray(offs, dtype=np.int32),
        pos=np.zeros(n_agents, dtype=np.int32),
        progress=np.zeros(n_agents, dtype=np.float64),
        speed=np.full(n_agents, 1.5),
        stair_factor=np.ones(n_agents),
        status=np.ones(n_agents, dtype=np.uint8),
        occupancy=occupancy,
        stair_mask=np.zeros(h * w, dtype=np.uint8),
        exit_mask=np.zeros(h * w, dtype=np.uint8),
        burning_mask=np.zeros(h * w, dtype=np.uint8),
    )


def bench_backend(backend, passable, burning, agent_proto, repeat):
    out = {}
    out["dist_field"] = timeit(lambda: backend.dist_field(passable, 0, 0), repeat)
    out["fire_front"] = timeit(lambda: backend.fire_front(burning, passable), repeat)

    def advance():
        batch = {k: v.copy() for k, v in agent_proto.items()}
        for _ in range(100):
            backend.advance_agents(**batch, cell_size=0.5, dt=0.1)

    out["advance_agents(100 ticks)"] = timeit(advance, max(1, repeat // 2))
    return out


def bench_session(repeat):
    import os
    import subprocess
    import sys

    code = (
        "from evacsim.scenario import load_bundled_scenario\n"
        "from evacsim.sim import SimConfig, PopulationSpec, run_headless\n"
        "import time\n"
        "spec = load_bundled_scenario('dei-analog')\n"
        "t0 = time.perf_counter()\n"
        "for s in range(5):\n"
        "    run_headless(spec, SimConfig(), PopulationSpec.survey_sample(), seed=s)\n"
        "print(time.perf_counter() - t0)\n"
    )
    times = {}
    for label, forced in (("compiled", "0"), ("pure", "1")):
        env = dict(os.environ, EVACSIM_PURE=forced)
        proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
        times[label] = float(proc.stdout.strip()) if proc.returncode == 0 else float("nan")
    return times


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    passable, burning = make_world(args.grid)
    agents = make_agents(passable)

    print(f"grid {args.grid}x{args.grid}, 200 agents, best of {args.repeat}\n")
    pure_times = bench_backend(pure, passable, burning, agents, args.repeat)
    if _speed is None:
        print("compiled backend not built; showing pure backend only\n")
        for op, t in pure_times.items():
            print(f"{op:28s} pure {t * 1e3:9.2f} ms")
        return
    fast_times = bench_backend(_speed, passable, burning, agents, args.repeat)
    print(f"{'kernel':28s} {'pure':>12s} {'compiled':>12s} {'speedup':>9s}")
    for op in pure_times:
        p, f = pure_times[op], fast_times[op]
        print(f"{op:28s} {p * 1e3:9.2f} ms {f * 1e3:9.2f} ms {p / f:8.1f}x")

    sess = bench_session(args.repeat)
    print(f"\n{'5 headless survey sessions':28s} {sess['pure'] * 1e3:9.2f} ms "
          f"{sess['compiled'] * 1e3:9.2f} ms {sess['pure'] / sess['compiled']:8.1f}x")


if __name__ == "__main__":
    main()
