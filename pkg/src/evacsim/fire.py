"""Fire ignition and interval-based spread.

A fire starts in one uniformly drawn ignitable room and grows every
``spread_interval`` seconds to all passable cells 4-adjacent to a burning
cell. Walls and void never burn; burning cells are impassable for agents
and the player. The burning set only ever grows.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

import numpy as np

from evacsim import kernels
from evacsim.errors import ConfigurationError
from evacsim.scenario import Cell2, ScenarioSpec

# flag value: fire never ignited / disabled
NO_FIRE = None


@dataclass(frozen=True)
class FireConfig:
    spread_interval: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.spread_interval <= 0:
            raise ConfigurationError(f"spread_interval must be positive, got {self.spread_interval}")


@dataclass(frozen=True)
class FireState:
    burning: frozenset[Cell2]
    ignition_room: str
    ignited_at: float
    spread_count: int
    # cached uint8 mask of `burning`, copied on each spread; excluded from
    # equality so two states with the same burning set compare equal
    mask: np.ndarray = field(compare=False, repr=False, default=None)

    def burning_sorted(self) -> list[Cell2]:
        return sorted(self.burning)


def _mask_from_cells(spec: ScenarioSpec, cells) -> np.ndarray:
    mask = np.zeros((spec.height, spec.width), dtype=np.uint8)
    for r, c in cells:
        mask[r, c] = 1
    return mask


def ignite(spec: ScenarioSpec, config: FireConfig, rng: random.Random, now: float = 0.0) -> FireState:
    """Start a fire in a uniformly drawn ignitable room, on a uniformly
    drawn passable cell of that room. Raises ConfigurationError when no
    room is ignitable. Identical (spec, rng state) give identical fires.
    """
    rooms = sorted((room for room in spec.rooms if room.ignitable), key=lambda r: r.id)
    if not rooms:
        raise ConfigurationError("no ignitable room in scenario")
    room = rooms[rng.randrange(len(rooms))]
    cells = sorted(room.cells)
    cell = cells[rng.randrange(len(cells))]
    return FireState(
        burning=frozenset({cell}),
        ignition_room=room.id,
        ignited_at=now,
        spread_count=0,
        mask=_mask_from_cells(spec, [cell]),
    )


def spread_once(state: FireState, spec: ScenarioSpec) -> tuple[FireState, tuple[Cell2, ...]]:
    """Apply exactly one spread step; returns the new state and the newly
    burning cells (row-major order, possibly empty once saturated)."""
    mask = state.mask if state.mask is not None else _mask_from_cells(spec, state.burning)
    front = kernels.fire_front(mask, spec.passable_grid)
    new_cells = tuple((int(r), int(c)) for r, c in front)
    new_mask = mask.copy()
    for r, c in new_cells:
        new_mask[r, c] = 1
    new_state = replace(
        state,
        burning=state.burning | frozenset(new_cells),
        spread_count=state.spread_count + 1,
        mask=new_mask,
    )
    return new_state, new_cells


def fire_step(state: FireState, spec: ScenarioSpec, config: FireConfig, now: float) -> FireState:
    """Catch the fire up to simulation time ``now``: one spread per full
    ``spread_interval`` elapsed since ignition. No-op when no interval
    boundary has passed."""
    if now < state.ignited_at:
        raise ValueError(f"now={now} precedes ignition at {state.ignited_at}")
    target = int((now - state.ignited_at) / config.spread_interval)
    while state.spread_count < target:
        state, _ = spread_once(state, spec)
    return state


def is_passable(spec: ScenarioSpec, state: FireState | None, cell: Cell2) -> bool:
    """True iff the cell's kind is walkable and it is not burning."""
    if not spec.in_bounds(cell):
        raise ValueError(f"cell {cell} out of bounds")
    if not spec.cell(cell).passable:
        return False
    return state is None or cell not in state.burning
