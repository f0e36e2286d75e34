"""evacsim: a deterministic grid-based building-evacuation simulator and
playable serious game.

A scenario is a 2D grid building with rooms, exits, emergency signage and
spawn points. A session puts evacuating occupants (and optionally a
human-steered player) into the building; pressing the fire-simulation key
ignites a random room, sounds the alarm and starts the timer. Fire spreads
on a fixed interval and is impassable, occupants re-route around it, and
the score of an escaped player is simply the time taken: lower is better.

Batch entry points (run_headless, run_experiment, calibration_report)
reproduce interactive behaviour exactly and are bit-deterministic per seed.
"""

__version__ = "0.1.0"

from evacsim.kernels import BACKEND as KERNEL_BACKEND  # noqa: F401
