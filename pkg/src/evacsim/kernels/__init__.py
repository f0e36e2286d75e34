"""Kernel backend selection.

The hot inner loops (path BFS, fire frontier, per-tick agent movement) have
two interchangeable implementations: a compiled Cython extension and a
pure-Python fallback. The compiled one is used when importable; set the
environment variable ``EVACSIM_PURE=1`` to force the fallback. Both produce
bit-identical results (see tests/test_kernels.py), so backend choice never
affects simulation outcomes, only speed.
"""

from __future__ import annotations

import os

from evacsim.kernels import pure as _pure
from evacsim.kernels.pure import (  # noqa: F401  (re-exported constants)
    STATUS_ESCAPED,
    STATUS_EVACUATING,
    STATUS_IDLE,
    STATUS_TRAPPED,
    STEP_ORDER,
)

if os.environ.get("EVACSIM_PURE", "") not in ("", "0"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from evacsim.kernels import _speed as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

dist_field = _impl.dist_field
greedy_path = _impl.greedy_path
fire_front = _impl.fire_front
advance_agents = _impl.advance_agents
