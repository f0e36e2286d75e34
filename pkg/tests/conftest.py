from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from evacsim.scenario import load_bundled_scenario, parse_scenario

# 3x3 room, one exit, one spawn: the smallest legal scenario.
MINI_DOC = """\
name: mini
cell_size: 0.5

grid:
.@.
...
..E

room all ignitable=true rect=0,0,2,2
exit out kind=main cells=2,2
"""

# One corridor, spawn one step from the emergency exit, main exit far away.
TWO_EXIT_DOC = """\
name: twoexit
cell_size: 0.5

grid:
E@@...E

exit near kind=emergency cells=0,0
exit far kind=main cells=0,6
"""

# A door is the only way through; blocking it disconnects the exit.
DOOR_DOC = """\
name: door
cell_size: 0.5

grid:
@.D.E

exit out kind=main cells=0,4
"""

# Straight 48-step run to the exit: 24 m at 0.5 m cells.
STRAIGHT_DOC = (
    "name: straight\ncell_size: 0.5\n\ngrid:\n"
    + "#" * 51
    + "\n#@@"
    + "." * 46
    + "E#\n"
    + "#" * 51
    + "\n\nexit out kind=main cells=1,49\n"
)

# Two corridors to two exits; a one-cell ignitable pocket sits over the
# short corridor, so fire cuts the near route and forces the long one.
# Exit a (2,13) is 12 steps from the spawn, exit b (4,13) is 14.
REROUTE_DOC = """\
name: reroute
cell_size: 0.5

grid:
###############
#########.#####
#@...........E#
#.#############
#............E#
###############

room pocket ignitable=true rect=1,9,1,9
exit a kind=emergency cells=2,13
exit b kind=main cells=4,13
"""

# Same shape, but the ignitable pocket crosses both corridors at col 11:
# wherever ignition lands in it, both routes are cut before anyone passes.
TRAP_DOC = """\
name: trap
cell_size: 0.5

grid:
###############
###########.###
#@@..........E#
#.#########.###
#............E#
###############

room tower ignitable=true rect=1,11,3,11
exit a kind=emergency cells=2,13
exit b kind=main cells=4,13
"""

# Two one-cell ignitable rooms off one corridor: ignition should be 50/50.
TWO_ROOMS_DOC = """\
name: tworooms
cell_size: 0.5

grid:
#######
##.#.##
#@...E#
#######

room ra ignitable=true rect=1,2,1,2
room rb ignitable=true rect=1,4,1,4
exit out kind=main cells=2,5
"""


@pytest.fixture(scope="session")
def dei():
    return load_bundled_scenario("dei-analog")


@pytest.fixture(scope="session")
def mini():
    return parse_scenario(MINI_DOC)


@pytest.fixture(scope="session")
def two_exit():
    return parse_scenario(TWO_EXIT_DOC)


@pytest.fixture(scope="session")
def door():
    return parse_scenario(DOOR_DOC)


@pytest.fixture(scope="session")
def straight():
    return parse_scenario(STRAIGHT_DOC)


@pytest.fixture(scope="session")
def reroute():
    return parse_scenario(REROUTE_DOC)


@pytest.fixture(scope="session")
def trap():
    return parse_scenario(TRAP_DOC)


@pytest.fixture(scope="session")
def two_rooms():
    return parse_scenario(TWO_ROOMS_DOC)
