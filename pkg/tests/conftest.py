import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mapfe.model import parse_map

FLAT_3X3 = """type mapf-e
floors 1
height 3
width 3
tfloor 1
...
...
...
"""

TWO_FLOOR_CORRIDOR = """type mapf-e
floors 2
height 1
width 5
tfloor 1
.E...
.E...
"""

TWO_FLOOR_T3 = """type mapf-e
floors 2
height 1
width 5
tfloor 3
.E...
.E...
"""

THREE_FLOOR_STRIP = """type mapf-e
floors 3
height 1
width 3
tfloor 1
.E.
.E.
.E.
"""


@pytest.fixture
def flat3():
    return parse_map(FLAT_3X3)


@pytest.fixture
def corridor2():
    return parse_map(TWO_FLOOR_CORRIDOR)


@pytest.fixture
def corridor2_t3():
    return parse_map(TWO_FLOOR_T3)


@pytest.fixture
def strip3():
    return parse_map(THREE_FLOOR_STRIP)
