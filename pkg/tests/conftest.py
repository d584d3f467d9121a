import pytest

from traceprint import parse_trace

# Recursive two-function run: f1 calls f2, f2 calls itself once.
FIG_TEXT = """\
1 f1 entry
2 | f2 entry
3 | | f2 entry
4 | | f2 exit
5 | f2 exit
6 f1 exit
"""

# (trace_id, class_id, distance) rows of the worked ranking example:
# five library traces over four classes, queried by one new trace.
STUB_DISTANCES = [
    ("t2", "d4", 0.0),
    ("t1", "d2", 7.0),
    ("t4", "d3", 7.0),
    ("t3", "d2", 9.0),
    ("t5", "d1", 9.0),
]

EXPECTED_RANKS = {"d4": 1, "d2": 3, "d3": 3, "d1": 4}


@pytest.fixture
def fig_trace():
    return parse_trace(FIG_TEXT, trace_id="fig")
