import pytest
from hypothesis import strategies as st

from howard_lb.dmdp import Dmdp

ACCEPTANCE_LINES = []


@st.composite
def dmdps(draw, max_n=6, weights=(-9, 9)):
    n = draw(st.integers(1, max_n))
    edges = []
    for v in range(n):
        succ = draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=min(n, 3)))
        for u in sorted(succ):
            edges.append((v, u, draw(st.integers(*weights))))
    return Dmdp.from_edges([f"v{i}" for i in range(n)], edges)


@st.composite
def dmdp_and_policy(draw, max_n=8):
    d = draw(dmdps(max_n=max_n))
    policy = tuple(draw(st.sampled_from(d.successors(v))) for v in range(d.n))
    return d, policy


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def two_cycle():
    return Dmdp.from_edges(["a", "b"], [(0, 1, 1), (1, 0, 1)])
