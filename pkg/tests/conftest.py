import math

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from aerosim.config import bundled_scenario, load_scenario
from aerosim.state import EntityState

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

coords = st.floats(-20000.0, 20000.0, allow_nan=False)
alts = st.floats(0.0, 12000.0, allow_nan=False)
headings = st.floats(-math.pi, math.pi, allow_nan=False)
speeds = st.floats(50.0, 400.0, allow_nan=False)
gammas = st.floats(-math.radians(20.0), math.radians(20.0), allow_nan=False)


@st.composite
def states(draw, level: bool = False):
    return EntityState(
        draw(coords), draw(coords), 3000.0 if level else draw(alts), draw(headings), draw(speeds),
        0.0 if level else draw(gammas),
    )


@st.composite
def state_pairs(draw, level: bool = False):
    a = draw(states(level))
    b = draw(states(level))
    if math.dist(a.position, b.position) < 1.0:
        b = b._replace(x=b.x + 100.0)
    return a, b


@pytest.fixture(scope="session")
def stern_cfg():
    return load_scenario(bundled_scenario("stern_conversion"))


# acceptance criteria report their verdicts here; printed after the run
ACCEPTANCE_LINES: list[str] = []


def acceptance(criterion: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
