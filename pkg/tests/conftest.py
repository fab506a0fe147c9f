"""Shared level sets. Builds are deterministic, so one copy per session is enough."""

import pytest

from porousplane.construction import Window, build_up_to
from porousplane.directions import DirectionSchedule, ExplicitSchedule

# a generic direction for the run schedules; no special angle relations
RUN_TURNS = 0.16


@pytest.fixture(scope="session")
def default_schedule():
    return DirectionSchedule()


@pytest.fixture(scope="session")
def h1():
    """Depth 1, horizontal lines y = k/64, core [-1/16, 1/16]^2."""
    return build_up_to(1, Window((0.0, 0.0), 1.0 / 16), DirectionSchedule())


@pytest.fixture(scope="session")
def h2():
    """Depth 2 on the default schedule with room for level-1 walks."""
    return build_up_to(2, Window((0.0, 0.0), 1.0 / 32, 2.0**-5 + 2.0**-7), DirectionSchedule())


@pytest.fixture(scope="session")
def cross2():
    """Depth 2 with horizontal level-1 lines and vertical level-2 lines."""
    return build_up_to(2, Window((0.0, 0.0), 1.0 / 32), ExplicitSchedule((0.0, 0.25)))


@pytest.fixture(scope="session")
def mixed3():
    """Depth 3 with three unrelated directions; the taper keeps level 3 small."""
    w = Window((0.001, 0.0003), 2.0**-9, 0.033, taper=2.5)
    return build_up_to(3, w, ExplicitSchedule((0.0, 0.17, 0.37)))


def run_window():
    # core sits 2^-9 above the level-1 line y = 0 so that A_1 points land inside it
    return Window((0.0003, 9 * 2.0**-12), 2.0**-10, 2.0**-9)


@pytest.fixture(scope="session")
def run3():
    """Depth 3, level 1 horizontal, levels 2 and 3 share one direction."""
    return build_up_to(3, run_window(), ExplicitSchedule((0.0, RUN_TURNS, RUN_TURNS)))


@pytest.fixture(scope="session")
def run4():
    """Depth 4, level 1 horizontal, levels 2 to 4 share one direction."""
    return build_up_to(4, run_window(), ExplicitSchedule((0.0, RUN_TURNS, RUN_TURNS, RUN_TURNS)))


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdict lines at the end of the run."""
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
