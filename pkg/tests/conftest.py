import time

import pytest

from daceq.search import sweep

# one row per pulse, all at the 15 x 10 desk scale
DESK_ROWS = [("nrtz", 1, "I"), ("rtz", 2, "II"), ("rtc", 3, "IV"), ("rtcz", 4, "III")]

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def desk_sweeps():
    out = {}
    for row in DESK_ROWS:
        t0 = time.perf_counter()
        grid = sweep(*row, workers=None)
        grid.metadata["seconds"] = time.perf_counter() - t0
        out[row] = grid
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
