import pytest

from uavnet import parse_config
from uavnet.simulation import Simulation


def static_pair(distance=100.0, routing="opar", extra="", duration=1.0):
    """Two hovering UAVs ``distance`` apart with no generated traffic."""
    cfg = parse_config(
        f"routing = {routing}\nduration = {duration}\nn_uavs = 2\nmotion = static\n"
        f"traffic.rate = 0\n{extra}")
    return Simulation(cfg, positions=[(100.0, 300.0, 50.0), (100.0 + distance, 300.0, 50.0)])


@pytest.fixture
def pair():
    return static_pair


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
