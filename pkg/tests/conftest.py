import numpy as np
import pytest

from nafs.graph import build_graph, generate_er, is_connected


@pytest.fixture
def triangle():
    return build_graph([(0, 1), (1, 2), (0, 2)], 3)


@pytest.fixture
def path2():
    return build_graph([(0, 1)], 2)


def connected_er(n, p, seed):
    """First connected G(n, p) draw at or after ``seed``."""
    while True:
        g = generate_er(n, p, seed)
        if is_connected(g):
            return g
        seed += 10_000


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
