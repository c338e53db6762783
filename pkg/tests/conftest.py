import numpy as np
import pytest

from relloc.graph import (
    Graph,
    build_complete,
    build_cycle,
    build_erdos_renyi,
    build_path,
    build_torus_grid,
)


def random_graph(rng):
    """A random member of one of the supported families with N <= 50."""
    family = rng.integers(5)
    if family == 0:
        return build_cycle(int(rng.integers(3, 51)))
    if family == 1:
        return build_path(int(rng.integers(2, 51)))
    if family == 2:
        return build_complete(int(rng.integers(2, 16)))
    if family == 3:
        return build_torus_grid(int(rng.integers(2, 7)), int(rng.integers(2, 8)))
    return build_erdos_renyi(int(rng.integers(5, 41)), 0.3, int(rng.integers(1000)))


@pytest.fixture
def single_edge():
    return Graph(2, ((0, 1),))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
