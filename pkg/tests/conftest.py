import numpy as np
import pytest

from replidyn.model import ModelParams

P1_VALUES = dict(alpha=0.5, beta=6.0, gamma=6.0, delta=2.0, epsilon=-1.0, eta=2.5, l=0.5, n=0.5)


def p1(**changes) -> ModelParams:
    return ModelParams(**{**P1_VALUES, **changes})


@pytest.fixture
def P1():
    return p1()


@pytest.fixture
def P4():
    return p1(alpha=2.0)


@pytest.fixture
def Q():
    """P1 with strongly negative cross rewards: no interior state."""
    return p1(delta=-4.0, epsilon=-4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
