import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from qdcascade import PulseSpec, SystemParams  # noqa: E402


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def pi_pulse():
    return PulseSpec(area=math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def random_matrix(rng, n, scale=1.0):
    return scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


def random_density(rng, n):
    x = random_matrix(rng, n)
    rho = x @ x.conj().T
    return rho / np.trace(rho)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
