import math

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(rng, N):
    psi = rng.normal(size=N) + 1j * rng.normal(size=N)
    return psi / np.linalg.norm(psi)


def random_density(rng, N, rank=None):
    rank = N if rank is None else rank
    A = rng.normal(size=(N, rank)) + 1j * rng.normal(size=(N, rank))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
