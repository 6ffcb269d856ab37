import numpy as np
import pytest

from mibeam.circuit import CircuitParams
from mibeam.geometry import random_constellation

_ACCEPTANCE_LINES = []


def record_criterion(number, name, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name} -- {detail}"
    _ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def params():
    return CircuitParams.resonant()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def scene_factory(params):
    def make(k, coupling, seed, **kw):
        return random_constellation(k, coupling, params, np.random.default_rng(seed), **kw)
    return make


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
