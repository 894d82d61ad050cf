"""Shared fixtures and independent numpy oracles.

The oracle helpers below build spin-1 matrices from literal entries with
plain numpy, so tests can compare the package against arithmetic that does
not go through any of its own code.
"""
import pathlib

import numpy as np
import pytest

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

_R = 1 / np.sqrt(2)
NP_SX = _R * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
NP_SY = _R * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
NP_SZ = np.diag([1, 0, -1]).astype(complex)
NP_I3 = np.eye(3, dtype=complex)

NP_PHI = np.zeros(9, dtype=complex)
NP_PHI[[2, 4, 6]] = np.array([-1, 1, -1]) / np.sqrt(3)


def np_along(n):
    return n[0] * NP_SX + n[1] * NP_SY + n[2] * NP_SZ


def np_defect(n):
    sq = np_along(n) @ np_along(n)
    return np.kron(sq, NP_I3) - np.kron(NP_I3, sq)


def np_unit(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def np_random_state(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def np_random_density(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return m / np.trace(m).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["exact", "float"])
def backend(request):
    return request.param


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
