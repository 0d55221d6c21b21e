from __future__ import annotations

import numpy as np
import pytest


def random_hermitian(rng, m, scale=1.0):
    X = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return scale * (X + X.conj().T) / 2


def random_symmetric_system(rng, m, n):
    """Hermitian ``A_nu`` and a general complex ``B``."""
    A = [random_hermitian(rng, m) for _ in range(n)]
    B = 0.5 * (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
    return A, B


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
