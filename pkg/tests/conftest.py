import sys

import numpy as np
import pytest

from paulialg.operator import Operator


def random_operator(rng, n, max_terms=8, hermitian=False):
    k = int(rng.integers(1, max_terms + 1))
    v = rng.integers(0, 2 ** n, k)
    w = rng.integers(0, 2 ** n, k)
    c = rng.normal(size=k) + 1j * rng.normal(size=k)
    A = Operator(n, v, w, c)
    if hermitian:
        A = (A + A.dagger()) / 2
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
