import math

import pytest
from hypothesis import settings

from fock_zeros.lattice import SquareLattice
from fock_zeros.sigma import SigmaEvaluator

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")

ALPHAS = (math.pi / 2, math.pi, 2 * math.pi)


@pytest.fixture(scope="session")
def sigmas():
    """One evaluator per standard alpha, shared across the session."""
    return {a: SigmaEvaluator(SquareLattice(a)) for a in ALPHAS}


@pytest.fixture(scope="session")
def sigma_pi(sigmas):
    return sigmas[math.pi]


ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
