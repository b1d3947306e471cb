import numpy as np
import pytest

from hslab.axial import ExpPoly, GaussPoly, Product, Step
from hslab.fields import Field


def exp_field(coeffs=(1.0,), rate=1.0):
    return Field.axial(ExpPoly(tuple(coeffs), rate))


def gauss_field(coeffs, s=1.0):
    return Field.axial(GaussPoly(tuple(coeffs), s))


def make_bump():
    return Field.axial(Product((Step(0.5, 1.0, True), Step(1.5, 2.5))))


@pytest.fixture
def bump():
    return make_bump()


@pytest.fixture
def xs():
    return np.linspace(0.05, 6.0, 40)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for crit in sorted(ACCEPTANCE_LINES, key=lambda c: int(c[2:])):
            terminalreporter.write_line(ACCEPTANCE_LINES[crit])
