import math

import pytest

from fracopt import kernel
from fracopt.functional import ProblemDefinition
from fracopt.measures import ControlSpace, ParameterDomain

ACCEPTANCE = pytest.StashKey[list]()

inf = math.inf


def make_problem(A, B, S=((0.0,), (0.0,)), U=None, sign="positive", direction="max", name="t"):
    if U is None:
        U = ControlSpace.box([0.0], [1.0])
    return ProblemDefinition.from_text(name, A, B, ParameterDomain(*S), U, sign, direction)


@pytest.fixture(params=sorted(kernel.BACKENDS))
def backend(request):
    return request.param


@pytest.fixture
def use_backend(monkeypatch):
    """Switch the active kernel for the duration of a test."""

    def switch(name):
        monkeypatch.setattr(kernel, "_impl", kernel.get_backend(name))

    return switch


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines):
        terminalreporter.write_line(line)
