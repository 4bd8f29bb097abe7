import numpy as np
import pytest

from esta_transport import Numerics, default_problem, design, lattice_for, sta_trajectory, tau_to_internal
from esta_transport.control import SmoothingSpec

_DESIGNS = {}


@pytest.fixture(scope="session")
def problem():
    return default_problem()


@pytest.fixture(scope="session")
def numerics():
    return Numerics()


@pytest.fixture(scope="session")
def lattice(problem):
    return lattice_for(problem)


@pytest.fixture(scope="session")
def get_design(problem):
    """Cached eSTA designs keyed by (family, t_f / tau)."""

    def get(family, tf_over_tau):
        key = (family, round(float(tf_over_tau), 6))
        if key not in _DESIGNS:
            _DESIGNS[key] = design(family, problem, tau_to_internal(tf_over_tau))
        return _DESIGNS[key]

    return get


@pytest.fixture(scope="session")
def sta(problem):
    def get(family, tf_over_tau, smoothing=SmoothingSpec()):
        return sta_trajectory(family, problem, tau_to_internal(tf_over_tau), smoothing)

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = {}


def record(criterion: int, ok: bool, detail: str):
    """Store one acceptance line; the terminal summary prints them in order."""
    ACCEPTANCE[criterion] = (bool(ok), detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[c]
        terminalreporter.write_line(f"criterion {c:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
