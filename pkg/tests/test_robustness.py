import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, strategies as st

from esta_transport.dynamics import simulate_transport
from esta_transport.lattice import ERROR_KINDS
from esta_transport.robustness import (
    SystematicError, error_bound, error_potential, fidelity_vs_delta, robustness_report, sensitivity_fd,
    sensitivity_tdpt,
)


@dataclass(frozen=True)
class ScaledHarmonic:
    delta: float = 0.0

    def __call__(self, y):
        return 0.5 * (1.0 + self.delta) * np.asarray(y) ** 2

    def d_delta(self, y):
        return 0.5 * np.asarray(y) ** 2


def test_error_bound_arithmetic():
    assert error_bound(0.95, 0.5, 0.9) == pytest.approx(0.1)
    assert error_bound(0.9, 0.5, 0.9) == 0.0
    assert error_bound(0.5, 0.5, 0.9) == 0.0
    assert error_bound(0.95, 0.0, 0.9) == math.inf
    with pytest.raises(ValueError):
        error_bound(0.95, 0.1, 1.0)


@given(st.floats(0.0, 1.0), st.floats(1e-6, 10.0), st.floats(0.01, 0.99))
def test_error_bound_nonnegative(f0, s, fr):
    b = error_bound(f0, s, fr)
    assert b >= 0.0
    if f0 > fr:
        assert b * s == pytest.approx(f0 - fr)


def test_systematic_error_validation(problem):
    with pytest.raises(ValueError):
        SystematicError("phase", 0.1)
    with pytest.raises(ValueError):
        SystematicError("amplitude", -1.5)
    assert SystematicError("wavenumber", 0.1).shape(problem).delta == 0.1


def test_zero_error_potential_is_unperturbed(sta, problem, lattice):
    _, q0 = sta("poly", 1.0)
    x = np.linspace(-5, 15, 101)
    for kind in ERROR_KINDS:
        v = error_potential(SystematicError(kind, 0.0), q0, problem)
        np.testing.assert_allclose(v(x, 2.0), lattice(x - q0(2.0)), atol=1e-14)


def test_harmonic_family_methods_agree(sta, problem):
    # a trap 20% stiffer than designed for, so F(0) < 1 and S is not pinned to zero
    _, q0 = sta("poly", 0.8)
    fam = lambda d: ScaledHarmonic(0.2 + d)
    s_fd = sensitivity_fd(q0, "amplitude", problem, family=fam)
    s_tdpt = sensitivity_tdpt(q0, "amplitude", problem, family=fam)
    assert s_fd > 1.0
    assert s_tdpt == pytest.approx(s_fd, rel=1e-4)


def test_harmonic_exact_sta_is_stationary(sta, problem):
    _, q0 = sta("classical", 1.0)
    fam = lambda d: ScaledHarmonic(d)
    # F peaks at delta = 0 up to the O(dt^2) frequency shift of the splitting
    assert sensitivity_fd(q0, "amplitude", problem, family=fam) < 1e-3
    assert sensitivity_tdpt(q0, "amplitude", problem, family=fam) < 1e-3


@pytest.mark.parametrize("family", ["poly", "quasi_opt", "classical"])
def test_adiabatic_limit_sensitivity(sta, problem, family):
    _, q0 = sta(family, 4.0)
    for kind in ERROR_KINDS:
        assert sensitivity_tdpt(q0, kind, problem) < 0.05


def test_esta_reduces_sensitivity(get_design, problem):
    d = get_design("quasi_opt", 1.1)
    assert sensitivity_fd(d.Q, "correlated", problem) < sensitivity_fd(d.q0, "correlated", problem)


def test_report_and_sweep(get_design, problem, lattice):
    d = get_design("classical", 1.2)
    r = robustness_report(d.Q, "amplitude", problem, method="tdpt")
    assert r.fidelity_at_zero == pytest.approx(simulate_transport(d.Q, lattice, problem))
    assert r.bound == pytest.approx(error_bound(r.fidelity_at_zero, r.sensitivity, 0.9))
    f = fidelity_vs_delta(d.Q, "amplitude", problem, [-0.01, 0.0, 0.01])
    assert f[1] == pytest.approx(r.fidelity_at_zero)
    assert (f[2] - f[0]) / 0.02 == pytest.approx(-r.sensitivity, rel=0.02) or \
        (f[2] - f[0]) / 0.02 == pytest.approx(r.sensitivity, rel=0.02)
    with pytest.raises(ValueError):
        robustness_report(d.Q, "amplitude", problem, method="other")
