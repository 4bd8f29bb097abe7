import math

import pytest
from hypothesis import given, strategies as st

from esta_transport.units import (
    PhysicalParams, default_problem, derive_units, internal_to_tau, nondimensionalize, tau_to_internal,
)


def test_default_time_unit():
    u = derive_units(PhysicalParams())
    assert u.tau * 1e6 == pytest.approx(20.41, abs=0.01)
    assert abs(u.tau * 1e6 - 20.0) / 20.0 < 0.03


def test_default_length_scales():
    u = derive_units(PhysicalParams())
    p = nondimensionalize(u)
    assert u.sigma * 1e9 == pytest.approx(39.4, abs=0.05)
    assert u.wavenumber_k0 * u.sigma == pytest.approx(0.2857, abs=1e-4)
    assert p.k0 == pytest.approx(u.wavenumber_k0 * u.sigma, rel=1e-12)
    assert p.distance == pytest.approx(11.0, abs=0.05)


def test_depth_factor():
    assert derive_units(PhysicalParams(alpha=4.0)).u_tilde == pytest.approx(1.0)
    assert default_problem().u_tilde == pytest.approx(6.1237, abs=1e-4)


def test_scaled_trap_frequency_is_two_pi_per_tau():
    p = default_problem()
    assert p.omega0 == 1.0
    assert p.omega0_per_tau == pytest.approx(2 * math.pi)
    assert p.tau == pytest.approx(2 * math.pi)


def test_one_site_distance_is_lattice_period():
    p = default_problem()
    assert p.distance == pytest.approx(math.pi / p.k0, rel=1e-12)


@pytest.mark.parametrize("field", ["mass_amu", "wavelength_nm", "alpha", "distance_sites"])
@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_rejects_nonpositive(field, bad):
    with pytest.raises(ValueError, match=field):
        PhysicalParams(**{field: bad})


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_tau_roundtrip(t):
    assert internal_to_tau(tau_to_internal(t)) == pytest.approx(t, rel=1e-14)


@given(st.floats(min_value=1.0, max_value=1e4))
def test_harmonic_lattice_relation(alpha):
    # 2 U k0^2 = 1 in oscillator units
    p = nondimensionalize(derive_units(PhysicalParams(alpha=alpha)))
    assert 2 * p.u_tilde * p.k0**2 == pytest.approx(1.0, rel=1e-12)
