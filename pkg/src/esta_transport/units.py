"""Natural units of the optical-lattice transport problem.

Internally every other module works in oscillator units: hbar = m = 1,
lengths in sigma = sqrt(hbar / (m omega0)) and times in 1/omega0, so the
trap frequency is 1 and the period tau equals 2*pi.  Times quoted in units
of tau (``tf_over_tau``) are converted with :func:`tau_to_internal`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018, pinned so the derived time unit is reproducible.
CONSTANTS = {
    "hbar": 1.054571817e-34,  # J s
    "amu": 1.66053906660e-27,  # kg
}

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalParams:
    mass_amu: float = 133.0
    wavelength_nm: float = 866.0
    alpha: float = 150.0
    distance_sites: float = 1.0

    def __post_init__(self):
        for name in ("mass_amu", "wavelength_nm", "alpha", "distance_sites"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class NaturalUnits:
    """Lab-frame scales derived from :class:`PhysicalParams` (SI units)."""

    omega0: float
    tau: float
    sigma: float
    recoil_energy: float
    lattice_depth_U0: float
    wavenumber_k0: float
    u_tilde: float
    params: PhysicalParams


@dataclass(frozen=True)
class DimensionlessParams:
    """The transport problem in oscillator units (hbar = m = omega0 = 1).

    ``omega0_per_tau`` is the trap frequency measured in 1/tau, i.e. 2*pi.
    """

    u_tilde: float
    k0: float
    distance: float
    omega0: float = 1.0
    tau: float = TWO_PI
    omega0_per_tau: float = TWO_PI

    @property
    def depth(self) -> float:
        # U0 / (hbar omega0)
        return self.u_tilde


def derive_units(params: PhysicalParams) -> NaturalUnits:
    hbar = CONSTANTS["hbar"]
    m = params.mass_amu * CONSTANTS["amu"]
    lam = params.wavelength_nm * 1e-9
    k0 = TWO_PI / lam
    e_rec = 2.0 * (math.pi * hbar) ** 2 / (m * lam**2)
    u0 = params.alpha * e_rec
    omega0 = math.sqrt(2.0 * u0 / m) * k0
    return NaturalUnits(
        omega0=omega0,
        tau=TWO_PI / omega0,
        sigma=math.sqrt(hbar / (m * omega0)),
        recoil_energy=e_rec,
        lattice_depth_U0=u0,
        wavenumber_k0=k0,
        u_tilde=math.sqrt(params.alpha) / 2.0,
        params=params,
    )


def nondimensionalize(units: NaturalUnits) -> DimensionlessParams:
    u_tilde = units.u_tilde
    lam = units.params.wavelength_nm * 1e-9
    return DimensionlessParams(
        u_tilde=u_tilde,
        # 2 (k0 sigma)^2 = 1 / u_tilde
        k0=1.0 / math.sqrt(2.0 * u_tilde),
        distance=units.params.distance_sites * (lam / 2.0) / units.sigma,
    )


def default_problem() -> DimensionlessParams:
    return nondimensionalize(derive_units(PhysicalParams()))


def tau_to_internal(t_over_tau):
    return TWO_PI * t_over_tau


def internal_to_tau(t):
    return t / TWO_PI
