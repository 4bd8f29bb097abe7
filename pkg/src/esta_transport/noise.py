"""White-noise robustness: noise sensitivity S_N, adiabatic constants C and the bound B_N.

The noise enters as eta * xi(t) * H_1(t) with Gaussian white xi; the
fidelity loss is S_N * eta^2 to leading order.  Times and rates are in
oscillator units (omega0 = 1); S_N carries units of time, C of 1/time^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .control import ControlFunction
from .dynamics import Grid, Numerics, ground_state_of, run_transport
from .lattice import LatticeShape, lattice_for
from .modes import hermite_eigenfunction
from .robustness import error_bound
from .units import DimensionlessParams

NOISE_KINDS = ("position", "amplitude")


@dataclass(frozen=True)
class NoiseCoupling:
    """H_1 as a multiplication operator in the displacement y = x - Q(t)."""

    kind: str
    lattice: LatticeShape
    trajectory: ControlFunction | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")

    def of_displacement(self, y):
        if self.kind == "position":
            # -sigma dV/dy with sigma = 1
            return -self.lattice.force_gradient(y)
        return self.lattice(y)

    def __call__(self, x, t):
        q = 0.0 if self.trajectory is None else float(self.trajectory(t))
        return self.of_displacement(np.asarray(x) - q)


@dataclass
class NoiseReport:
    s_n: float
    c_exact: float
    c_approx: float
    b_n: float
    fidelity_at_zero: float = float("nan")


def coupling_operator(kind: str, trajectory: ControlFunction | None, problem: DimensionlessParams) -> NoiseCoupling:
    return NoiseCoupling(kind, lattice_for(problem), trajectory)


def _variance_integrand(grid: Grid, h1: np.ndarray, psi0: np.ndarray, psit: np.ndarray) -> float:
    """Re{<T|H1^2|0><0|T>} - |<T|H1|0>|^2 for one time slice."""
    a = grid.inner(psit, h1 * h1 * psi0)
    b = grid.inner(psi0, psit)
    c = grid.inner(psit, h1 * psi0)
    return float(np.real(a * b) - np.abs(c) ** 2)


def noise_integrand(trajectory: ControlFunction, kind: str, problem: DimensionlessParams,
                    numerics: Numerics = Numerics()):
    """Times and the S_N integrand on the propagation grid, plus the noiseless fidelity."""
    lattice = lattice_for(problem)
    run = run_transport(trajectory, lattice, problem, numerics)
    coupling = NoiseCoupling(kind, lattice, trajectory)
    grid, prop = run.grid, run.propagator
    values = np.zeros(prop.n_steps + 1)

    def observe(j, t, pair):
        values[j] = _variance_integrand(grid, coupling(grid.x, t), pair[0], pair[1])

    prop.run_backward(np.stack([run.final, run.target]), run.potential, observe=observe)
    return prop.times, values, run.fidelity


def noise_sensitivity(trajectory: ControlFunction, kind: str, problem: DimensionlessParams,
                      numerics: Numerics = Numerics(), return_fidelity: bool = False):
    """S_N = |int dt [Re{<T|H1^2|0><0|T>} - |<T|H1|0>|^2]| (hbar = 1)."""
    t, values, f0 = noise_integrand(trajectory, kind, problem, numerics)
    s_n = abs(float(trapezoid(values, t)))
    return (s_n, f0) if return_fidelity else s_n


def ground_state_variance(kind: str, problem: DimensionlessParams, psi: np.ndarray, grid: Grid) -> float:
    h1 = NoiseCoupling(kind, lattice_for(problem)).of_displacement(grid.x)
    mean = grid.inner(psi, h1 * psi)
    second = grid.inner(psi, h1 * h1 * psi)
    return abs(float(np.real(second - np.abs(mean) ** 2)))


def adiabatic_constant_exact(kind: str, problem: DimensionlessParams, numerics: Numerics = Numerics()) -> float:
    """Variance of H_1 in the numerically prepared lattice ground state."""
    grid = numerics.grid(problem.distance)
    psi = ground_state_of(lattice_for(problem), 0.0, grid, numerics.imag_time_tol).amplitudes
    return ground_state_variance(kind, problem, psi, grid)


def adiabatic_constant_approx(kind: str, problem: DimensionlessParams) -> float:
    """Closed forms from the harmonic ground state (omega0 = 1)."""
    u = problem.u_tilde
    w2 = problem.omega0**2
    if kind == "position":
        return w2 * u / 4.0 * (1.0 - math.exp(-2.0 / u))
    if kind == "amplitude":
        return w2 * u**2 / 8.0 * math.exp(-2.0 / u) * (math.exp(1.0 / u) - 1.0) ** 2
    raise ValueError(f"unknown noise kind {kind!r}; expected one of {NOISE_KINDS}")


def harmonic_ground_state(grid: Grid) -> np.ndarray:
    """Analytic phi_0 sampled on the grid."""
    return hermite_eigenfunction(0, grid.x).astype(complex)


def noise_error_bound(fidelity_at_zero: float, s_n: float, f_reference: float = 0.9) -> float:
    return error_bound(fidelity_at_zero, s_n, f_reference)


def noise_report(trajectory: ControlFunction, kind: str, problem: DimensionlessParams,
                 f_reference: float = 0.9, numerics: Numerics = Numerics()) -> NoiseReport:
    s_n, f0 = noise_sensitivity(trajectory, kind, problem, numerics, return_fidelity=True)
    return NoiseReport(
        s_n=s_n,
        c_exact=adiabatic_constant_exact(kind, problem, numerics),
        c_approx=adiabatic_constant_approx(kind, problem),
        b_n=noise_error_bound(f0, s_n, f_reference),
        fidelity_at_zero=f0,
    )
