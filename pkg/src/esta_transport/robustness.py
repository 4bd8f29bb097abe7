"""Systematic lattice errors: sensitivity S and the error bound B."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .control import ControlFunction
from .dynamics import Numerics, PotentialModel, run_transport, simulate_transport
from .lattice import ERROR_KINDS, LatticeShape, lattice_for
from .units import DimensionlessParams


@dataclass(frozen=True)
class SystematicError:
    kind: str
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ERROR_KINDS:
            raise ValueError(f"unknown error kind {self.kind!r}; expected one of {ERROR_KINDS}")
        if 1.0 + self.delta <= 0.0:
            raise ValueError("1 + delta must be positive")

    def shape(self, problem: DimensionlessParams) -> LatticeShape:
        return lattice_for(problem, self.kind, self.delta)


@dataclass
class RobustnessReport:
    fidelity_at_zero: float
    sensitivity: float
    bound: float
    f_reference: float


def error_potential(error: SystematicError, trajectory: ControlFunction,
                    problem: DimensionlessParams) -> PotentialModel:
    return PotentialModel(error.shape(problem), trajectory)


def error_bound(fidelity_at_zero: float, sensitivity: float, f_reference: float = 0.9) -> float:
    """(F(0) - F_R) / S, zero when F(0) <= F_R and +inf when S vanishes."""
    if not 0.0 < f_reference < 1.0:
        raise ValueError("f_reference must lie in (0, 1)")
    if fidelity_at_zero <= f_reference:
        return 0.0
    if sensitivity == 0.0:
        return math.inf
    return (fidelity_at_zero - f_reference) / sensitivity


def _shapes(problem, kind, family):
    """delta -> potential shape; ``family`` overrides the lattice error models."""
    if family is not None:
        return family
    return lambda delta: lattice_for(problem, kind, delta)


def sensitivity_fd(trajectory: ControlFunction, kind: str, problem: DimensionlessParams,
                   h: float = 1e-3, numerics: Numerics = Numerics(),
                   convention: str = "reference", family=None) -> float:
    """|F(+h) - F(-h)| / 2h from two full transports.

    ``family`` maps delta to a potential shape and replaces the lattice error
    of ``kind``; with the reference convention both transports start from and
    are scored against the ground states of ``family(0)``.
    """
    shapes = _shapes(problem, kind, family)
    base = shapes(0.0)
    f = [
        simulate_transport(trajectory, shapes(s * h), problem, numerics,
                           reference_shape=base, convention=convention)
        for s in (1.0, -1.0)
    ]
    return abs(f[0] - f[1]) / (2.0 * h)


def sensitivity_tdpt(trajectory: ControlFunction, kind: str, problem: DimensionlessParams,
                     numerics: Numerics = Numerics(), family=None) -> float:
    """2 |Im(<Psi_0(t_f)|Psi_T> int <Psi_T(t)| dH/d delta |Psi_0(t)> dt)|.

    Psi_0(t) is the forward-evolved initial state, Psi_T(t) the backward
    evolved target, both under the error-free potential; the time integral
    uses the trapezoid rule on the propagation grid.  ``family`` is as in
    :func:`sensitivity_fd`; its shapes must provide ``d_delta``.
    """
    shape = _shapes(problem, kind, family)(0.0)
    run = run_transport(trajectory, shape, problem, numerics)
    integral, overlap = _tdpt_integral(run, shape.d_delta, trajectory)
    return float(2.0 * abs(np.imag(np.conj(overlap) * integral)))


def _tdpt_integral(run, operator, trajectory):
    """(int <Psi_T(t)| op(x - Q(t)) |Psi_0(t)> dt, <Psi_T|Psi_0(t_f)>)."""
    grid, prop = run.grid, run.propagator
    x = grid.x
    values = np.zeros(prop.n_steps + 1, dtype=complex)

    def observe(j, t, pair):
        psi0, psit = pair
        values[j] = grid.inner(psit, operator(x - float(trajectory(t))) * psi0)

    prop.run_backward(np.stack([run.final, run.target]), run.potential, observe=observe)
    return trapezoid(values, prop.times), run.overlap


def robustness_report(trajectory: ControlFunction, kind: str, problem: DimensionlessParams,
                      f_reference: float = 0.9, numerics: Numerics = Numerics(),
                      method: str = "fd", h: float = 1e-3) -> RobustnessReport:
    f0 = simulate_transport(trajectory, lattice_for(problem), problem, numerics)
    if method == "fd":
        s = sensitivity_fd(trajectory, kind, problem, h, numerics)
    elif method == "tdpt":
        s = sensitivity_tdpt(trajectory, kind, problem, numerics)
    else:
        raise ValueError("method must be 'fd' or 'tdpt'")
    return RobustnessReport(f0, s, error_bound(f0, s, f_reference), f_reference)


def fidelity_vs_delta(trajectory: ControlFunction, kind: str, problem: DimensionlessParams,
                      deltas, numerics: Numerics = Numerics(), convention: str = "reference"):
    base = lattice_for(problem)
    return np.array([
        simulate_transport(trajectory, lattice_for(problem, kind, float(dl)), problem, numerics,
                           reference_shape=base, convention=convention)
        for dl in deltas
    ])
