"""Stochastic Schrodinger oracle for the white-noise sensitivity (test harness only).

Each realization propagates the initial state with an extra phase
exp(-i eta dW_j H_1) after every split-operator step, dW_j ~ N(0, h_j).
Realizations come in antithetic pairs (+dW, -dW) that cancel the O(eta)
fluctuation of the fidelity, and the same increments are reused for every
eta so the fitted slope of mean F against eta^2 has small variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson, trapezoid

from .control import ControlFunction
from .dynamics import Numerics, run_transport
from .lattice import lattice_for
from .noise import NoiseCoupling, noise_integrand
from .units import DimensionlessParams


@dataclass
class MonteCarloResult:
    eta2: np.ndarray
    mean_fidelity: np.ndarray
    slope: float
    slope_stderr: float
    s_n: float
    s_n_error: float
    realizations: int

    @property
    def combined_stderr(self) -> float:
        return float(np.hypot(self.slope_stderr, self.s_n_error))

    @property
    def z_score(self) -> float:
        """(slope + S_N) in units of the combined standard error."""
        return (self.slope + self.s_n) / self.combined_stderr


def _pair_fidelities(run, coupling, trajectory, etas, increments):
    """Antithetic-pair mean fidelity, shape (pairs, len(etas))."""
    grid, prop = run.grid, run.propagator
    x = grid.x
    pairs = increments.shape[0]
    # batch layout: eta index, sign, pair
    scale = (np.asarray(etas)[:, None, None] * np.array([1.0, -1.0])[None, :, None]
             * np.ones(pairs)[None, None, :]).reshape(-1)
    dw_index = np.tile(np.arange(pairs), 2 * len(etas))

    def kick(j):
        h1 = coupling(x, prop.times[j + 1])
        a = scale * increments[dw_index, j]
        return np.exp(-1j * a[:, None] * h1[None, :])

    psi0 = np.broadcast_to(run.initial, (scale.size, x.size))
    final = prop.run(psi0, run.potential, kick=kick)
    f = np.abs(grid.inner(run.target, final)) ** 2
    return f.reshape(len(etas), 2, pairs).mean(axis=1).T


def monte_carlo_slope(trajectory: ControlFunction, kind: str, problem: DimensionlessParams,
                      realizations: int = 200, eta2=(1e-4, 2e-4), seed: int = 0,
                      numerics: Numerics = Numerics(), batch_pairs: int = 25) -> MonteCarloResult:
    """Fit mean F = F0 + slope * eta^2 and compare with -S_N."""
    if realizations < 2 or realizations % 2:
        raise ValueError("realizations must be a positive even number")
    lattice = lattice_for(problem)
    run = run_transport(trajectory, lattice, problem, numerics)
    coupling = NoiseCoupling(kind, lattice, trajectory)
    rng = np.random.default_rng(seed)
    pairs = realizations // 2
    etas = np.sqrt(np.asarray(eta2, dtype=float))
    dw = rng.normal(size=(pairs, run.propagator.n_steps)) * np.sqrt(run.propagator.steps)

    per_pair = np.concatenate([
        _pair_fidelities(run, coupling, trajectory, etas, dw[i:i + batch_pairs])
        for i in range(0, pairs, batch_pairs)
    ])
    x = np.concatenate([[0.0], np.asarray(eta2, dtype=float)])
    y = np.column_stack([np.full(pairs, run.fidelity), per_pair])
    xc = x - x.mean()
    slopes = (y - y.mean(axis=1, keepdims=True)) @ xc / (xc @ xc)

    t, values, _ = noise_integrand(trajectory, kind, problem, numerics)
    s_n = abs(float(trapezoid(values, t)))
    s_n_err = abs(s_n - abs(float(simpson(values, x=t))))
    return MonteCarloResult(
        eta2=x,
        mean_fidelity=y.mean(axis=0),
        slope=float(slopes.mean()),
        slope_stderr=float(slopes.std(ddof=1) / np.sqrt(pairs)),
        s_n=s_n,
        s_n_error=s_n_err,
        realizations=realizations,
    )
