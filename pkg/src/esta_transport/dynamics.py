"""Split-operator propagation of the transported atom on a uniform grid.

Units are hbar = m = omega0 = 1 with lengths in sigma, so the kinetic
energy is k^2 / 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .control import ControlFunction
from .units import DimensionlessParams, TWO_PI


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int = 2048

    def __post_init__(self):
        n = self.n_points
        if n < 512 or n & (n - 1):
            raise ValueError("n_points must be a power of two >= 512")
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")

    @classmethod
    def for_transport(cls, distance: float, pad: float = 12.0, n_points: int = 2048) -> "Grid":
        if pad < 8.0:
            raise ValueError("grid padding must be at least 8 sigma on each side")
        return cls(-pad, distance + pad, n_points)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        return TWO_PI * np.fft.fftfreq(self.n_points, self.dx)

    def inner(self, a, b) -> complex:
        """<a|b> with the grid weight; broadcasts over leading axes."""
        return np.sum(np.conj(a) * b, axis=-1) * self.dx

    def norm(self, psi) -> float:
        return float(np.sqrt(np.real(self.inner(psi, psi))))


@dataclass
class Wavefunction:
    amplitudes: np.ndarray
    grid: Grid
    time: float = 0.0

    @property
    def norm(self) -> float:
        return self.grid.norm(self.amplitudes)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class PotentialModel:
    """V(x, t) = shape(x - trajectory(t)) (+ optional extra(x, t))."""

    shape: Callable
    trajectory: ControlFunction | None = None
    extra: Callable | None = None

    def center(self, t) -> float:
        return 0.0 if self.trajectory is None else float(self.trajectory(t))

    def __call__(self, x, t):
        v = self.shape(x - self.center(t))
        if self.extra is not None:
            v = v + self.extra(x, t)
        return v


@dataclass(frozen=True)
class Numerics:
    grid_points: int = 2048
    grid_pad_sigma: float = 12.0
    dt_over_tau: float = 1.0 / 2000.0
    imag_time_tol: float = 1e-12
    splitting_order: int = 4

    @property
    def dt(self) -> float:
        return TWO_PI * self.dt_over_tau

    def grid(self, distance: float) -> Grid:
        return Grid.for_transport(distance, self.grid_pad_sigma, self.grid_points)

    def n_steps(self, t_f: float) -> int:
        return max(1, int(np.ceil(t_f / self.dt - 1e-9)))

    def propagator(self, grid: Grid, trajectory: ControlFunction) -> "SplitOperator":
        """Propagator over [0, t_f] with steps aligned to the trajectory breakpoints."""
        return SplitOperator(grid, trajectory.t_f, self.n_steps(trajectory.t_f),
                             trajectory.breakpoints, self.splitting_order)


# --- ground states ---------------------------------------------------------------


def ground_state(potential_values: np.ndarray, grid: Grid, seed_center: float = 0.0,
                 tol: float = 1e-12, max_steps: int = 200_000,
                 schedule=(0.05, 0.01, 0.002)) -> Wavefunction:
    """Imaginary-time split-operator ground state seeded with the harmonic Gaussian.

    Each stage of ``schedule`` runs until the energy changes by less than
    ``tol`` per unit of imaginary time (stricter than per step, since every
    step is shorter than 1); the last stage uses the smallest step so the
    splitting bias of the fixed point is negligible.
    """
    x, k = grid.x, grid.k
    v = np.asarray(potential_values, dtype=float)
    psi = np.exp(-0.5 * (x - seed_center) ** 2).astype(complex)
    psi /= grid.norm(psi)
    steps = 0
    check_every = 20
    for dtau in schedule:
        half_v = np.exp(-0.5 * dtau * v)
        kin = np.exp(-0.5 * dtau * k**2)
        e_old = np.inf
        while True:
            for _ in range(check_every):
                psi = half_v * np.fft.ifft(kin * np.fft.fft(half_v * psi))
                psi /= grid.norm(psi)
            steps += check_every
            e = energy(psi, v, grid)
            if abs(e - e_old) < tol * check_every * dtau:
                break
            e_old = e
            if steps > max_steps:
                raise NonConvergence(f"imaginary-time evolution did not converge in {max_steps} steps")
    return Wavefunction(psi, grid, 0.0)


def energy(psi, v, grid: Grid) -> float:
    kinetic = np.fft.ifft(0.5 * grid.k**2 * np.fft.fft(psi))
    return float(np.real(grid.inner(psi, kinetic + v * psi)))


@lru_cache(maxsize=64)
def _cached_ground_state(shape, center: float, grid: Grid, tol: float) -> np.ndarray:
    psi = ground_state(shape(grid.x - center), grid, seed_center=center, tol=tol).amplitudes
    psi.setflags(write=False)
    return psi


def ground_state_of(shape, center: float, grid: Grid, tol: float = 1e-12) -> Wavefunction:
    """Ground state of ``shape(x - center)`` in the well at ``center`` (cached)."""
    return Wavefunction(_cached_ground_state(shape, float(center), grid, tol).copy(), grid)


# --- real-time propagation ---------------------------------------------------------


# Yoshida weights: three symmetric second-order steps compose to fourth order
_CBRT2 = 2.0 ** (1.0 / 3.0)
_WEIGHTS = {2: (1.0,), 4: (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))}
SPLITTING_ORDERS = tuple(_WEIGHTS)


class SplitOperator:
    """Symmetric splitting with step edges aligned to the breakpoints of the drive.

    The basic step from t to t+h is exp(-iV h/2) exp(-iT h) exp(-iV h/2) with
    V = V(x, t + h/2); order 4 composes three of them with Yoshida weights.
    Each panel between breakpoints gets a uniform step no longer than
    t_f / n_steps, so the potential is smooth in time within every step.
    """

    def __init__(self, grid: Grid, t_f: float, n_steps: int, breakpoints=(), order: int = 4):
        if order not in _WEIGHTS:
            raise ValueError(f"splitting order must be one of {SPLITTING_ORDERS}")
        self.grid = grid
        self.t_f = float(t_f)
        self.order = order
        h_max = self.t_f / int(n_steps)
        edges = [0.0, *sorted(b for b in set(breakpoints) if 0.0 < b < self.t_f), self.t_f]
        times, steps = [0.0], []
        for a, b in zip(edges, edges[1:]):
            m = max(1, int(np.ceil((b - a) / h_max - 1e-9)))
            h = (b - a) / m
            times.extend(a + h * np.arange(1, m + 1))
            steps.extend([h] * m)
        times[-1] = self.t_f
        self.times = np.array(times)
        self.steps = np.array(steps)
        self.n_steps = len(steps)
        self._drifts = {}

    def _drift(self, tau: float) -> np.ndarray:
        if tau not in self._drifts:
            self._drifts[tau] = np.exp(-0.5j * tau * self.grid.k**2)
        return self._drifts[tau]

    def _substeps(self, j: int):
        """(midpoint time, signed duration) of the basic steps making up step j."""
        t, h = self.times[j], self.steps[j]
        out = []
        for w in _WEIGHTS[self.order]:
            out.append((t + 0.5 * w * h, w * h))
            t += w * h
        return out

    def step(self, psi: np.ndarray, potential, j: int, inverse: bool = False) -> np.ndarray:
        """Apply step j (from times[j] to times[j+1]) or its inverse."""
        x = self.grid.x
        subs = self._substeps(j)
        for tm, tau in (subs[::-1] if inverse else subs):
            tau = -tau if inverse else tau
            half = np.exp(-0.5j * tau * potential(x, tm))
            psi = half * np.fft.ifft(self._drift(tau) * np.fft.fft(half * psi, axis=-1), axis=-1)
        return psi

    def run(self, psi: np.ndarray, potential, kick: Callable | None = None,
            observe: Callable | None = None) -> np.ndarray:
        """Propagate ``psi`` (shape (..., n)) from 0 to t_f.

        ``kick(j)`` may return an extra phase array applied at the end of step
        j (used for noise); ``observe(j, t_j, psi)`` sees the state at every
        step edge t_j = times[j].
        """
        psi = np.array(psi, dtype=complex)
        if observe is not None:
            observe(0, 0.0, psi)
        for j in range(self.n_steps):
            psi = self.step(psi, potential, j)
            if kick is not None:
                psi = psi * kick(j)
            if observe is not None:
                observe(j + 1, self.times[j + 1], psi)
        return psi

    def run_backward(self, psi: np.ndarray, potential, observe: Callable | None = None) -> np.ndarray:
        """Apply U(0, t_f) to ``psi`` by inverting the forward steps in reverse order.

        ``observe(j, t_j, psi)`` sees U(t_j, t_f) psi for j = n_steps .. 0.
        """
        psi = np.array(psi, dtype=complex)
        if observe is not None:
            observe(self.n_steps, self.t_f, psi)
        for j in range(self.n_steps - 1, -1, -1):
            psi = self.step(psi, potential, j, inverse=True)
            if observe is not None:
                observe(j, self.times[j], psi)
        return psi


def propagate(psi: Wavefunction, potential, t_f: float, dt: float) -> Wavefunction:
    n_steps = max(1, int(np.ceil(t_f / dt - 1e-9)))
    prop = SplitOperator(psi.grid, t_f, n_steps)
    return Wavefunction(prop.run(psi.amplitudes, potential), psi.grid, psi.time + t_f)


def fidelity(psi_final, psi_target, grid: Grid | None = None) -> float:
    """|<target|final>|^2."""
    if isinstance(psi_final, Wavefunction):
        grid = psi_final.grid
        psi_final = psi_final.amplitudes
    if isinstance(psi_target, Wavefunction):
        grid = psi_target.grid
        psi_target = psi_target.amplitudes
    return float(np.abs(grid.inner(psi_target, psi_final)) ** 2)


def backward_evolved_target(trajectory: ControlFunction, shape, psi_target: Wavefunction,
                            dt: float, order: int = 4) -> Iterator[Wavefunction]:
    """Yield U(t_j, t_f)|target> for t_j from t_f down to 0 on the propagation grid."""
    t_f = trajectory.t_f
    n_steps = max(1, int(np.ceil(t_f / dt - 1e-9)))
    prop = SplitOperator(psi_target.grid, t_f, n_steps, trajectory.breakpoints, order)
    potential = PotentialModel(shape, trajectory)
    psi = np.array(psi_target.amplitudes, dtype=complex)
    yield Wavefunction(psi.copy(), psi_target.grid, t_f)
    for j in range(prop.n_steps - 1, -1, -1):
        psi = prop.step(psi, potential, j, inverse=True)
        yield Wavefunction(psi.copy(), psi_target.grid, float(prop.times[j]))


# --- transport ----------------------------------------------------------------------


STATE_CONVENTIONS = ("perturbed", "reference")


@dataclass
class TransportRun:
    """States and propagator of one transport, for the sensitivity integrals."""

    grid: Grid
    propagator: SplitOperator
    potential: PotentialModel
    initial: np.ndarray
    target: np.ndarray
    final: np.ndarray

    @property
    def fidelity(self) -> float:
        return fidelity(self.final, self.target, self.grid)

    @property
    def overlap(self) -> complex:
        """<target|final>."""
        return complex(self.grid.inner(self.target, self.final))


def transport_states(shape, reference_shape, distance: float, grid: Grid, convention: str,
                     tol: float = 1e-12):
    """Initial (at 0) and target (at ``distance``) ground states.

    With ``convention='perturbed'`` both are ground states of ``shape``; with
    ``'reference'`` of ``reference_shape`` (the error-free potential).
    """
    if convention not in STATE_CONVENTIONS:
        raise ValueError(f"state convention must be one of {STATE_CONVENTIONS}")
    s = shape if convention == "perturbed" else reference_shape
    return ground_state_of(s, 0.0, grid, tol).amplitudes, ground_state_of(s, distance, grid, tol).amplitudes


def run_transport(trajectory: ControlFunction, shape, problem: DimensionlessParams,
                  numerics: Numerics = Numerics(), reference_shape=None,
                  convention: str = "reference") -> TransportRun:
    grid = numerics.grid(problem.distance)
    initial, target = transport_states(shape, reference_shape or shape, problem.distance, grid,
                                       convention, numerics.imag_time_tol)
    prop = numerics.propagator(grid, trajectory)
    potential = PotentialModel(shape, trajectory)
    final = prop.run(initial, potential)
    return TransportRun(grid, prop, potential, initial, target, final)


def simulate_transport(trajectory: ControlFunction, shape, problem: DimensionlessParams,
                       numerics: Numerics = Numerics(), reference_shape=None,
                       convention: str = "reference") -> float:
    """Fidelity of transporting the ground state from 0 to ``problem.distance``."""
    return run_transport(trajectory, shape, problem, numerics, reference_shape, convention).fidelity
