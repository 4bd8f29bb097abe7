"""Lattice potential shapes in oscillator units, with systematic-error deformations.

Every function takes the displacement from the trap centre, y = x - Q(t).
``delta`` is the dimensionless error strength of one of three kinds:

* ``correlated``: U0 (1+delta) sin^2(k0 y / sqrt(1+delta))  (trap frequency fixed)
* ``amplitude``:  U0 (1+delta) sin^2(k0 y)
* ``wavenumber``: U0 sin^2(k0 sqrt(1+delta) y)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ERROR_KINDS = ("correlated", "amplitude", "wavenumber")


@dataclass(frozen=True)
class LatticeShape:
    u0: float
    k0: float
    kind: str = "amplitude"
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ERROR_KINDS:
            raise ValueError(f"unknown error kind {self.kind!r}; expected one of {ERROR_KINDS}")
        if self.delta <= -1.0:
            raise ValueError("error strength must satisfy 1 + delta > 0")

    @property
    def depth(self) -> float:
        return self.u0 * (1.0 + self.delta) if self.kind in ("correlated", "amplitude") else self.u0

    @property
    def wavenumber(self) -> float:
        a = 1.0 + self.delta
        return {"correlated": self.k0 / np.sqrt(a), "amplitude": self.k0, "wavenumber": self.k0 * np.sqrt(a)}[self.kind]

    @property
    def curvature(self) -> float:
        """V''(0) = omega^2 for unit mass."""
        return 2.0 * self.depth * self.wavenumber**2

    def __call__(self, y):
        return self.depth * np.sin(self.wavenumber * y) ** 2

    def force_gradient(self, y):
        """dV/dy."""
        k = self.wavenumber
        return self.depth * k * np.sin(2.0 * k * y)

    def d_delta(self, y):
        """dV/d(delta) at this shape's delta, holding y fixed."""
        a = 1.0 + self.delta
        k, kd = self.wavenumber, self.k0
        if self.kind == "amplitude":
            return self.u0 * np.sin(kd * y) ** 2
        if self.kind == "wavenumber":
            # d/da sin^2(k0 sqrt(a) y) = sin(2 k y) k0 y / (2 sqrt(a))
            return self.u0 * np.sin(2.0 * k * y) * kd * y / (2.0 * np.sqrt(a))
        # correlated: d/da [a sin^2(k0 y / sqrt(a))]
        return self.u0 * (np.sin(k * y) ** 2 - 0.5 * k * y * np.sin(2.0 * k * y))

    def d_delta_force_gradient(self, y):
        """d^2 V / (dy d delta)."""
        a = 1.0 + self.delta
        k, kd, u0 = self.wavenumber, self.k0, self.u0
        if self.kind == "amplitude":
            return u0 * kd * np.sin(2.0 * kd * y)
        if self.kind == "wavenumber":
            # V_y = u0 k sin(2 k y), k = k0 sqrt(a)
            dk = kd / (2.0 * np.sqrt(a))
            return u0 * dk * (np.sin(2.0 * k * y) + 2.0 * k * y * np.cos(2.0 * k * y))
        # V_y = u0 k0 sqrt(a) sin(2 k y), k = k0 / sqrt(a)
        return u0 * kd / (2.0 * np.sqrt(a)) * (np.sin(2.0 * k * y) - 2.0 * k * y * np.cos(2.0 * k * y))

    def with_delta(self, delta: float) -> "LatticeShape":
        return LatticeShape(self.u0, self.k0, self.kind, delta)


@dataclass(frozen=True)
class HarmonicShape:
    """V(y) = omega^2 y^2 / 2, the reference potential the STA trajectories solve exactly."""

    omega: float = 1.0

    def __call__(self, y):
        return 0.5 * self.omega**2 * np.asarray(y) ** 2

    def force_gradient(self, y):
        return self.omega**2 * np.asarray(y)

    @property
    def curvature(self) -> float:
        return self.omega**2


def lattice_for(problem, kind: str = "amplitude", delta: float = 0.0) -> LatticeShape:
    return LatticeShape(problem.u_tilde, problem.k0, kind, delta)
