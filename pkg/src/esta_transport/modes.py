"""Lewis-Riesenfeld transport modes of the moving harmonic trap.

chi_n(x, t) = exp(i theta_n) exp(i qc' x) phi_n(x - q_c), with phi_n the
harmonic eigenfunctions (hbar = m = omega0 = 1 unless stated).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_hermite

from .control import ControlFunction


def hermite_functions(n_max: int, x, sigma: float = 1.0) -> np.ndarray:
    """phi_0..phi_{n_max}(x) for an oscillator of length ``sigma``; shape (n_max+1,) + x.shape.

    Upward recurrence on the Gaussian-weighted functions, so no Hermite
    polynomial is ever formed on its own.
    """
    y = np.asarray(x, dtype=float) / sigma
    out = np.empty((n_max + 1,) + y.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * y**2) / np.sqrt(sigma)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * y * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * y * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_eigenfunction(n: int, x, sigma: float = 1.0):
    if n < 0:
        raise ValueError("n must be non-negative")
    return hermite_functions(n, x, sigma)[n]


@lru_cache(maxsize=16)
def _gauss_hermite_products(order: int, n_max: int):
    """Nodes and weights w_i e^{x_i^2} phi_n(x_i) phi_0(x_i), n = 0..n_max."""
    nodes, weights = roots_hermite(order)
    # phi_n phi_0 = e^{-x^2} h_n(x) h_0 with h_n the normalised polynomial part
    h = np.empty((n_max + 1, order))
    h[0] = np.pi**-0.25
    if n_max >= 1:
        h[1] = np.sqrt(2.0) * nodes * h[0]
    for n in range(1, n_max):
        h[n + 1] = np.sqrt(2.0 / (n + 1)) * nodes * h[n] - np.sqrt(n / (n + 1)) * h[n - 1]
    return nodes, weights * h * h[0]


def gauss_hermite_matrix_elements(f_values: np.ndarray, order: int, n_max: int) -> np.ndarray:
    """Integrals int phi_n(u) f(u) phi_0(u) du from ``f`` sampled on the GH nodes (last axis)."""
    _, w = _gauss_hermite_products(order, n_max)
    return np.asarray(f_values) @ w.T


def gauss_hermite_nodes(order: int) -> np.ndarray:
    return _gauss_hermite_products(order, 0)[0]


@dataclass
class TransportModeSet:
    qc: ControlFunction
    omega0: float = 1.0
    max_n: int = 8
    quadrature_order: int = 80
    _checked: set = field(default_factory=set, repr=False)

    def phase_factor(self, n, t):
        """exp(i (theta_0 - theta_n)) = exp(i n omega0 t); the kinetic integral cancels."""
        return np.exp(1j * np.multiply.outer(np.atleast_1d(n), np.asarray(t)) * self.omega0)

    def spatial_elements(self, f, t) -> np.ndarray:
        """int phi_n(u) f(u + q_c(t), t) phi_0(u) du for n = 0..max_n; shape (max_n+1, len(t)).

        ``f(x, t)`` is called with x of shape (len(t), order) and t of shape (len(t), 1).
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        u = gauss_hermite_nodes(self.quadrature_order)
        x = u[None, :] + np.asarray(self.qc(t))[:, None]
        vals = f(x, t[:, None])
        return gauss_hermite_matrix_elements(vals, self.quadrature_order, self.max_n).T

    def matrix_elements(self, f, t) -> np.ndarray:
        """<chi_n(t)| f |chi_0(t)> for n = 0..max_n; shape (max_n+1, len(t))."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.phase_factor(np.arange(self.max_n + 1), t) * self.spatial_elements(f, t)

    def orthonormality(self, n: int, m: int, t: float) -> complex:
        """<chi_n(t)|chi_m(t)> on a dense grid (independent of the GH tables)."""
        x = np.linspace(-40.0, 40.0, 40001) + float(self.qc(t))
        modes = self.wavefunctions(max(n, m), x, t)
        return complex(np.trapezoid(np.conj(modes[n]) * modes[m], x))

    def wavefunctions(self, n_max: int, x, t: float) -> np.ndarray:
        """chi_0..chi_{n_max}(x, t) including the Lewis-Riesenfeld phases."""
        sigma = 1.0 / np.sqrt(self.omega0)
        qc, qcd = float(self.qc(t)), float(self.qc(t, 1))
        phis = hermite_functions(n_max, np.asarray(x) - qc, sigma)
        theta = np.array([lr_phase(n, t, self.qc, self.omega0) for n in range(n_max + 1)])
        return np.exp(1j * theta)[:, None] * np.exp(1j * qcd * np.asarray(x))[None, :] * phis


def lr_phase(n: int, t: float, qc: ControlFunction, omega0: float = 1.0) -> float:
    """theta_n(t) = -(n + 1/2) omega0 t + int_0^t qc'^2 / 2 dt'."""
    if t == 0:
        return 0.0
    pts = [b for b in qc.breakpoints if b < t]
    kinetic, _ = quad(lambda s: 0.5 * qc(s, 1) ** 2, 0.0, t, points=pts or None, limit=200,
                      epsabs=1e-13, epsrel=1e-12)
    return -(n + 0.5) * omega0 * t + kinetic


def mode_matrix_element(n: int, f, t: float, modes: TransportModeSet, check: bool = True) -> complex:
    """<chi_n(t)| f(x) |chi_0(t)> for a spatial function ``f(x)``.

    Warns when raising the Gauss-Hermite order by half changes the value by
    more than 1e-8.
    """
    if n > modes.max_n:
        raise ValueError(f"n={n} exceeds the mode set (max_n={modes.max_n})")
    g = lambda x, _t: f(x)
    value = modes.matrix_elements(g, t)[n, 0]
    if check:
        finer = TransportModeSet(modes.qc, modes.omega0, modes.max_n, int(modes.quadrature_order * 1.5))
        ref = finer.matrix_elements(g, t)[n, 0]
        if abs(ref - value) > 1e-8:
            warnings.warn(
                f"Gauss-Hermite order {modes.quadrature_order} under-resolves the matrix element "
                f"(change {abs(ref - value):.2e} at 1.5x order)",
                RuntimeWarning,
                stacklevel=2,
            )
    return complex(value)
