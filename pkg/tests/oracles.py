"""Independent reference computations used only by the tests."""

from __future__ import annotations

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import eig_banded, solve_banded
from scipy.special import eval_hermite, factorial

# central-difference weights for d^2/dx^2, 8th order
_D2 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])


def phi(n, x):
    """Harmonic eigenfunction from the explicit Hermite polynomial formula."""
    norm = 1.0 / np.sqrt(2.0**n * factorial(n) * np.sqrt(np.pi))
    return norm * eval_hermite(n, x) * np.exp(-0.5 * x**2)


def fd_hamiltonian_banded(x, v):
    """Upper banded form of -1/2 d^2/dx^2 + v with Dirichlet ends."""
    dx = x[1] - x[0]
    half = len(_D2) // 2
    ab = np.zeros((half + 1, len(x)))
    for offset in range(half + 1):
        ab[half - offset, offset:] = -0.5 * _D2[half + offset] / dx**2
    ab[half] += v
    return ab


def fd_ground_state(x, v):
    """Lowest eigenpair of the finite-difference Hamiltonian (normalised, positive)."""
    ab = fd_hamiltonian_banded(x, v)
    w, vec = eig_banded(ab, select="i", select_range=(0, 0))
    psi = vec[:, 0] / np.sqrt(np.sum(vec[:, 0] ** 2) * (x[1] - x[0]))
    return w[0], psi * np.sign(psi[np.argmax(np.abs(psi))])


def crank_nicolson(x, potential, psi0, t_f, n_steps):
    """Crank-Nicolson with the 8th-order Laplacian and the potential at step midpoints."""
    dx = x[1] - x[0]
    dt = t_f / n_steps
    half = len(_D2) // 2
    kin = -0.5 * _D2 / dx**2
    n = len(x)
    ab = np.zeros((2 * half + 1, n), dtype=complex)
    for k, c in enumerate(kin):
        off = k - half
        ab[half - off, max(off, 0):n + min(off, 0)] = 0.5j * dt * c
    psi = np.array(psi0, dtype=complex)
    for j in range(n_steps):
        v = potential(x, (j + 0.5) * dt)
        lhs = ab.copy()
        lhs[half] += 1.0 + 0.5j * dt * v
        # right-hand side (1 - i dt H / 2) psi
        h_psi = v * psi
        for k, c in enumerate(kin):
            off = k - half
            shifted = np.zeros_like(psi)
            if off >= 0:
                shifted[:n - off] = psi[off:]
            else:
                shifted[-off:] = psi[:n + off]
            h_psi = h_psi + c * shifted
        psi = solve_banded((half, half), lhs, psi - 0.5j * dt * h_psi)
    return psi


def dense_gn_kn(qc, q0, system, basis, n, l, n_time=200_001, n_space=1601, width=12.0):
    """G_n and K_{n,l} by trapezoid rules on dense uniform time and space grids."""
    t = np.linspace(0.0, q0.t_f, n_time)
    u = np.linspace(-width, width, n_space)
    shift = (np.asarray(qc(t)) - np.asarray(q0(t)))[:, None]
    weight = phi(n, u) * phi(0, u)
    g_space, k_space = [], []
    for sl in np.array_split(np.arange(n_time), 50):
        y = u[None, :] + shift[sl]
        g_space.append(trapezoid(weight * (system(y) - 0.5 * y**2), u, axis=1))
        k_space.append(trapezoid(weight * system.force_gradient(y), u, axis=1))
    phase = np.exp(1j * n * t)
    g = trapezoid(phase * np.concatenate(g_space), t)
    k = -trapezoid(basis(t)[l - 1] * phase * np.concatenate(k_space), t)
    return g, k


def single_site_potential(lattice, x, center):
    """Lattice potential with every other site filled in at the barrier height."""
    y = x - center
    half_period = np.pi / (2.0 * lattice.wavenumber)
    return np.where(np.abs(y) <= half_period, lattice(y), lattice.depth)
