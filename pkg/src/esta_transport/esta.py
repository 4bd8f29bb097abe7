"""The eSTA correction: G_n, K_n, perturbative fidelity/gradient and the parabola step."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .control import ControlFunction, CorrectionBasis, SmoothingSpec, build_basis, esta_control, sta_trajectory
from .lattice import HarmonicShape, lattice_for
from .modes import TransportModeSet
from .units import DimensionlessParams

DEGENERATE_THRESHOLD = 1e-24


class DegenerateGradient(RuntimeWarning):
    pass


@dataclass
class EstaInputs:
    """Everything the perturbative estimates need.

    ``system`` is the potential shape of the real Hamiltonian (lattice by
    default) and ``reference`` the harmonic shape the STA trajectory solves.
    ``system_trajectory`` moves the system potential; it defaults to ``q0``
    and is only changed to probe the estimates away from the STA point.
    """

    qc: ControlFunction
    q0: ControlFunction
    basis: CorrectionBasis
    problem: DimensionlessParams
    N: int = 4
    nodes_per_panel: int = 64
    gh_order: int = 80
    system: object = None
    reference: object = None
    system_trajectory: ControlFunction | None = None
    check_convergence: bool = True

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("mode cutoff N must be >= 1")
        if not np.isclose(self.q0.t_f, self.basis.t_f):
            raise ValueError("q0 and basis must share t_f")
        if self.system is None:
            self.system = lattice_for(self.problem)
        if self.reference is None:
            self.reference = HarmonicShape(self.problem.omega0)

    @property
    def t_f(self) -> float:
        return self.q0.t_f


@dataclass
class EpsilonVector:
    values: np.ndarray
    gn: np.ndarray
    kn: np.ndarray
    fidelity_estimate: float
    degenerate: bool = False

    def __len__(self):
        return len(self.values)


def time_quadrature(panels, nodes_per_panel: int):
    """Composite Gauss-Legendre nodes and weights over consecutive panels."""
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    ts, ws = [], []
    for a, b in zip(panels[:-1], panels[1:]):
        ts.append(0.5 * (b - a) * x + 0.5 * (b + a))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(ts), np.concatenate(ws)


def _integrals(inputs: EstaInputs, nodes_per_panel: int, system=None, with_k=True):
    """(G_n, K_{n,l}) for n = 1..N from one sweep over the time nodes."""
    system = inputs.system if system is None else system
    q0 = inputs.q0
    traj = inputs.system_trajectory or q0
    modes = TransportModeSet(inputs.qc, inputs.problem.omega0, inputs.N, inputs.gh_order)
    panels = np.union1d(q0.panels(), traj.panels())
    t, w = time_quadrature(panels, nodes_per_panel)
    q0_t = np.asarray(q0(t))[:, None]
    tr_t = np.asarray(traj(t))[:, None]

    def delta_v(x, tt):
        return system(x - tr_t) - inputs.reference(x - q0_t)

    n = np.arange(1, inputs.N + 1)
    phase = modes.phase_factor(n, t)
    g_t = phase * modes.spatial_elements(delta_v, t)[1:]
    gn = g_t @ w
    if not with_k:
        return gn, None
    f_t = phase * modes.spatial_elements(lambda x, tt: system.force_gradient(x - tr_t), t)[1:]
    p_t = inputs.basis(t)  # (L, T)
    kn = -(f_t * w) @ p_t.T  # (N, L)
    return gn, kn


def compute_gn_kn(inputs: EstaInputs, system=None, with_k: bool = True):
    """All G_n (shape N) and K_{n,l} (shape N x L).

    Warns when doubling the time nodes moves |G_n| by more than 1e-8.
    """
    gn, kn = _integrals(inputs, inputs.nodes_per_panel, system, with_k)
    if inputs.check_convergence:
        g2, _ = _integrals(inputs, 2 * inputs.nodes_per_panel, system, with_k=False)
        change = np.max(np.abs(np.abs(g2) - np.abs(gn)))
        if change > 1e-8:
            warnings.warn(f"time quadrature not converged: |G_n| changes by {change:.2e} "
                          f"when doubling nodes", RuntimeWarning, stacklevel=2)
    return gn, kn


def compute_Gn(n: int, inputs: EstaInputs) -> complex:
    if not 1 <= n <= inputs.N:
        raise ValueError(f"n must lie in 1..{inputs.N}")
    return complex(compute_gn_kn(inputs, with_k=False)[0][n - 1])


def compute_Kn(n: int, l: int, inputs: EstaInputs) -> complex:
    if not 1 <= n <= inputs.N or not 1 <= l <= inputs.basis.L:
        raise ValueError("index out of range")
    return complex(compute_gn_kn(inputs)[1][n - 1, l - 1])


def fidelity_from_gn(gn) -> float:
    return 1.0 - float(np.sum(np.abs(gn) ** 2))


def gradient_from_gn_kn(gn, kn) -> np.ndarray:
    """-2 sum_n Re(G_n K_n^*), componentwise in l."""
    return -2.0 * np.real(np.conj(kn) * gn[:, None]).sum(axis=0)


def estimate_fidelity_tdpt(inputs: EstaInputs) -> float:
    return fidelity_from_gn(compute_gn_kn(inputs, with_k=False)[0])


def estimate_gradient_tdpt(inputs: EstaInputs) -> np.ndarray:
    gn, kn = compute_gn_kn(inputs)
    return gradient_from_gn_kn(gn, kn)


def epsilon_from_gn_kn(gn, kn):
    """Parabola step; returns (epsilon, degenerate)."""
    num = np.sum(np.abs(gn) ** 2)
    direction = np.real(np.conj(gn)[:, None] * kn).sum(axis=0)
    norm2 = float(direction @ direction)
    if norm2 < DEGENERATE_THRESHOLD:
        return np.zeros(kn.shape[1]), True
    return -num * direction / norm2, False


def compute_epsilon(inputs: EstaInputs) -> EpsilonVector:
    gn, kn = compute_gn_kn(inputs)
    eps, degenerate = epsilon_from_gn_kn(gn, kn)
    if degenerate:
        warnings.warn("eSTA gradient vanishes; returning epsilon = 0", DegenerateGradient, stacklevel=2)
    return EpsilonVector(eps, gn, kn, fidelity_from_gn(gn), degenerate)


@dataclass
class EstaDesign:
    """A full trajectory design: STA pieces plus the eSTA correction."""

    family: str
    qc: ControlFunction
    q0: ControlFunction
    basis: CorrectionBasis
    epsilon: EpsilonVector
    Q: ControlFunction
    inputs: EstaInputs = field(repr=False)


def design(family: str, problem: DimensionlessParams, t_f: float, L: int = 8, N: int = 4,
           smoothing: SmoothingSpec | None = SmoothingSpec(), **kwargs) -> EstaDesign:
    """Build q_c, q_0 and the eSTA trajectory Q for one family at internal time ``t_f``."""
    qc, q0 = sta_trajectory(family, problem, t_f, smoothing)
    basis = build_basis(L, t_f)
    inputs = EstaInputs(qc=qc, q0=q0, basis=basis, problem=problem, N=N, **kwargs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGradient)
        eps = compute_epsilon(inputs)
    return EstaDesign(family, qc, q0, basis, eps, esta_control(q0, basis, eps.values), inputs)


def with_system(inputs: EstaInputs, **changes) -> EstaInputs:
    return replace(inputs, **changes)
