"""Control-function deviation C_Q: how strongly the eSTA trajectory moves with a systematic error.

C_Q is the L1 norm in time of dQ/d(delta) at delta = 0, with
Q = q0 + sum_j eps_j P_j.  The derivative of eps comes either from a central
difference of the full eSTA step or from differentiating the parabola step
formula with the delta-derivatives of G_n and K_n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .esta import EstaDesign, _integrals, compute_epsilon, epsilon_from_gn_kn, with_system
from .lattice import ERROR_KINDS, lattice_for
from .units import TWO_PI

DERIVATIVE_METHODS = ("finite_difference", "analytic")


@dataclass
class DeviationReport:
    """C_Q and its bound in units of sigma * tau."""

    c_q: float
    upper_bound: float
    d_epsilon_d_delta: np.ndarray
    sta_term_norm: float


@dataclass(frozen=True)
class _DeltaDerivative:
    """Presents dV/d(delta) as a potential shape so the G/K sweep can integrate it."""

    shape: object

    def __call__(self, y):
        return self.shape.d_delta(y)

    def force_gradient(self, y):
        return self.shape.d_delta_force_gradient(y)


def _zero(y):
    return np.zeros_like(np.asarray(y, dtype=float))


def epsilon_derivative_from_integrals(gn, kn, dgn, dkn) -> np.ndarray:
    """d(eps)/d(delta) by the quotient rule on eps_j = -A B_j / sum_k B_k^2.

    A = sum_n |G_n|^2 and B_j = sum_n Re(G_n^* K_nj); ``dgn`` and ``dkn`` are
    the delta-derivatives of G_n (shape N) and K_nj (shape N x L).
    """
    gn, kn, dgn, dkn = (np.asarray(a) for a in (gn, kn, dgn, dkn))
    a = np.sum(np.abs(gn) ** 2)
    b = np.real(np.conj(gn)[:, None] * kn).sum(axis=0)
    d = float(b @ b)
    da = 2.0 * np.sum(np.real(np.conj(gn) * dgn))
    db = (np.real(np.conj(kn) * dgn[:, None]) + np.real(np.conj(gn)[:, None] * dkn)).sum(axis=0)
    return -(da * b + a * db) / d + a * b * (2.0 * float(b @ db)) / d**2


def _check_kind(kind: str):
    if kind not in ERROR_KINDS:
        raise ValueError(f"unknown error kind {kind!r}; expected one of {ERROR_KINDS}")


def epsilon_delta_derivative(design: EstaDesign, kind: str, method: str = "finite_difference",
                             h: float = 1e-3) -> np.ndarray:
    """d(eps_j)/d(delta) at delta = 0 for the lattice error ``kind``.

    Only the system potential inside G_n and K_n depends on delta; the STA
    trajectory, transport modes and harmonic reference stay fixed.
    """
    _check_kind(kind)
    inputs = with_system(design.inputs, check_convergence=False)
    if method == "finite_difference":
        eps = [compute_epsilon(with_system(inputs, system=lattice_for(inputs.problem, kind, s * h))).values
               for s in (1.0, -1.0)]
        return (eps[0] - eps[1]) / (2.0 * h)
    if method == "analytic":
        base = lattice_for(inputs.problem, kind, 0.0)
        gn, kn = _integrals(inputs, inputs.nodes_per_panel, system=base)
        _, degenerate = epsilon_from_gn_kn(gn, kn)
        if degenerate:
            return np.zeros(kn.shape[1])
        deriv = with_system(inputs, reference=_zero)
        dgn, dkn = _integrals(deriv, inputs.nodes_per_panel, system=_DeltaDerivative(base))
        return epsilon_derivative_from_integrals(gn, kn, dgn, dkn)
    raise ValueError(f"method must be one of {DERIVATIVE_METHODS}")


def sta_delta_derivative(design: EstaDesign, kind: str):
    """dq0/d(delta) as a function of time.

    q0 = qc + qc''/omega^2; the correlated error keeps omega fixed, the other
    two scale omega^2 by (1 + delta).
    """
    _check_kind(kind)
    if kind == "correlated":
        return lambda t: 0.0 * np.asarray(t, dtype=float)
    w2 = design.inputs.problem.omega0 ** 2
    return lambda t: -np.asarray(design.qc(t, 2)) / w2


def _l1(func, t_f: float, points, epsrel: float) -> float:
    inner = [p for p in points if 0.0 < p < t_f]
    return quad(lambda t: abs(float(func(t))), 0.0, t_f, points=inner or None,
                epsabs=0.0, epsrel=epsrel, limit=1000)[0]


def control_deviation(design: EstaDesign, kind: str, method: str = "finite_difference",
                      epsrel: float = 1e-6, d_epsilon=None) -> DeviationReport:
    """C_Q = int_0^t_f |dq0/d(delta) + sum_j P_j d(eps_j)/d(delta)| dt, in sigma * tau."""
    deps = (epsilon_delta_derivative(design, kind, method) if d_epsilon is None
            else np.asarray(d_epsilon, dtype=float))
    dq0 = sta_delta_derivative(design, kind)
    basis = design.basis
    t_f = basis.t_f
    points = np.union1d(design.q0.panels(), basis.nodes)

    c_q = _l1(lambda t: dq0(t) + basis(t) @ deps, t_f, points, epsrel)
    sta_norm = _l1(dq0, t_f, points, epsrel) if kind != "correlated" else 0.0
    bound = sta_norm + float(np.max(basis.l1_norms())) * float(np.sum(np.abs(deps)))
    return DeviationReport(c_q / TWO_PI, bound / TWO_PI, deps, sta_norm / TWO_PI)


def deviation_upper_bound(design: EstaDesign, kind: str, method: str = "finite_difference",
                          d_epsilon=None) -> float:
    """||dq0/d(delta)||_1 + max_j ||P_j||_1 * sum_j |d(eps_j)/d(delta)|, in sigma * tau."""
    return control_deviation(design, kind, method, d_epsilon=d_epsilon).upper_bound
