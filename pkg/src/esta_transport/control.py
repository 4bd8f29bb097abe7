"""Trap trajectories: STA auxiliary functions, their inversion and the eSTA correction.

All functions of time are :class:`ControlFunction` objects evaluated as
``f(t, nu)`` for the ``nu``-th time derivative.  Outside ``[0, t_f]`` a
control is held at its endpoint value with vanishing derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import quad
from scipy.interpolate import BPoly

from .units import DimensionlessParams


class ControlFunction:
    def __init__(
        self,
        func: Callable[[np.ndarray, int], np.ndarray],
        t_f: float,
        kind: str,
        max_order: int = 2,
        breakpoints: Sequence[float] = (),
    ):
        self._func = func
        self.t_f = float(t_f)
        self.kind = kind
        self.max_order = max_order
        self.breakpoints = tuple(sorted(b for b in set(breakpoints) if 0.0 < b < self.t_f))

    def __call__(self, t, nu: int = 0):
        if nu > self.max_order:
            raise ValueError(f"{self.kind}: derivative order {nu} not available (max {self.max_order})")
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 0.0, self.t_f)
        out = np.asarray(self._func(tc, nu), dtype=float)
        if nu > 0:
            out = np.where((t < 0.0) | (t > self.t_f), 0.0, out)
        return out if out.ndim else float(out)

    def evaluate(self, t):
        return self(t, 0)

    def derivative1(self, t):
        return self(t, 1)

    def derivative2(self, t):
        return self(t, 2)

    def panels(self) -> np.ndarray:
        """Panel edges for piecewise-smooth quadrature over [0, t_f]."""
        return np.array([0.0, *self.breakpoints, self.t_f])

    def __repr__(self):
        return f"ControlFunction(kind={self.kind!r}, t_f={self.t_f:.6g})"


class _LocalPoly:
    """Polynomial in the local variable s = (t - a) / h."""

    def __init__(self, coeffs, a: float, h: float):
        self.coeffs = [np.asarray(coeffs, dtype=float)]
        self.a, self.h = float(a), float(h)

    def __call__(self, t, nu=0):
        while len(self.coeffs) <= nu:
            self.coeffs.append(npoly.polyder(self.coeffs[-1]))
        s = (np.asarray(t, dtype=float) - self.a) / self.h
        return npoly.polyval(s, self.coeffs[nu]) / self.h**nu


class _Piecewise:
    """Piecewise function; ``pieces`` is a list of (t_lo, t_hi, func(t, nu))."""

    def __init__(self, pieces):
        self.pieces = sorted(pieces, key=lambda p: p[0])

    def __call__(self, t, nu=0):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        n = len(self.pieces)
        for i, (lo, hi, f) in enumerate(self.pieces):
            last = i == n - 1
            mask = (t >= lo) & ((t <= hi) if last else (t < hi))
            if np.any(mask):
                out[mask] = f(t[mask], nu)
        return out

    @property
    def edges(self):
        return [p[0] for p in self.pieces] + [self.pieces[-1][1]]


# --- auxiliary functions q_c ---------------------------------------------------


def _boundary_matrix(order: int):
    """Rows of value/derivative conditions for monomials s^k at s=0 and s=1."""
    n = 2 * (order + 1)
    return np.array([_condition_row(s, nu, n) for s in (0.0, 1.0) for nu in range(order + 1)])


def polynomial_qc(d: float, t_f: float) -> ControlFunction:
    """Degree-9 polynomial with q_c(0)=0, q_c(t_f)=d and derivatives 1..4 zero at both ends."""
    A = _boundary_matrix(4)
    rhs = np.zeros(10)
    rhs[5] = d
    coeffs = np.linalg.solve(A, rhs)
    poly = _LocalPoly(coeffs, 0.0, t_f)
    return ControlFunction(poly, t_f, "qc_poly", max_order=9)


def _falling(p: float, nu: int) -> float:
    return float(np.prod([p - i for i in range(nu)])) if nu else 1.0


def _signed_pow(y, p):
    # real branch of y**p for rational p with odd denominator
    return np.sign(y) * np.abs(y) ** p


def quasi_optimal_fc(d: float, t_f: float):
    """f_c(t) = 3d/8 (1 - 2t/t_f)^(7/3) + 7d/4 t/t_f - 3d/8 and its derivatives."""

    def fc(t, nu=0):
        t = np.asarray(t, dtype=float)
        y = 1.0 - 2.0 * t / t_f
        p = 7.0 / 3.0
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 3.0 * d / 8.0 * _falling(p, nu) * (-2.0 / t_f) ** nu * _signed_pow(y, p - nu)
        if nu == 0:
            out = out + 7.0 * d / 4.0 * t / t_f - 3.0 * d / 8.0
        elif nu == 1:
            out = out + 7.0 * d / (4.0 * t_f)
        return out

    return fc


def _raw_quasi_optimal(d: float, t_f: float) -> ControlFunction:
    fc = quasi_optimal_fc(d, t_f)

    def second_half(t, nu):
        val = -((-1.0) ** nu) * fc(t_f - t, nu)
        return val + d if nu == 0 else val

    pw = _Piecewise([(0.0, t_f / 2, fc), (t_f / 2, t_f, second_half)])
    return ControlFunction(pw, t_f, "qc_quasi_opt", max_order=6, breakpoints=(t_f / 2,))


@dataclass(frozen=True)
class SmoothingSpec:
    """Smoothing windows of width ``window_fraction * t_f`` centred on ``window_centers``.

    Centres are given as fractions of t_f.  Windows touching an endpoint are
    clipped to [0, t_f].
    """

    window_fraction: float = 1.0 / 8.0
    window_centers: tuple = (0.0, 0.5, 1.0)

    def windows(self, t_f: float):
        w = self.window_fraction * t_f
        out = []
        for c in sorted(self.window_centers):
            lo, hi = max(0.0, c * t_f - w / 2), min(t_f, c * t_f + w / 2)
            if hi <= lo:
                raise ValueError(f"smoothing window at {c} t_f lies outside [0, t_f]")
            out.append((lo, hi))
        for (_, hi), (lo, _) in zip(out, out[1:]):
            if lo < hi - 1e-12 * t_f:
                raise ValueError("smoothing windows overlap")
        return out


def smooth(control: ControlFunction, spec: SmoothingSpec) -> ControlFunction:
    """Replace ``control`` inside each window by a Hermite interpolant.

    Interior window edges match value, first and second derivative of the
    retained function.  An edge lying on t=0 or t=t_f pins the endpoint value
    with derivatives 1..4 set to zero, so the extended boundary conditions
    still hold after smoothing.
    """
    t_f = control.t_f
    windows = spec.windows(t_f)
    end_values = (float(control(0.0)), float(control(t_f)))

    def edge_data(t, clipped_end):
        if clipped_end is not None:
            return [end_values[clipped_end], 0.0, 0.0, 0.0, 0.0]
        return [float(control(t, nu)) for nu in range(3)]

    patches = []
    for lo, hi in windows:
        left = edge_data(lo, 0 if lo == 0.0 else None)
        right = edge_data(hi, 1 if hi == t_f else None)
        bp = BPoly.from_derivatives([lo, hi], [left, right])
        derivs = {}

        def patch(t, nu, bp=bp, derivs=derivs):
            if nu not in derivs:
                derivs[nu] = bp.derivative(nu) if nu else bp
            return derivs[nu](t)

        patches.append((lo, hi, patch))

    pieces = []
    cursor = 0.0
    for lo, hi, patch in patches:
        if lo > cursor:
            pieces.append((cursor, lo, control._func))
        pieces.append((lo, hi, patch))
        cursor = hi
    if cursor < t_f:
        pieces.append((cursor, t_f, control._func))
    pw = _Piecewise(pieces)
    return ControlFunction(
        pw,
        t_f,
        control.kind,
        max_order=max(control.max_order, 6),
        breakpoints=tuple(control.breakpoints) + tuple(pw.edges),
    )


def quasi_optimal_qc(d: float, t_f: float, smoothing: SmoothingSpec | None = SmoothingSpec()) -> ControlFunction:
    raw = _raw_quasi_optimal(d, t_f)
    return smooth(raw, smoothing) if smoothing is not None else raw


def quasi_optimal_classical_qc(d: float, t_f: float) -> ControlFunction:
    """Maximal acceleration then deceleration: two parabolas meeting at t_f/2."""

    def first(t, nu):
        s = t / t_f
        return [2 * d * s**2, 4 * d * s / t_f, np.full_like(s, 4 * d / t_f**2)][nu] if nu < 3 else np.zeros_like(s)

    def second(t, nu):
        s = t / t_f - 1.0
        return [d * (1 - 2 * s**2), -4 * d * s / t_f, np.full_like(s, -4 * d / t_f**2)][nu] if nu < 3 else np.zeros_like(s)

    pw = _Piecewise([(0.0, t_f / 2, first), (t_f / 2, t_f, second)])
    return ControlFunction(pw, t_f, "qc_classical", max_order=6, breakpoints=(t_f / 2,))


def invert_q0(qc: ControlFunction, omega0: float = 1.0) -> ControlFunction:
    """Trap trajectory q_0 = q_c + q_c'' / omega0^2 solving the auxiliary equation."""

    def q0(t, nu):
        return qc(t, nu) + qc(t, nu + 2) / omega0**2

    kind = "q0_" + qc.kind.removeprefix("qc_")
    return ControlFunction(q0, qc.t_f, kind, max_order=qc.max_order - 2, breakpoints=qc.breakpoints)


# --- eSTA correction ---------------------------------------------------------


@dataclass
class CorrectionBasis:
    """Cardinal polynomials P_l(t), l = 1..L, of degree L+5 on [0, t_f].

    P_l vanishes with its first two derivatives at both endpoints and
    P_l(t_k) = delta_lk at the interior nodes t_k = k t_f / (L + 1).
    Coefficients are monomials in the centred variable x = 2 t / t_f - 1.
    """

    L: int
    t_f: float
    coeffs: np.ndarray  # (L, L+6)
    condition_number: float = field(default=np.nan)

    @property
    def nodes(self) -> np.ndarray:
        return self.t_f * np.arange(1, self.L + 1) / (self.L + 1)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    def __call__(self, t, nu: int = 0) -> np.ndarray:
        """Values of all P_l at ``t``; shape (L,) + shape(t)."""
        x = 2.0 * np.asarray(t, dtype=float) / self.t_f - 1.0
        c = self.coeffs.T
        for _ in range(nu):
            c = npoly.polyder(c)
        return npoly.polyval(x, c) * (2.0 / self.t_f) ** nu

    def l1_norms(self) -> np.ndarray:
        """||P_l||_1 over [0, t_f]."""
        return np.array([
            quad(lambda t, l=l: abs(self(t)[l]), 0.0, self.t_f, limit=200, epsabs=0, epsrel=1e-10)[0]
            for l in range(self.L)
        ])


def _condition_row(x: float, nu: int, n: int) -> np.ndarray:
    """d^nu/dx^nu of the monomials x^k, k < n, at ``x``."""
    row = np.zeros(n)
    for k in range(nu, n):
        row[k] = np.prod(np.arange(k - nu + 1, k + 1)) * x ** (k - nu)
    return row


def build_basis(L: int, t_f: float) -> CorrectionBasis:
    if L < 1:
        raise ValueError("L must be >= 1")
    n = L + 6
    A = np.zeros((n, n))
    A[:6] = [_condition_row(x, nu, n) for x in (-1.0, 1.0) for nu in range(3)]
    nodes = 2.0 * np.arange(1, L + 1) / (L + 1) - 1.0
    A[6:] = np.vander(nodes, n, increasing=True)
    rhs = np.zeros((n, L))
    rhs[6:] = np.eye(L)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(f"correction basis system is ill-conditioned (cond={cond:.3g})")
    coeffs = np.linalg.solve(A, rhs).T
    return CorrectionBasis(L=L, t_f=float(t_f), coeffs=coeffs, condition_number=cond)


def esta_control(q0: ControlFunction, basis: CorrectionBasis, epsilon) -> ControlFunction:
    """Q(t) = q_0(t) + sum_l epsilon_l P_l(t)."""
    eps = np.asarray(epsilon, dtype=float)
    if eps.shape != (basis.L,):
        raise ValueError(f"epsilon must have length {basis.L}, got shape {eps.shape}")
    if not np.isclose(q0.t_f, basis.t_f):
        raise ValueError("trajectory and basis have different t_f")

    def Q(t, nu):
        return q0(t, nu) + np.tensordot(eps, basis(t, nu), axes=1)

    kind = "esta_Q_" + q0.kind.removeprefix("q0_")
    return ControlFunction(Q, q0.t_f, kind, max_order=q0.max_order, breakpoints=q0.breakpoints)


# --- trajectory families -------------------------------------------------------

FAMILIES = ("poly", "quasi_opt", "classical")


def sta_trajectory(family: str, problem: DimensionlessParams, t_f: float,
                   smoothing: SmoothingSpec | None = SmoothingSpec()):
    """Return (q_c, q_0) for one of the three STA families at internal time ``t_f``."""
    d = problem.distance
    if family in ("poly", "1"):
        qc = polynomial_qc(d, t_f)
    elif family in ("quasi_opt", "2"):
        qc = quasi_optimal_qc(d, t_f, smoothing)
    elif family in ("classical", "3"):
        qc = quasi_optimal_classical_qc(d, t_f)
        if smoothing is not None:
            qc = smooth(qc, smoothing)
    else:
        raise ValueError(f"unknown trajectory family {family!r}; expected one of {FAMILIES}")
    return qc, invert_q0(qc, problem.omega0)
