import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad, trapezoid

from esta_transport.control import ControlFunction, polynomial_qc
from esta_transport.modes import (
    TransportModeSet, gauss_hermite_matrix_elements, hermite_eigenfunction, hermite_functions, lr_phase,
    mode_matrix_element,
)
from oracles import phi

QC = polynomial_qc(10.9944, 6.0)


@pytest.mark.parametrize("n", range(9))
def test_normalisation(n):
    val, _ = quad(lambda x: hermite_eigenfunction(n, x) ** 2, -np.inf, np.inf)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_explicit_forms():
    x = np.linspace(-6, 6, 101)
    np.testing.assert_allclose(hermite_eigenfunction(0, x), np.pi**-0.25 * np.exp(-x**2 / 2), atol=1e-15)
    assert hermite_eigenfunction(1, 0.0) == 0.0
    for n in range(12):
        np.testing.assert_allclose(hermite_functions(11, x)[n], phi(n, x), atol=1e-12)


def test_recurrence_is_stable_at_high_order():
    x = np.linspace(-15, 15, 3001)
    h = hermite_functions(60, x)
    gram = trapezoid(h[:, None, :] * h[None, :, :], x, axis=-1)
    np.testing.assert_allclose(gram, np.eye(61), atol=1e-9)


def test_lr_phase_properties():
    assert lr_phase(3, 0.0, QC) == 0.0
    for t in (0.7, 3.0, 5.9):
        assert lr_phase(0, t, QC) - lr_phase(4, t, QC) == pytest.approx(4 * t, rel=1e-12)
    static = ControlFunction(lambda t, nu: np.zeros_like(t), 6.0, "static")
    assert lr_phase(2, 1.3, static) == pytest.approx(-2.5 * 1.3)


def test_mode_orthonormality():
    modes = TransportModeSet(QC, max_n=4)
    for n in range(4):
        for m in range(4):
            assert modes.orthonormality(n, m, 2.3) == pytest.approx(float(n == m), abs=1e-10)


def test_unit_function_gives_delta():
    modes = TransportModeSet(QC, max_n=6)
    vals = modes.matrix_elements(lambda x, t: np.ones_like(x), np.array([0.5, 3.0]))
    np.testing.assert_allclose(vals[:, 0], np.eye(7)[0], atol=1e-13)


@given(st.floats(min_value=0.0, max_value=6.0))
@settings(max_examples=20, deadline=None)
def test_position_matrix_element(t):
    modes = TransportModeSet(QC, max_n=3)
    qc_t = float(QC(t))
    val = mode_matrix_element(1, lambda x: x - qc_t, t, modes)
    assert val == pytest.approx(np.exp(1j * t) / np.sqrt(2), abs=1e-12)


def test_lattice_matrix_element_dense_oracle():
    k0, t = 0.28574, 2.1
    modes = TransportModeSet(QC, max_n=4)
    qc_t = float(QC(t))
    val = mode_matrix_element(2, lambda x: np.sin(k0 * (x - qc_t)) ** 2, t, modes)
    u = np.linspace(-14, 14, 20001)
    ref = np.exp(2j * t) * trapezoid(phi(2, u) * np.sin(k0 * u) ** 2 * phi(0, u), u)
    assert abs(val - ref) < 1e-10


def test_under_resolved_quadrature_warns():
    modes = TransportModeSet(QC, max_n=2, quadrature_order=6)
    with pytest.warns(RuntimeWarning, match="under-resolves"):
        mode_matrix_element(2, lambda x: np.cos(3.0 * x), 1.0, modes)


def test_gauss_hermite_polynomials_exact():
    # products phi_n phi_0 x^k are integrated exactly for small degree
    from esta_transport.modes import gauss_hermite_nodes

    u = gauss_hermite_nodes(20)
    vals = gauss_hermite_matrix_elements(u[None, :] ** 2, 20, 2)[0]
    np.testing.assert_allclose(vals, [0.5, 0.0, 1 / np.sqrt(2)], atol=1e-13)
