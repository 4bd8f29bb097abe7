"""Acceptance criteria at the desk-scale numerics (2048 points, dt = tau/2000)."""

import time

import numpy as np
import pytest

from conftest import record
from esta_transport import (
    ERROR_KINDS, HarmonicShape, NOISE_KINDS, Numerics, adiabatic_constant_approx, adiabatic_constant_exact,
    control_deviation, derive_units, error_bound, lattice_for, noise_sensitivity, sensitivity_fd,
    sensitivity_tdpt, simulate_transport, tau_to_internal,
)
from esta_transport._mc_oracle import monte_carlo_slope
from esta_transport.dynamics import PotentialModel, run_transport
from esta_transport.units import PhysicalParams
from oracles import crank_nicolson, fd_ground_state, single_site_potential

FAMILIES = ("poly", "quasi_opt", "classical")
TF_GRID = np.round(np.arange(0.8, 1.4501, 0.05), 10)
ROBUST_TF = (1.0, 1.1, 1.2, 1.3)


@pytest.fixture(scope="module")
def fidelity_table(get_design, problem, lattice):
    """F[label][family] over TF_GRID for label in ('q0', 'Q')."""
    table = {"q0": {}, "Q": {}}
    for fam in FAMILIES:
        for label in table:
            table[label][fam] = np.array([
                simulate_transport(getattr(get_design(fam, tf), label), lattice, problem) for tf in TF_GRID])
    return table


@pytest.fixture(scope="module")
def robustness_table(get_design, problem, lattice):
    """(label, family, tf, kind) -> (F0, S_fd, S_tdpt)."""
    out = {}
    for fam in FAMILIES:
        for tf in ROBUST_TF:
            d = get_design(fam, tf)
            for label in ("q0", "Q"):
                traj = getattr(d, label)
                f0 = simulate_transport(traj, lattice, problem)
                for kind in ERROR_KINDS:
                    out[label, fam, tf, kind] = (f0, sensitivity_fd(traj, kind, problem),
                                                 sensitivity_tdpt(traj, kind, problem))
    return out


def _crossing(tf, f, level=0.9):
    """First t_f at which F rises through ``level``, by linear interpolation."""
    above = np.nonzero(f >= level)[0]
    if above.size == 0 or above[0] == 0:
        return np.nan
    i = above[0]
    return tf[i - 1] + (level - f[i - 1]) * (tf[i] - tf[i - 1]) / (f[i] - f[i - 1])


def test_c01_units():
    tau_us = derive_units(PhysicalParams(133.0, 866.0, 150.0)).tau * 1e6
    ok = abs(tau_us - 20.0) / 20.0 <= 0.03
    record(1, ok, f"tau = {tau_us:.3f} us")
    assert ok


def test_c02_harmonic_exactness(sta, problem):
    worst = 1.0
    for fam in FAMILIES:
        for tf in (0.8, 1.0, 1.2):
            _, q0 = sta(fam, tf)
            worst = min(worst, simulate_transport(q0, HarmonicShape(), problem))
    ok = worst >= 1 - 1e-6
    record(2, ok, f"min F = 1 - {1 - worst:.2e}")
    assert ok


def test_c03_fidelity_thresholds(fidelity_table, sta, problem, lattice):
    tol = 0.05
    cross = {
        ("q0", "quasi_opt"): 1.2, ("q0", "classical"): 1.2,
        ("Q", "quasi_opt"): 1.03, ("Q", "classical"): 0.98,
    }
    found = {k: _crossing(TF_GRID, fidelity_table[k[0]][k[1]]) for k in cross}
    _, q01 = sta("poly", 1.5)
    f_poly = simulate_transport(q01, lattice, problem)
    ok = all(abs(found[k] - v) <= tol for k, v in cross.items()) and f_poly < 0.9
    detail = ", ".join(f"{l}_{f}@{found[l, f]:.3f}" for l, f in cross) + f", F(q0_poly, 1.5) = {f_poly:.4f}"
    record(3, ok, detail)
    assert ok


def test_c04_esta_dominance(fidelity_table):
    mask = TF_GRID >= 0.9 - 1e-9
    margins = [np.min(fidelity_table["Q"][f][mask] - fidelity_table["q0"][f][mask]) for f in FAMILIES]
    ok = min(margins) >= 0.0
    record(4, ok, "min F(Q) - F(q0) per family: " + ", ".join(f"{m:.3g}" for m in margins))
    assert ok


def test_c05_sensitivity_ordering(robustness_table):
    ratios = [robustness_table["Q", f, tf, "correlated"][1] / robustness_table["q0", f, tf, "correlated"][1]
              for f in ("quasi_opt", "classical") for tf in ROBUST_TF]
    ok = max(ratios) <= 1.0
    record(5, ok, f"max S(Q)/S(q0) = {max(ratios):.3f}")
    assert ok


def test_c06_tdpt_matches_fd(robustness_table):
    rel = [abs(st - sf) / sf for f0, sf, st in robustness_table.values() if f0 > 0.9]
    ok = len(rel) > 0 and max(rel) <= 0.05
    record(6, ok, f"{len(rel)} cases with F0 > 0.9, max rel diff = {max(rel):.2e}")
    assert ok


def test_c07_error_bounds(robustness_table):
    worst = np.inf
    for f in FAMILIES:
        for tf in (1.1, 1.2, 1.3):
            for kind in ERROR_KINDS:
                bq = error_bound(*robustness_table["Q", f, tf, kind][:2], 0.9)
                b0 = error_bound(*robustness_table["q0", f, tf, kind][:2], 0.9)
                worst = min(worst, bq - b0)
    ok = worst >= 0.0
    record(7, ok, f"min B(Q) - B(q0) = {worst:.3g}")
    assert ok


def test_c08_noise_constants(problem):
    ex = {k: adiabatic_constant_exact(k, problem) for k in NOISE_KINDS}
    ap = {k: adiabatic_constant_approx(k, problem) for k in NOISE_KINDS}
    rp, ra = ap["position"] / ex["position"], ap["amplitude"] / ex["amplitude"]
    r = ex["position"] / ex["amplitude"]
    ok = abs(rp - 0.964) <= 0.015 and abs(ra - 0.909) <= 0.015 and abs(r - 3.77) <= 0.12
    record(8, ok, f"approx/exact P = {rp:.4f}, A = {ra:.4f}; exact P/A = {r:.3f}")
    assert ok


def test_c09_adiabatic_convergence(sta, problem):
    t_f = tau_to_internal(4.0)
    worst = 0.0
    for kind in NOISE_KINDS:
        c = adiabatic_constant_exact(kind, problem)
        for fam in FAMILIES:
            _, q0 = sta(fam, 4.0)
            worst = max(worst, abs(noise_sensitivity(q0, kind, problem) / t_f / c - 1.0))
    ok = worst <= 0.05
    record(9, ok, f"max |S_N/(t_f C) - 1| = {worst:.4f}")
    assert ok


def test_c10_monte_carlo_oracle(sta, problem):
    _, q0 = sta("classical", 1.2)
    start = time.perf_counter()
    r = monte_carlo_slope(q0, "position", problem, realizations=200, eta2=(1e-4, 2e-4), seed=0)
    ok = abs(r.slope + r.s_n) <= 2.0 * r.combined_stderr
    record(10, ok, f"slope = {r.slope:.4f} +- {r.combined_stderr:.4f}, S_N = {r.s_n:.4f}, "
                   f"z = {r.z_score:.3f} ({time.perf_counter() - start:.0f} s)")
    assert ok


def test_c11_deviation_classification(get_design):
    lines, ok = [], True
    for tf in (1.0, 1.2, 1.4):
        rep = {f: control_deviation(get_design(f, tf), "correlated") for f in FAMILIES}
        c = {f: r.c_q for f, r in rep.items()}
        ok &= c["poly"] > c["quasi_opt"] and c["poly"] > c["classical"]
        ok &= all(r.upper_bound >= r.c_q for r in rep.values())
        lines.append(f"{tf}: " + "/".join(f"{c[f]:.3g}" for f in FAMILIES))
    record(11, ok, "C_Q poly/quasi_opt/classical at " + "; ".join(lines))
    assert ok


def test_c12_numerical_hygiene(get_design, problem, lattice):
    d = get_design("poly", 0.8)
    base = Numerics()
    run = run_transport(d.q0, lattice, problem, base)
    drift = abs(run.grid.norm(run.final) - run.grid.norm(run.initial))
    f = run.fidelity
    half_dt = Numerics(dt_over_tau=base.dt_over_tau / 2)
    f_dt = simulate_transport(d.q0, lattice, problem, half_dt)
    hard = get_design("classical", 1.0).Q
    df_hard = abs(simulate_transport(hard, lattice, problem, half_dt) - simulate_transport(hard, lattice, problem))
    f_grid = simulate_transport(d.q0, lattice, problem, Numerics(grid_points=2 * base.grid_points))

    # Crank-Nicolson oracle from finite-difference single-site states, extrapolated in dt
    g = run.grid
    _, psi0 = fd_ground_state(g.x, single_site_potential(lattice, g.x, 0.0))
    _, psit = fd_ground_state(g.x, single_site_potential(lattice, g.x, problem.distance))
    potential = PotentialModel(lattice, d.q0)
    n = base.n_steps(d.q0.t_f)
    f_cn = [abs(g.inner(psit, crank_nicolson(g.x, potential, psi0, d.q0.t_f, m * n))) ** 2 for m in (1, 2)]
    f_rich = (4 * f_cn[1] - f_cn[0]) / 3

    checks = {"drift": drift < 1e-10, "dt": max(abs(f_dt - f), df_hard) < 1e-7, "grid": abs(f_grid - f) < 1e-7,
              "cn": abs(f_rich - f) < 1e-6}
    ok = all(checks.values())
    record(12, ok, f"norm drift {drift:.1e}, dF(dt/2) {abs(f_dt - f):.1e} and {df_hard:.1e} (Q_classical 1.0), dF(2 grid) {abs(f_grid - f):.1e}, "
                   f"|F_CN - F| {abs(f_rich - f):.1e}")
    assert ok, checks
