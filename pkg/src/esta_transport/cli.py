"""Command-line driver: trajectory export, eSTA vectors and the fidelity/robustness/noise/deviation sweeps.

Every command writes CSV files whose first line is ``# schema=1``; SVG
renderings are optional (``--svg``).  Exit codes: 0 success, 1 runtime
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, SweepConfig, load_config
from .deviation import control_deviation
from .dynamics import simulate_transport
from .esta import design
from .lattice import lattice_for
from .noise import adiabatic_constant_approx, adiabatic_constant_exact, noise_report
from .robustness import fidelity_vs_delta, robustness_report
from .units import derive_units, nondimensionalize, tau_to_internal

SCHEMA = "# schema=1"

FIDELITY_COLUMNS = ("tf_over_tau", "trajectory", "delta", "fidelity")
ROBUSTNESS_COLUMNS = ("tf_over_tau", "trajectory", "error_kind", "F0", "S", "B")
ROBUSTNESS_DELTA_COLUMNS = ("tf_over_tau", "trajectory", "error_kind", "delta", "fidelity")
NOISE_COLUMNS = ("tf_over_tau", "trajectory", "noise_kind", "F0", "S_N", "B_N")
NOISE_CONSTANT_COLUMNS = ("noise_kind", "c_exact", "c_approx", "c_exact_tau2", "c_approx_tau2")
NOISE_MC_COLUMNS = ("tf_over_tau", "trajectory", "noise_kind", "slope", "slope_stderr", "S_N", "z_score")
DEVIATION_COLUMNS = ("tf_over_tau", "trajectory", "c_q", "c_q_upper_bound")
TRAJECTORY_COLUMNS = ("t_over_tf", "qc", "q0", "Q")


def _problem(cfg: SweepConfig):
    return nondimensionalize(derive_units(cfg.physical))


def _design(cfg: SweepConfig, family: str, tf_over_tau: float):
    return design(family, _problem(cfg), tau_to_internal(tf_over_tau), L=cfg.basis_size, N=cfg.mode_cutoff)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


class CsvSink:
    """Ordered CSV writer that flushes after every row."""

    def __init__(self, path: Path, columns):
        self.path = path
        self._fh = open(path, "w", newline="")
        self._fh.write(SCHEMA + "\n")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(columns)
        self.rows = []

    def write(self, rows):
        for row in rows:
            self._writer.writerow([_fmt(v) for v in row])
            self.rows.append(tuple(row))
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_csv(path) -> list[dict]:
    """Rows of a schema-1 CSV as dicts of strings."""
    with open(path) as fh:
        first = fh.readline().strip()
        if first != SCHEMA:
            raise ValueError(f"{path}: missing {SCHEMA!r} header")
        return list(csv.DictReader(fh))


def _run_points(func, args_list, workers: int):
    """Yield func(*args) in submission order over a bounded worker pool."""
    if workers <= 1 or len(args_list) <= 1:
        for args in args_list:
            yield func(*args)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(func, *zip(*args_list))


# --- sweep points (module level so worker processes can import them) ----------------


def fidelity_point(cfg: SweepConfig, tf: float, family: str):
    problem = _problem(cfg)
    lattice = lattice_for(problem)
    d = _design(cfg, family, tf)
    return [
        (tf, f"{label}_{family}", 0.0, simulate_transport(traj, lattice, problem, cfg.numerics))
        for label, traj in (("q0", d.q0), ("Q", d.Q))
    ]


def robustness_point(cfg: SweepConfig, tf: float, family: str):
    problem = _problem(cfg)
    d = _design(cfg, family, tf)
    rows = []
    for kind in cfg.error_kinds:
        for label, traj in (("q0", d.q0), ("Q", d.Q)):
            r = robustness_report(traj, kind, problem, cfg.f_reference, cfg.numerics, cfg.sensitivity_method)
            rows.append((tf, f"{label}_{family}", kind, r.fidelity_at_zero, r.sensitivity, r.bound))
    return rows


def robustness_delta_point(cfg: SweepConfig, family: str):
    problem, tf = _problem(cfg), cfg.tf_over_tau
    d = _design(cfg, family, tf)
    deltas = cfg.delta_grid
    rows = []
    for kind in cfg.error_kinds:
        for label, traj in (("q0", d.q0), ("Q", d.Q)):
            f = fidelity_vs_delta(traj, kind, problem, deltas, cfg.numerics)
            rows.extend((tf, f"{label}_{family}", kind, dl, fl) for dl, fl in zip(deltas, f))
    return rows


def noise_point(cfg: SweepConfig, tf: float, family: str):
    problem = _problem(cfg)
    d = _design(cfg, family, tf)
    rows, mc_rows = [], []
    for kind in cfg.noise_kinds:
        for label, traj in (("q0", d.q0), ("Q", d.Q)):
            r = noise_report(traj, kind, problem, cfg.f_reference, cfg.numerics)
            rows.append((tf, f"{label}_{family}", kind, r.fidelity_at_zero, r.s_n, r.b_n))
            if cfg.mc_realizations:
                from ._mc_oracle import monte_carlo_slope

                mc = monte_carlo_slope(traj, kind, problem, cfg.mc_realizations, seed=cfg.seed,
                                       numerics=cfg.numerics)
                mc_rows.append((tf, f"{label}_{family}", kind, mc.slope, mc.slope_stderr, mc.s_n, mc.z_score))
    return rows, mc_rows


def deviation_point(cfg: SweepConfig, tf: float, family: str):
    d = _design(cfg, family, tf)
    r = control_deviation(d, cfg.deviation_kind, cfg.deviation_method)
    return [(tf, f"Q_{family}", r.c_q, r.upper_bound)]


# --- commands -------------------------------------------------------------------------


def units_table(cfg: SweepConfig) -> list[tuple[str, str, str]]:
    u = derive_units(cfg.physical)
    p = nondimensionalize(u)
    return [
        ("mass", f"{cfg.mass_amu:g}", "amu"),
        ("wavelength", f"{cfg.wavelength_nm:g}", "nm"),
        ("alpha", f"{cfg.alpha:g}", ""),
        ("E_rec", f"{u.recoil_energy:.6e}", "J"),
        ("U0", f"{u.lattice_depth_U0:.6e}", "J"),
        ("k0", f"{u.wavenumber_k0:.6e}", "1/m"),
        ("omega0", f"{u.omega0:.6e}", "rad/s"),
        ("tau", f"{u.tau * 1e6:.4f}", "us"),
        ("sigma", f"{u.sigma * 1e9:.4f}", "nm"),
        ("U0_tilde", f"{u.u_tilde:.6g}", "hbar omega0"),
        ("k0_sigma", f"{p.k0:.6g}", ""),
        ("d", f"{p.distance:.6g}", "sigma"),
    ]


def cmd_units(cfg: SweepConfig, args) -> int:
    rows = units_table(cfg)
    width = max(len(r[0]) for r in rows)
    for name, value, unit in rows:
        print(f"{name:<{width}}  {value:>14}  {unit}")
    return 0


def cmd_trajectory(cfg: SweepConfig, args) -> int:
    out = _out_dir(cfg)
    s = np.linspace(0.0, 1.0, cfg.samples)
    for family in cfg.trajectories:
        d = _design(cfg, family, cfg.tf_over_tau)
        t = s * d.Q.t_f
        with CsvSink(out / f"trajectory_{family}.csv", TRAJECTORY_COLUMNS) as sink:
            sink.write(zip(s, d.qc(t), d.q0(t), d.Q(t)))
        if args.svg:
            _svg(out / f"trajectory_{family}.svg", {"qc": (s, d.qc(t)), "q0": (s, d.q0(t)), "Q": (s, d.Q(t))},
                 "t / t_f", "position / sigma")
    return 0


def cmd_epsilon(cfg: SweepConfig, args) -> int:
    out = _out_dir(cfg)
    for family in cfg.trajectories:
        eps = _design(cfg, family, cfg.tf_over_tau).epsilon
        with CsvSink(out / f"epsilon_{family}.csv", ("l", "epsilon_sigma")) as sink:
            sink.write((l + 1, float(v)) for l, v in enumerate(eps.values))
        with CsvSink(out / f"gn_{family}.csv", ("n", "re", "im")) as sink:
            sink.write((n + 1, float(g.real), float(g.imag)) for n, g in enumerate(eps.gn))
    return 0


def _sweep(cfg, func, args_list, path, columns):
    """Run sweep points in order into one CSV; partial rows survive a failure."""
    with CsvSink(path, columns) as sink:
        for rows in _run_points(func, args_list, cfg.workers):
            sink.write(rows)
        return sink.rows


def cmd_fidelity(cfg: SweepConfig, args) -> int:
    out = _out_dir(cfg)
    points = [(cfg, float(tf), fam) for tf in cfg.tf_grid for fam in cfg.trajectories]
    rows = _sweep(cfg, fidelity_point, points, out / "fidelity.csv", FIDELITY_COLUMNS)
    if args.svg:
        _svg_groups(out / "fidelity.svg", rows, 1, 0, 3, "t_f / tau", "fidelity")
    return 0


def cmd_robustness(cfg: SweepConfig, args) -> int:
    out = _out_dir(cfg)
    points = [(cfg, float(tf), fam) for tf in cfg.tf_grid for fam in cfg.trajectories]
    rows = _sweep(cfg, robustness_point, points, out / "robustness.csv", ROBUSTNESS_COLUMNS)
    curves = _sweep(cfg, robustness_delta_point, [(cfg, fam) for fam in cfg.trajectories],
                    out / "robustness_delta.csv", ROBUSTNESS_DELTA_COLUMNS)
    if args.svg:
        for kind in cfg.error_kinds:
            _svg_groups(out / f"robustness_delta_{kind}.svg", [r for r in curves if r[2] == kind],
                        1, 3, 4, "delta", "fidelity")
            _svg_groups(out / f"robustness_S_{kind}.svg", [r for r in rows if r[2] == kind],
                        1, 0, 4, "t_f / tau", "sensitivity S")
    return 0


def cmd_noise(cfg: SweepConfig, args) -> int:
    out = _out_dir(cfg)
    problem = _problem(cfg)
    with CsvSink(out / "noise_constants.csv", NOISE_CONSTANT_COLUMNS) as sink:
        tau2 = problem.omega0_per_tau**2
        for kind in cfg.noise_kinds:
            ce = adiabatic_constant_exact(kind, problem, cfg.numerics)
            ca = adiabatic_constant_approx(kind, problem)
            sink.write([(kind, ce, ca, ce / tau2, ca / tau2)])
    points = [(cfg, float(tf), fam) for tf in cfg.tf_grid for fam in cfg.trajectories]
    mc_sink = CsvSink(out / "noise_mc.csv", NOISE_MC_COLUMNS) if cfg.mc_realizations else None
    try:
        with CsvSink(out / "noise.csv", NOISE_COLUMNS) as sink:
            for rows, mc_rows in _run_points(noise_point, points, cfg.workers):
                sink.write(rows)
                if mc_sink:
                    mc_sink.write(mc_rows)
            rows = sink.rows
    finally:
        if mc_sink:
            mc_sink.close()
    if args.svg:
        for kind in cfg.noise_kinds:
            _svg_groups(out / f"noise_{kind}.svg", [r for r in rows if r[2] == kind],
                        1, 0, 4, "t_f / tau", "S_N")
    return 0


def cmd_deviation(cfg: SweepConfig, args) -> int:
    out = _out_dir(cfg)
    points = [(cfg, float(tf), fam) for tf in cfg.tf_grid for fam in cfg.trajectories]
    rows = _sweep(cfg, deviation_point, points, out / "deviation.csv", DEVIATION_COLUMNS)
    if args.svg:
        both = [r[:3] for r in rows] + [(r[0], r[1] + " bound", r[3]) for r in rows]
        _svg_groups(out / "deviation.svg", both, 1, 0, 2, "t_f / tau", "C_Q / (sigma tau)")
    return 0


COMMANDS = {
    "units": cmd_units,
    "trajectory": cmd_trajectory,
    "epsilon": cmd_epsilon,
    "fidelity": cmd_fidelity,
    "robustness": cmd_robustness,
    "noise": cmd_noise,
    "deviation": cmd_deviation,
}


# --- plotting -----------------------------------------------------------------------


def _svg(path: Path, curves: dict, xlabel: str, ylabel: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (x, y) in curves.items():
        ax.plot(x, y, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _svg_groups(path, rows, group_col, x_col, y_col, xlabel, ylabel):
    curves = {}
    for r in rows:
        xs, ys = curves.setdefault(r[group_col], ([], []))
        xs.append(float(r[x_col]))
        ys.append(float(r[y_col]))
    _svg(path, curves, xlabel, ylabel)


# --- argument handling --------------------------------------------------------------


def _out_dir(cfg: SweepConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _range(text: str) -> tuple[float, ...]:
    parts = [float(p) for p in text.replace(":", ",").split(",")]
    if len(parts) not in (2, 3):
        raise ValueError
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--out-dir")
    common.add_argument("--workers", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--svg", action="store_true", help="also write SVG plots")
    common.add_argument("--samples", type=int, help="trajectory export samples")
    common.add_argument("--trajectories", help="comma-separated families")
    common.add_argument("--tf", type=float, dest="tf_over_tau", help="single t_f / tau")
    common.add_argument("--tf-min", type=float)
    common.add_argument("--tf-max", type=float)
    common.add_argument("--tf-step", type=float)
    common.add_argument("--error-kind", help="correlated, amplitude or wavenumber")
    common.add_argument("--f-reference", type=float)
    common.add_argument("--delta-range", help="lo,hi[,step]")
    common.add_argument("--noise-kind", help="position or amplitude")
    common.add_argument("--mc-realizations", type=int)
    common.add_argument("--analytic", action="store_true", help="analytic d(eps)/d(delta) for C_Q")

    parser = argparse.ArgumentParser(prog="esta-transport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(args) -> SweepConfig:
    overrides = {}
    for key in ("out_dir", "workers", "seed", "samples", "tf_over_tau", "tf_min", "tf_max", "tf_step",
                "f_reference", "mc_realizations"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.trajectories:
        overrides["trajectories"] = tuple(s.strip() for s in args.trajectories.split(","))
    if args.error_kind:
        overrides["error_kinds"] = (args.error_kind,)
        overrides["deviation_kind"] = args.error_kind
    if args.noise_kind:
        overrides["noise_kinds"] = (args.noise_kind,)
    if args.analytic:
        overrides["deviation_method"] = "analytic"
    if args.delta_range:
        try:
            parts = _range(args.delta_range)
        except ValueError:
            raise ConfigError(f"invalid value for 'delta_range': {args.delta_range!r}") from None
        overrides.update(zip(("delta_min", "delta_max", "delta_step"), parts))
    if args.config and not Path(args.config).is_file():
        raise ConfigError(f"config file {args.config!r} not found")
    return load_config(args.config, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg, args)
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
