"""Noise sensitivity of the STA trajectories approaching the adiabatic line S_N = C t_f."""

import argparse
import csv
from pathlib import Path

import numpy as np

from esta_transport import (
    FAMILIES, NOISE_KINDS, adiabatic_constant_exact, default_problem, noise_sensitivity, sta_trajectory,
    tau_to_internal,
)

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="out/noise_adiabatic.csv")
    p.add_argument("--tf", default="1,1.5,2,3,4", help="comma-separated t_f / tau values")
    args = p.parse_args()
    problem = default_problem()
    tfs = [float(s) for s in args.tf.split(",")]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tf_over_tau", "trajectory", "noise_kind", "S_N", "c_exact_tf"])
        for kind in NOISE_KINDS:
            c = adiabatic_constant_exact(kind, problem)
            for family in FAMILIES:
                for tf in tfs:
                    _, q0 = sta_trajectory(family, problem, tau_to_internal(tf))
                    s_n = noise_sensitivity(q0, kind, problem)
                    w.writerow([tf, f"q0_{family}", kind, f"{s_n:.12g}", f"{c * q0.t_f:.12g}"])
                    fh.flush()
                    print(f"{kind:9s} {family:10s} t_f/tau {tf:4.2f}  S_N/(C t_f) = {s_n / (c * q0.t_f):.4f}")
