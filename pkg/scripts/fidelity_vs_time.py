"""Fidelity of STA and eSTA trajectories against transport time, with the F = 0.9 crossings."""

import argparse
import sys
from collections import defaultdict

import numpy as np

from esta_transport.cli import main, read_csv


def crossing(tf, f, level=0.9):
    """First t_f at which F rises through ``level``, by linear interpolation."""
    above = np.nonzero(f >= level)[0]
    if above.size == 0 or above[0] == 0:
        return float("nan")
    i = above[0]
    return tf[i - 1] + (level - f[i - 1]) * (tf[i] - tf[i - 1]) / (f[i] - f[i - 1])


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="out/fidelity")
    p.add_argument("--workers", default="1")
    args = p.parse_args()
    code = main(["fidelity", "--out-dir", args.out_dir, "--workers", args.workers, "--svg"])
    if code:
        sys.exit(code)
    curves = defaultdict(list)
    for r in read_csv(f"{args.out_dir}/fidelity.csv"):
        curves[r["trajectory"]].append((float(r["tf_over_tau"]), float(r["fidelity"])))
    for label, pts in sorted(curves.items()):
        tf, f = np.array(sorted(pts)).T
        print(f"{label:14s} F=0.9 at t_f/tau = {crossing(tf, f):.3f}")
