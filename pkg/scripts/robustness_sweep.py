"""Systematic-error sensitivity S and bound B for all trajectories and error kinds."""

import argparse
import sys

from esta_transport.cli import main, read_csv

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="out/robustness")
    p.add_argument("--workers", default="1")
    p.add_argument("--tf-min", default="1.0")
    p.add_argument("--tf-max", default="1.3")
    p.add_argument("--tf-step", default="0.1")
    args = p.parse_args()
    code = main(["robustness", "--out-dir", args.out_dir, "--workers", args.workers, "--svg",
                 "--tf-min", args.tf_min, "--tf-max", args.tf_max, "--tf-step", args.tf_step])
    if code:
        sys.exit(code)
    rows = {(r["tf_over_tau"], r["trajectory"], r["error_kind"]): r
            for r in read_csv(f"{args.out_dir}/robustness.csv")}
    for (tf, label, kind), r in sorted(rows.items()):
        if label.startswith("Q_"):
            sta = rows[tf, "q0_" + label[2:], kind]
            print(f"{tf} {label[2:]:10s} {kind:11s} S {float(sta['S']):8.4f} -> {float(r['S']):8.4f}  "
                  f"B {float(sta['B']):8.4f} -> {float(r['B']):8.4f}")
