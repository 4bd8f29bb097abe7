"""Control-function deviation C_Q of the eSTA trajectories and its upper bound."""

import argparse
import sys

from esta_transport.cli import main, read_csv

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="out/deviation")
    p.add_argument("--workers", default="1")
    p.add_argument("--analytic", action="store_true", help="differentiate the step formula instead of eSTA")
    args = p.parse_args()
    argv = ["deviation", "--out-dir", args.out_dir, "--workers", args.workers, "--svg"]
    code = main(argv + (["--analytic"] if args.analytic else []))
    if code:
        sys.exit(code)
    for r in read_csv(f"{args.out_dir}/deviation.csv"):
        print(f"{r['tf_over_tau']:>5s} {r['trajectory']:12s} C_Q {float(r['c_q']):.4f}  bound {float(r['c_q_upper_bound']):.4f}")
