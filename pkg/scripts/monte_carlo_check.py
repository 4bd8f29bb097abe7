"""Stochastic propagation check of the perturbative noise sensitivity."""

import argparse

from esta_transport import default_problem, sta_trajectory, tau_to_internal
from esta_transport._mc_oracle import monte_carlo_slope

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--family", default="classical")
    p.add_argument("--tf", type=float, default=1.2)
    p.add_argument("--kind", default="position")
    p.add_argument("--realizations", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    problem = default_problem()
    _, q0 = sta_trajectory(args.family, problem, tau_to_internal(args.tf))
    r = monte_carlo_slope(q0, args.kind, problem, args.realizations, seed=args.seed)
    print(f"mean F at eta^2 = {list(r.eta2)}: {list(r.mean_fidelity)}")
    print(f"slope {r.slope:.5f} +- {r.slope_stderr:.5f}, S_N {r.s_n:.5f} (+- {r.s_n_error:.1e}), z = {r.z_score:.3f}")
