"""Solve on the unit disk for a range of exponents and tabulate the results."""
import argparse

import numpy as np

from singular_plate.solver import SolverConfig, solve
from singular_plate.verification import fit_boundary_rate, regularity_probe


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alphas", type=float, nargs="+", default=list(np.round(np.arange(0.1, 0.95, 0.1), 2)))
    p.add_argument("--nodes", type=int, default=512)
    p.add_argument("--dimension", type=int, default=2)
    args = p.parse_args()
    print(f"{'alpha':>6} {'M':>8} {'eps':>9} {'iters':>5} {'residual':>9} {'u(0)':>9} "
          f"{'c1':>7} {'c2':>7} {'c2/c1 half band':>15} {'D3 exponent':>11}")
    for a in args.alphas:
        rep = solve(SolverConfig(alpha=a, n_nodes=args.nodes, dimension=args.dimension))
        half = fit_boundary_rate(rep.u, rep.delta, (0.0, 0.05)).spread
        exponent = regularity_probe(rep.solution.w_at, a, 1e-3).exponent
        print(f"{a:6.2f} {rep.M:8.3f} {rep.epsilon:9.2e} {rep.iterations:5d} "
              f"{rep.integral_residual:9.1e} {rep.u_center:9.5f} {rep.c1:7.4f} {rep.c2:7.4f} "
              f"{half:15.4f} {exponent:11.3f}")


if __name__ == "__main__":
    main()
