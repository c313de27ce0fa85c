"""Empirical constants of the Green-function derivative bounds for every admissible case."""
import argparse

from singular_plate.errors import DomainError
from singular_plate.verification import BoundSpec, check_green_bound

CASES = ["ii1", "ii2", "ii3", "ii4", "i1", "i2", "i3"]


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 5])
    args = p.parse_args()
    for n in args.dims:
        for k in (0, 1, 2):
            for case in CASES:
                try:
                    spec = BoundSpec(n, k, case)
                except DomainError:
                    continue
                rep = check_green_bound(spec, pairs=args.pairs, seed=args.seed)
                s = rep.statistic
                print(f"n={n} k={k} {case:4s} constant={s['c']:.4e} "
                      f"growth={s['growth']:+.2%} {rep.verdict}")


if __name__ == "__main__":
    main()
