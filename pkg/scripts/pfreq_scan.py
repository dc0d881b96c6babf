"""Random search for negative frequency forms over the standard and corrupted candidates."""
import argparse

import numpy as np

from cyclic_polya import pfreq as pf


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--order", type=int, default=7)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()

    rng = np.random.default_rng(a.seed)
    cands = pf.standard_candidates(a.order) + [pf.corrupted_haar_candidate(n) for n in (3, 4, 5)]
    for g in cands:
        rep = pf.check_order(g, a.trials, rng)
        worst = min(o.min_relative for o in rep.orders)
        print(f"{g.name:<24s} {g.parity:<4s} {'pass' if rep.passed else 'FAIL'}  "
              f"min relative {worst:+.2e}")


if __name__ == "__main__":
    main()
