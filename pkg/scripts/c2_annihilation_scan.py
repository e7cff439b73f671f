"""Norm of <0|C2(u1) at every M=1 Bethe root, N = 2..6, both q-branches.

Off-shell control points are printed alongside so the on-shell zeros stand out.
"""

import argparse

import numpy as np

from tlbethe.bethe import m1_closed_form_roots
from tlbethe.model import ModelParams
from tlbethe.scalar_product import check_c2_annihilation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--Q", type=float, default=1.1)
    ap.add_argument("--N-max", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    print(f"{'N':>2} {'branch':>6} {'roots':>5} {'max on-shell':>13} {'min off-shell':>14}")
    for N in range(2, args.N_max + 1):
        for br in ("plus", "minus"):
            p = ModelParams(N, args.Q, br)
            roots = m1_closed_form_roots(p)
            on = max(check_c2_annihilation(r, p) for r in roots)
            off_pts = np.exp(rng.uniform(-0.3, 0.3, 3) + 1j * rng.uniform(0, 2 * np.pi, 3))
            off = min(check_c2_annihilation(complex(u), p, require_on_shell=False) for u in off_pts)
            print(f"{N:>2} {br:>6} {len(roots):>5} {on:>13.2e} {off:>14.2e}")


if __name__ == "__main__":
    main()
