"""Determinant formula against direct scalar products for M = 1, 2.

Prints relative errors and Cauchy-kernel condition numbers; on-shell sets
whose dual vector is null are listed but not compared.
"""

import argparse

import numpy as np

from tlbethe.bethe import NULL_STATE_RATIO, collapse_ratio, m1_closed_form_roots, random_rapidities, solve_bethe
from tlbethe.model import ModelParams
from tlbethe.scalar_product import SlavnovInput, direct_scalar_product, relative_error, slavnov_formula


def on_shell_sets(M, p, seeds):
    if M == 1:
        return [[r] for r in m1_closed_form_roots(p)]
    return [list(s.roots) for s in solve_bethe(M, p, seeds, np.random.default_rng(0))]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--Q", type=float, default=1.1)
    ap.add_argument("--pairs", type=int, default=5, help="random vbar per on-shell ubar")
    ap.add_argument("--seeds", type=int, default=200)
    args = ap.parse_args()
    rng = np.random.default_rng(1)

    print(f"{'M':>1} {'N':>2} {'sets':>4} {'max rel err':>12} {'max cond':>9}  note")
    for M, Ns in ((1, range(2, 7)), (2, range(2, 5))):
        for N in Ns:
            p = ModelParams(N, args.Q)
            worst, cond, sets, null = 0.0, 0.0, 0, 0
            for ub in on_shell_sets(M, p, args.seeds):
                if collapse_ratio(ub, p) < NULL_STATE_RATIO:
                    null += 1
                    continue
                sets += 1
                for _ in range(args.pairs):
                    vb = random_rapidities(rng, M, p)
                    res = slavnov_formula(SlavnovInput(ub, vb, p))
                    worst = max(worst, relative_error(res.value, direct_scalar_product(ub, vb, p)))
                    cond = max(cond, res.cauchy_condition)
            note = f"{null} null set(s) skipped" if null else ""
            print(f"{M:>1} {N:>2} {sets:>4} {worst:>12.2e} {cond:>9.1e}  {note}")


if __name__ == "__main__":
    main()
