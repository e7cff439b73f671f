"""Acceptance criteria 1-13 with pinned tolerances and wall-clock budgets.

Each criterion prints one line ``[PASS|FAIL] <id> <label>: measured ... tol ... time ...``.
Run directly (``python tests/test_acceptance.py``) for the summary alone.
"""

import itertools
import time
from dataclasses import dataclass, field

import numpy as np
import pytest
import scipy.linalg as la

from tlbethe.bethe import (NULL_STATE_RATIO, PROBES, BetheSolution, RapiditySet, check_action_identity,
                           collapse_ratio, m1_closed_form_roots, offshell_residual, random_rapidities,
                           same_eigenvalue_function, solve_bethe, verify_against_ed)
from tlbethe.coefficients import Coefficients, b2_limit_value, check_H_identities, induction_residuals
from tlbethe.lax import check_unitarity, check_yang_baxter
from tlbethe.model import ModelParams, biquadratic_X, build_X, check_tl_relations, rel_residual
from tlbethe.monodromy import (BlockCache, check_exchange_relations, check_reflection_equation, check_rtt,
                               hamiltonian_from_transfer, transfer_derivative_at_one, transfer_matrix)
from tlbethe.scalar_product import (SlavnovInput, check_c2_annihilation, direct_scalar_product, relative_error,
                                    slavnov_formula)

SEED = 20261019
BRANCHES = ("plus", "minus")


@dataclass
class Outcome:
    cid: int
    label: str
    measured: dict
    tolerance: dict
    budget: float
    seconds: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        within = all(self.measured[k] < self.tolerance[k] for k in self.tolerance)
        return within and self.seconds < self.budget

    def line(self):
        meas = ", ".join(f"{k}={self.measured[k]:.2e}<{self.tolerance[k]:.0e}" for k in self.tolerance)
        extra = f"  [{'; '.join(self.notes)}]" if self.notes else ""
        return (f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.cid:>2} {self.label}: {meas}; "
                f"time {self.seconds:.1f}s<{self.budget:.0f}s{extra}")


def _spectral(rng, spread=0.3):
    return complex(np.exp(rng.uniform(-spread, spread) + 1j * rng.uniform(0, 2 * np.pi)))


def _random_Q(rng):
    while True:
        Q = complex(rng.uniform(0.6, 1.8) * np.exp(1j * rng.uniform(-0.5, 0.5)))
        try:
            ModelParams(3, Q)
            return Q
        except ValueError:
            continue


def crit_1():
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(20):
        Q = _random_Q(rng)
        for N in (3, 4):
            worst = max(worst, max(check_tl_relations(ModelParams(N, Q)).values()))
    return Outcome(1, "TL algebra, N=3,4, 20 random Q", {"residual": worst}, {"residual": 1e-12}, 1.0)


def crit_2():
    err = float(np.max(np.abs(build_X(1.0) - biquadratic_X())))
    return Outcome(2, "Q=1 generator vs (S.S)^2 - 1 entrywise", {"max_abs": err}, {"max_abs": 1e-13}, 1.0)


def crit_3():
    rng = np.random.default_rng(SEED + 3)
    ybe = uni = 0.0
    for _ in range(100):
        Q = _random_Q(rng)
        u, v = _spectral(rng, 0.5), _spectral(rng, 0.5)
        for br in BRANCHES:
            p = ModelParams(2, Q, br)
            ybe = max(ybe, check_yang_baxter(u, v, p))
            uni = max(uni, check_unitarity(u, p))
    return Outcome(3, "Yang-Baxter and unitarity, 100 points, both branches",
                   {"yang_baxter": ybe, "unitarity": uni}, {"yang_baxter": 1e-10, "unitarity": 1e-12}, 5.0)


def crit_4():
    rng = np.random.default_rng(SEED + 4)
    rtt = refl = 0.0
    for N in (2, 3):
        p = ModelParams(N, 1.1)
        for _ in range(10):
            u, v = _spectral(rng), _spectral(rng)
            rtt = max(rtt, check_rtt(u, v, p))
            refl = max(refl, check_reflection_equation(u, v, p))
    return Outcome(4, "RTT and reflection equation, N=2,3, 10 pairs", {"rtt": rtt, "reflection": refl},
                   {"rtt": 1e-10, "reflection": 1e-10}, 30.0)


def crit_5():
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for N in (2, 3, 4):
        p = ModelParams(N, 1.1)
        for _ in range(20):
            tu, tv = transfer_matrix(_spectral(rng), p), transfer_matrix(_spectral(rng), p)
            worst = max(worst, rel_residual(tu @ tv, tv @ tu))
    return Outcome(5, "commuting transfer matrices, N=2,3,4, 20 pairs", {"commutator": worst},
                   {"commutator": 1e-10}, 60.0)


def crit_6():
    analytic = fd = 0.0
    for N in (2, 3, 4):
        p = ModelParams(N, 1.1)
        analytic = max(analytic, hamiltonian_from_transfer(p, "analytic"))
        fd = max(fd, rel_residual(transfer_derivative_at_one(p, "finite_difference"),
                                  transfer_derivative_at_one(p, "analytic")))
    return Outcome(6, "Hamiltonian from t'(1), N=2,3,4", {"analytic": analytic, "fd_vs_analytic": fd},
                   {"analytic": 1e-11, "fd_vs_analytic": 1e-7}, 30.0)


def crit_7():
    rng = np.random.default_rng(SEED + 7)
    worst = 0.0
    count = 0
    for N in (2, 3):
        p = ModelParams(N, 1.1)
        cache = BlockCache(p)
        for _ in range(10):
            u, v = _spectral(rng), _spectral(rng)
            for side in ("B", "C"):
                res = check_exchange_relations(u, v, p, side, cache)
                count += len(res)
                worst = max(worst, max(res.values()))
    out = Outcome(7, "ten exchange relations, N=2,3, 10 pairs", {"residual": worst}, {"residual": 1e-10}, 60.0)
    out.notes.append(f"{count} relation evaluations")
    return out


def crit_8():
    rng = np.random.default_rng(SEED + 8)
    h_id = ind = lim = 0.0
    for _ in range(50):
        Q = _random_Q(rng)
        for br in BRANCHES:
            p = ModelParams(2, Q, br)
            c = Coefficients(p)
            h_id = max(h_id, *check_H_identities(_spectral(rng), _spectral(rng), p))
            for M in range(1, 5):
                ub = list(random_rapidities(rng, M + 1, p))
                ind = max(ind, max(induction_residuals(_spectral(rng), ub, p).values()))
                big = 1e6 * np.exp(1j * rng.uniform(0, 2 * np.pi))
                lim = max(lim, abs(b2_limit_value(big, ub, p) - c.r(M)) / max(abs(c.r(M)), 1.0))
    return Outcome(8, "H identities and induction identities, M<=4, 50 configs, both branches",
                   {"H_identities": h_id, "induction": ind, "large_u_limit": lim},
                   {"H_identities": 1e-10, "induction": 1e-10, "large_u_limit": 1e-6}, 10.0)


def crit_9():
    rng = np.random.default_rng(SEED + 9)
    worst = 0.0
    for N in (2, 3):
        p = ModelParams(N, 1.1)
        cache = BlockCache(p)
        for M in (1, 2, 3):
            for which in ("A_on_B", "D_on_B", "A_on_C", "D_on_C"):
                for _ in range(3):
                    ub = random_rapidities(rng, M, p)
                    worst = max(worst, check_action_identity(_spectral(rng), ub, p, which, cache))
    out = Outcome(9, "A/D actions on B- and C-strings as operator identities, M=1..3, N=2,3",
                  {"residual": worst}, {"residual": 1e-10}, 300.0)
    out.notes.append("M=0 is not an operator identity for the D action (it would assert E(u)=0)")
    return out


def crit_10():
    rng = np.random.default_rng(SEED + 10)
    right = left = 0.0
    for N in (2, 3):
        p = ModelParams(N, 1.1)
        for M in range(4):
            for _ in range(10):
                ub = random_rapidities(rng, M, p)
                u = _spectral(rng)
                right = max(right, offshell_residual(u, ub, p, "right"))
                left = max(left, offshell_residual(u, ub, p, "left"))
    return Outcome(10, "right and left off-shell equations, M=0..3, N=2,3, 10 draws",
                   {"right": right, "left": left}, {"right": 1e-10, "left": 1e-10}, 120.0)


def _distinct(ev, tol=1e-7):
    out = []
    for e in ev:
        if not any(abs(e - d) < tol * max(abs(d), 1) for d in out):
            out.append(e)
    return out


def crit_11():
    worst_gap = 0.0
    oracle_miss = 0.0
    notes = []
    for M, N in ((1, 2), (1, 3), (2, 3), (2, 4)):
        p = ModelParams(N, 1.1)
        sols = solve_bethe(M, p, seeds=200, rng=np.random.default_rng(SEED + 11))
        spectra = [(u, transfer_matrix(u, p)) for u in PROBES]
        spectra = [(u, t, la.eigvals(t)) for u, t in spectra]
        for s in sols:
            for u, t, ev in spectra:
                worst_gap = max(worst_gap, verify_against_ed(s, u, p, spectrum=ev, tmat=t)["rel_gap"])
        if M == 1:
            oracle = [BetheSolution(RapiditySet([r]), [0.0], p) for r in m1_closed_form_roots(p)]
            found = sum(any(same_eigenvalue_function(s, o) for o in oracle) for s in sols)
            covered = sum(any(same_eigenvalue_function(s, o) for s in sols) for o in oracle)
            oracle_miss = max(oracle_miss, float(found != len(sols) or covered != len(oracle)))
        label = f"(M,N)=({M},{N}): {len(sols)} solutions"
        if (M, N) == (2, 3):
            label += " (no regular solution exists; vacuous)"
        if (M, N) == (2, 4):
            label += " (supplemental)"
        notes.append(label)
    out = Outcome(11, "Bethe eigenvalues vs exact diagonalization at 3 probes",
                  {"rel_gap": worst_gap, "oracle_mismatch": oracle_miss}, {"rel_gap": 1e-7, "oracle_mismatch": 0.5},
                  120.0)
    out.notes.extend(notes)
    return out


def crit_12():
    worst = 0.0
    count = 0
    for N in range(2, 7):
        for br in BRANCHES:
            p = ModelParams(N, 1.1, br)
            for r in m1_closed_form_roots(p):
                worst = max(worst, check_c2_annihilation(r, p))
                count += 1
    out = Outcome(12, "<0|C2(u1)| norm ratio at M=1 roots, N=2..6", {"norm_ratio": worst},
                  {"norm_ratio": 1e-8}, 300.0)
    out.notes.append(f"{count} roots, both branches")
    return out


def crit_13():
    rng = np.random.default_rng(SEED + 13)
    m1 = m2 = 0.0
    cond = 0.0
    notes = []
    for N in range(2, 7):
        p = ModelParams(N, 1.1)
        for r in m1_closed_form_roots(p):
            for _ in range(5):
                vb = random_rapidities(rng, 1, p)
                res = slavnov_formula(SlavnovInput([r], vb, p))
                m1 = max(m1, relative_error(res.value, direct_scalar_product([r], vb, p)))
                cond = max(cond, res.cauchy_condition)
    compared = 0
    for N in (2, 3, 4):
        p = ModelParams(N, 1.1)
        sols = solve_bethe(2, p, seeds=200, rng=np.random.default_rng(SEED + 130 + N))
        for s in sols:
            ratio = collapse_ratio(s.roots, p)
            if ratio < NULL_STATE_RATIO:
                notes.append(f"N={N}: on-shell set with null dual vector (ratio {ratio:.1e}) excluded")
                continue
            for _ in range(5):
                vb = random_rapidities(rng, 2, p)
                res = slavnov_formula(SlavnovInput(s.roots, vb, p))
                m2 = max(m2, relative_error(res.value, direct_scalar_product(s.roots, vb, p)))
                cond = max(cond, res.cauchy_condition)
                compared += 1
        if not sols:
            notes.append(f"N={N}: no regular M=2 solution")
    notes.append(f"M=2 comparisons: {compared}; max Cauchy condition {cond:.1e}")
    out = Outcome(13, "determinant formula vs direct products, M=1 (N<=6), M=2 (N<=4)",
                  {"m1_rel_error": m1, "m2_rel_error": m2}, {"m1_rel_error": 1e-6, "m2_rel_error": 1e-6}, 600.0)
    out.notes.extend(notes)
    return out


CRITERIA = [crit_1, crit_2, crit_3, crit_4, crit_5, crit_6, crit_7, crit_8, crit_9, crit_10, crit_11, crit_12,
            crit_13]
RESULTS: dict[int, Outcome] = {}


def evaluate(fn) -> Outcome:
    t0 = time.perf_counter()
    out = fn()
    out.seconds = time.perf_counter() - t0
    RESULTS[out.cid] = out
    return out


@pytest.mark.parametrize("fn", CRITERIA, ids=[f"criterion_{i + 1:02d}" for i in range(len(CRITERIA))])
def test_criterion(fn):
    out = evaluate(fn)
    print(out.line())
    assert out.passed, out.line()


if __name__ == "__main__":
    for fn in CRITERIA:
        print(evaluate(fn).line(), flush=True)
