"""Command-line entry point: identity checks, Bethe solver, ED and scalar products.

Output is deterministic for a fixed configuration: all randomness flows from
``--rng-seed`` through one numpy Generator per check, checks are emitted in
name order, and complex numbers are serialized as [re, im].
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
import scipy.linalg as la

from . import bethe, coefficients, lax, model, monodromy, scalar_product
from .bethe import ED_DIM_CAP, PROBES, VECTOR_N_CAP, random_rapidities
from .model import Branch, ModelParams, SingularParameterError

SCHEMA = "tl-bethe/1"
COMMANDS = ("check", "solve", "diagonalize", "slavnov", "report")
# ED agreement of Bethe eigenvalues, relative
ED_TOL = 1e-7
# Cauchy kernels above this condition number are reported, not failed
ILL_CONDITIONED = 1e10
SLAVNOV_TOL = 1e-6
LIMIT_TOL = 1e-6
C2_TOL = 1e-8

log = logging.getLogger("tlbethe")


class UsageError(Exception):
    """Invalid configuration; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    N: int = 3
    Q: complex = 1.1
    branch: str = "plus"
    M: int = 1
    seeds: int = 200
    rng_seed: int = 0
    tol_identity: float = 1e-9
    tol_derivative: float = 1e-5
    samples: int = 20
    output_format: str = "json"
    output_path: str | None = None
    ed: bool = True

    def params(self) -> ModelParams:
        return ModelParams(self.N, self.Q, Branch(self.branch), self.tol_identity, self.tol_derivative, self.rng_seed)


# -- serialization ---------------------------------------------------------

def to_jsonable(x):
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [to_jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def parse_complex(text: str) -> complex:
    """'re' or 're,im'."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're' or 're,im', got {text!r}")


# -- the identity suite ----------------------------------------------------

@dataclass
class CheckResult:
    name: str
    paper_ref: str
    residual: float
    tolerance: float
    passed: bool
    samples: int
    seconds: float

    def as_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _seeded(cfg: RunConfig, name: str) -> np.random.Generator:
    # stable per-check stream: same config and check name give the same draws
    key = [cfg.rng_seed] + [ord(ch) for ch in name]
    return np.random.default_rng(key)


def _spectral(rng, spread=0.3) -> complex:
    return complex(np.exp(rng.uniform(-spread, spread) + 1j * rng.uniform(0, 2 * np.pi)))


def _check_specs(cfg: RunConfig):
    """(name, reference, tolerance, sample count, worker(params, rng) -> residual)."""
    p = cfg.params()
    tol, tol_d = cfg.tol_identity, cfg.tol_derivative
    S = cfg.samples
    # dense operator identities are restricted to small chains
    p_small = p.with_(N=min(p.N, 3))
    p_tl = p.with_(N=max(p.N, 3))
    few = max(1, min(S, 3))

    def tl(params, rng):
        return max(model.check_tl_relations(p_tl).values())

    def biquadratic(params, rng):
        return float(np.max(np.abs(model.build_X(1.0) - model.biquadratic_X())))

    def ybe(params, rng):
        return lax.check_yang_baxter(_spectral(rng), _spectral(rng), params)

    def unitarity(params, rng):
        return lax.check_unitarity(_spectral(rng), params)

    def rtt(params, rng):
        return monodromy.check_rtt(_spectral(rng), _spectral(rng), p_small)

    def reflection(params, rng):
        return monodromy.check_reflection_equation(_spectral(rng), _spectral(rng), p_small)

    def commute(params, rng):
        u, v = _spectral(rng), _spectral(rng)
        tu, tv = monodromy.transfer_matrix(u, p_small), monodromy.transfer_matrix(v, p_small)
        return model.rel_residual(tu @ tv, tv @ tu)

    def trace_vs_blocks(params, rng):
        u = _spectral(rng)
        return model.rel_residual(monodromy.transfer_matrix(u, p_small, "trace"),
                                  monodromy.transfer_matrix(u, p_small, "blocks"))

    def ham(params, rng):
        return monodromy.hamiltonian_from_transfer(p_small.with_(N=max(p_small.N, 2)), "analytic")

    def ham_fd(params, rng):
        return monodromy.hamiltonian_from_transfer(p_small.with_(N=max(p_small.N, 2)), "finite_difference")

    def reference(params, rng):
        return max(monodromy.reference_state_report(_spectral(rng), p_small).values())

    def exchange(side):
        def run(params, rng):
            r = monodromy.check_exchange_relations(_spectral(rng), _spectral(rng), p_small, side)
            return max(r.values())
        return run

    def cb(params, rng):
        return monodromy.check_cb_commutation(_spectral(rng), _spectral(rng), p_small)

    def h_ident(params, rng):
        return max(coefficients.check_H_identities(_spectral(rng), _spectral(rng), params))

    def induction(params, rng):
        worst = 0.0
        for M in range(1, 5):
            ub = list(random_rapidities(rng, M + 1, params))
            worst = max(worst, max(coefficients.induction_residuals(_spectral(rng), ub, params).values()))
        return worst

    def induction_limit(params, rng):
        worst = 0.0
        c = coefficients.Coefficients(params)
        for M in range(1, 5):
            ub = list(random_rapidities(rng, M + 1, params))
            big = 1e5 * np.exp(1j * rng.uniform(0, 2 * np.pi))
            val = coefficients.b2_limit_value(big, ub, params)
            worst = max(worst, abs(val - c.r(M)) / max(abs(c.r(M)), 1.0))
        return worst

    def action(which):
        def run(params, rng):
            worst = 0.0
            for M in range(1, 4):
                ub = random_rapidities(rng, M, p_small)
                worst = max(worst, bethe.check_action_identity(_spectral(rng), ub, p_small, which))
            return worst
        return run

    def offshell(side):
        def run(params, rng):
            worst = 0.0
            for M in range(0, 4):
                ub = random_rapidities(rng, M, p_small)
                worst = max(worst, bethe.offshell_residual(_spectral(rng), ub, p_small, side))
            return worst
        return run

    def m1_expansion(params, rng):
        return scalar_product.check_m1_expansion(_spectral(rng), _spectral(rng), p_small)

    def c2(params, rng):
        pc = p.with_(N=min(p.N, VECTOR_N_CAP))
        return max(scalar_product.check_c2_annihilation(r, pc) for r in bethe.m1_closed_form_roots(pc))

    def jac(params, rng):
        ub = list(random_rapidities(rng, 2, params))
        return scalar_product.check_jacobian_fd(_spectral(rng), ub, params)

    return [
        ("tl_relations", "TL algebra relations of the spin-1 generator", tol, 1, tl),
        ("biquadratic_limit", "Q=1 generator equals (S.S)^2 - 1", tol, 1, biquadratic),
        ("yang_baxter", "Yang-Baxter equation of the Baxterized R-matrix", tol, S, ybe),
        ("unitarity", "unitarity R12(u) R21(1/u) = zeta(u)", tol, S, unitarity),
        ("rtt", "RTT relation of the single-row monodromy", tol, few, rtt),
        ("reflection_equation", "reflection equation of the double-row monodromy", tol, few, reflection),
        ("commutativity", "commuting transfer matrices", tol, few, commute),
        ("transfer_trace_vs_blocks", "transfer matrix from the trace and from the blocks", tol, few, trace_vs_blocks),
        ("hamiltonian_analytic", "Hamiltonian from t'(1), analytic derivative", tol, 1, ham),
        ("hamiltonian_finite_difference", "Hamiltonian from t'(1), finite differences", tol_d, 1, ham_fd),
        ("reference_state", "reference-state action of T, T^ and the blocks", tol, few, reference),
        ("exchange_B", "exchange relations of A, D, E with B, B and B1", tol, few, exchange("B")),
        ("exchange_C", "exchange relations of C with A, D, C, C1 and E", tol, few, exchange("C")),
        ("cb_commutation", "C-B commutation relation", tol, few, cb),
        ("H_identities", "f/h combinations producing H(u, v)", tol, S, h_ident),
        ("induction_identities", "induction-step scalar identities, A and D actions, M=1..4", tol, S, induction),
        ("induction_large_u_limit", "large-|u| limit of the B2 coefficient equals r_M", LIMIT_TOL, S, induction_limit),
        ("action_A_on_B", "A action on the B-string, M=1..3", tol, few, action("A_on_B")),
        ("action_D_on_B", "D action on the B-string, M=1..3", tol, few, action("D_on_B")),
        ("action_A_on_C", "A action on the C-string, M=1..3", tol, few, action("A_on_C")),
        ("action_D_on_C", "D action on the C-string, M=1..3", tol, few, action("D_on_C")),
        ("offshell_right", "right off-shell equation, M=0..3", tol, few, offshell("right")),
        ("offshell_left", "left off-shell equation, M=0..3", tol, few, offshell("left")),
        ("m1_expansion", "M=1 scalar product from the C-B commutation relation", tol, few, m1_expansion),
        ("c2_annihilation", "<0|C2(u1) = 0 at M=1 Bethe roots", C2_TOL, 1, c2),
        ("eigenvalue_jacobian_fd", "analytic d Lambda / d u_i against central differences", 1e-7, S, jac),
    ]


def run_checks(cfg: RunConfig) -> list[CheckResult]:
    p = cfg.params()
    results = []
    for name, ref, tol, n, fn in _check_specs(cfg):
        rng = _seeded(cfg, name)
        t0 = time.perf_counter()
        try:
            residual = max(fn(p, rng) for _ in range(n))
        except (SingularParameterError, ValueError, ZeroDivisionError) as exc:
            log.warning("check %s raised %s", name, exc)
            residual = float("inf")
        dt = time.perf_counter() - t0
        results.append(CheckResult(name, ref, float(residual), tol, bool(residual < tol), n, dt))
    return sorted(results, key=lambda r: r.name)


# -- commands --------------------------------------------------------------

def _header(cfg: RunConfig) -> dict:
    d = {k: v for k, v in asdict(cfg).items() if k not in ("output_path", "output_format")}
    d["q"] = cfg.params().q
    return {"schema": SCHEMA, "command": cfg.command, "config": d}


def cmd_check(cfg: RunConfig) -> tuple[int, dict]:
    results = run_checks(cfg)
    ok = all(r.passed for r in results)
    out = _header(cfg)
    # timings vary between runs; keep them out of the deterministic payload
    out["checks"] = [{k: v for k, v in r.as_dict().items() if k != "seconds"} for r in results]
    out["pass"] = ok
    return (0 if ok else 1), out


def _ed_spectra(params: ModelParams):
    spectra = []
    for u in PROBES:
        method = "matrix_free" if params.N > VECTOR_N_CAP else "trace"
        t = monodromy.transfer_matrix(u, params, method)
        spectra.append((t, la.eigvals(t)))
    return spectra


def _match_closed_form(sol: bethe.BetheSolution, params: ModelParams) -> bool:
    roots = bethe.m1_closed_form_roots(params)
    r = sol.roots[0]
    # u and -u give the same eigenvalue function
    return any(min(abs(r - x), abs(r + x)) < 1e-8 * max(abs(x), 1.0) for x in roots)


def cmd_solve(cfg: RunConfig) -> tuple[int, dict]:
    if cfg.M < 1:
        raise UsageError("solve needs --M >= 1")
    p = cfg.params()
    if cfg.M > p.N:
        raise UsageError("solver exposed for M <= N only")
    sols = bethe.solve_bethe(cfg.M, p, cfg.seeds, np.random.default_rng(cfg.rng_seed))
    out = _header(cfg)
    do_ed = cfg.ed and p.dim <= ED_DIM_CAP
    spectra = _ed_spectra(p) if (do_ed and sols) else None
    rows = []
    ed_ok = True
    for s in sols:
        row = {"roots": list(s.roots), "residuals": s.residuals, "seed_index": s.seed_index,
               "eigenvalue_at_probes": [s.eigenvalue_fn(u) for u in PROBES]}
        if cfg.M == 1:
            row["closed_form_match"] = _match_closed_form(s, p)
        if not cfg.ed:
            row["ed_gap"] = "skipped: not requested"
        elif not do_ed:
            row["ed_gap"] = "skipped: dimension cap"
        else:
            reports = [bethe.verify_against_ed(s, u, p, spectrum=ev, tmat=t) for u, (t, ev) in zip(PROBES, spectra)]
            gap = max(r["rel_gap"] for r in reports)
            row["ed_gap"] = gap
            if "vector_norm" in reports[0]:
                row["vector_norm"] = reports[0]["vector_norm"]
                row["collapse_ratio"] = bethe.collapse_ratio(s.roots, p, "right")
                row["eigvec_residual"] = max(r["eigvec_residual"] for r in reports)
            ed_ok &= gap < ED_TOL
        rows.append(row)
    out["solutions"] = rows
    out["count"] = len(rows)
    out["pass"] = bool(sols) and ed_ok
    if not sols:
        log.error("no regular solution converged for M=%d N=%d", cfg.M, p.N)
    return (0 if out["pass"] else 1), out


def cmd_diagonalize(cfg: RunConfig) -> tuple[int, dict]:
    p = cfg.params()
    if p.dim > ED_DIM_CAP:
        raise UsageError(f"dimension {p.dim} exceeds the ED cap {ED_DIM_CAP}")
    out = _header(cfg)
    probes = []
    for u, (t, ev) in zip(PROBES, _ed_spectra(p)):
        ev = ev[np.lexsort((ev.imag.round(10), ev.real.round(10)))]
        distinct = []
        for e in ev:
            if not any(abs(e - d) <= 1e-8 * max(abs(d), 1.0) for d in distinct):
                distinct.append(e)
        probes.append({"u": u, "eigenvalues": ev, "distinct": len(distinct)})
    out["transfer_spectra"] = probes
    if p.N >= 2:
        H = model.build_hamiltonian(p)
        H = H.toarray() if hasattr(H, "toarray") else H
        out["hamiltonian_spectrum"] = np.sort_complex(la.eigvals(H).round(12))
    out["pass"] = True
    return 0, out


def _slavnov_rows(p: ModelParams, M: int, ubars, n_v: int, rng) -> tuple[list, bool]:
    rows, ok = [], True
    for ub in ubars:
        ratio = bethe.collapse_ratio(ub, p)
        if ratio < bethe.NULL_STATE_RATIO:
            # both sides vanish to rounding; a relative error carries no information
            rows.append({"ubar": list(ub), "status": "skipped: null dual vector", "collapse_ratio": ratio})
            continue
        for _ in range(n_v):
            vb = random_rapidities(rng, M, p)
            res = scalar_product.slavnov_formula(scalar_product.SlavnovInput(ub, vb, p))
            direct = scalar_product.direct_scalar_product(ub, vb, p)
            err = scalar_product.relative_error(res.value, direct)
            passed = err < SLAVNOV_TOL or res.cauchy_condition >= ILL_CONDITIONED
            ok &= passed
            rows.append({"ubar": list(ub), "vbar": list(vb), "slavnov_value": res.value, "direct_value": direct,
                         "relative_error": err, "cauchy_condition": res.cauchy_condition, "pass": passed})
    return rows, ok


def cmd_slavnov(cfg: RunConfig, ubar: list[complex] | None = None) -> tuple[int, dict]:
    if cfg.M not in (1, 2):
        raise UsageError("slavnov needs --M 1 or 2")
    p = cfg.params()
    if p.N > VECTOR_N_CAP:
        raise UsageError(f"slavnov needs N <= {VECTOR_N_CAP}")
    if ubar is not None:
        if len(ubar) != cfg.M:
            raise UsageError("--ubar length must equal --M")
        res = bethe.normalized_bethe_residuals(ubar, p)
        if max(res) >= scalar_product.ON_SHELL_TOL:
            raise UsageError(f"ubar is off-shell (normalized Bethe residual {max(res):.3e}); "
                             "the determinant formula needs an on-shell dual vector")
        ubars = [bethe.RapiditySet(ubar)]
    elif cfg.M == 1:
        ubars = [bethe.RapiditySet([r]) for r in bethe.m1_closed_form_roots(p)]
    else:
        ubars = [s.roots for s in bethe.solve_bethe(cfg.M, p, cfg.seeds, np.random.default_rng(cfg.rng_seed))]
    out = _header(cfg)
    rows, ok = _slavnov_rows(p, cfg.M, ubars, 5, _seeded(cfg, "slavnov"))
    out["table"] = rows
    out["on_shell_sets"] = len(ubars)
    out["pass"] = ok and any("status" not in r for r in rows)
    if not rows:
        log.error("no on-shell set available for M=%d N=%d", cfg.M, p.N)
    return (0 if out["pass"] else 1), out


def cmd_report(cfg: RunConfig) -> tuple[int, dict]:
    """Check suite plus the M=1 solve and the M=1 scalar products."""
    code_c, check = cmd_check(cfg)
    sub = RunConfig(**{**asdict(cfg), "M": 1})
    code_s, solve = cmd_solve(sub)
    code_p, slav = cmd_slavnov(sub) if cfg.N <= VECTOR_N_CAP else (0, {"table": [], "pass": True})
    out = _header(cfg)
    out["checks"] = check["checks"]
    out["solutions_m1"] = solve["solutions"]
    out["slavnov_m1"] = slav["table"]
    out["pass"] = check["pass"] and solve["pass"] and slav["pass"]
    return (0 if out["pass"] else 1), out


HANDLERS: dict[str, Callable] = {"check": cmd_check, "solve": cmd_solve, "diagonalize": cmd_diagonalize,
                                 "slavnov": cmd_slavnov, "report": cmd_report}


# -- formatting and entry point -------------------------------------------

def render_table(out: dict) -> str:
    lines = [f"# {out['schema']} {out['command']}  N={out['config']['N']}  Q={out['config']['Q']}"]
    for c in out.get("checks", []):
        lines.append(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']:<30} {c['residual']:.3e}  (tol {c['tolerance']:.0e})")
    for key in ("solutions", "solutions_m1"):
        for s in out.get(key, []):
            roots = ", ".join(f"{complex(r):.6f}" for r in s["roots"])
            gap = s["ed_gap"] if isinstance(s["ed_gap"], str) else f"{s['ed_gap']:.2e}"
            lines.append(f"roots [{roots}]  max residual {max(s['residuals']):.2e}  ed gap {gap}")
    for key in ("table", "slavnov_m1"):
        for r in out.get(key, []):
            if "status" in r:
                lines.append(f"SKIP  {r['status']} (collapse ratio {r['collapse_ratio']:.1e})")
                continue
            lines.append(f"{'PASS' if r['pass'] else 'FAIL'}  slavnov {complex(r['slavnov_value']):.6e}  "
                         f"direct {complex(r['direct_value']):.6e}  rel {r['relative_error']:.2e}  "
                         f"cond {r['cauchy_condition']:.2e}")
    for s in out.get("transfer_spectra", []):
        lines.append(f"t({complex(s['u']):.3f}): {len(s['eigenvalues'])} eigenvalues, {s['distinct']} distinct")
    lines.append(f"overall: {'PASS' if out['pass'] else 'FAIL'}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tlbethe", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--N", type=int, default=3, help="number of sites")
    ap.add_argument("--Q", type=parse_complex, default=complex(1.1), help="deformation, 're' or 're,im'")
    ap.add_argument("--branch", choices=[b.value for b in Branch], default="plus")
    ap.add_argument("--M", type=int, default=1, help="number of rapidities")
    ap.add_argument("--seeds", type=int, default=200, help="Newton starting points")
    ap.add_argument("--rng-seed", type=int, default=0)
    ap.add_argument("--tol-identity", type=float, default=1e-9)
    ap.add_argument("--tol-derivative", type=float, default=1e-5)
    ap.add_argument("--samples", type=int, default=20, help="random draws per cheap check")
    ap.add_argument("--no-ed", action="store_true", help="skip exact diagonalization in solve")
    ap.add_argument("--ubar", type=parse_complex, nargs="+", help="explicit on-shell roots for slavnov")
    ap.add_argument("--format", choices=("json", "table"), default="json")
    ap.add_argument("--out", default=None, help="write output here instead of stdout")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = RunConfig(args.command, args.N, args.Q, args.branch, args.M, args.seeds, args.rng_seed,
                    args.tol_identity, args.tol_derivative, args.samples, args.format, args.out, not args.no_ed)
    try:
        cfg.params()
        if cfg.samples < 1 or cfg.seeds < 1:
            raise UsageError("--samples and --seeds must be positive")
        if args.ubar is not None and cfg.command != "slavnov":
            raise UsageError("--ubar only applies to slavnov")
        if cfg.command == "slavnov":
            code, out = cmd_slavnov(cfg, args.ubar)
        else:
            code, out = HANDLERS[cfg.command](cfg)
    except (UsageError, ValueError) as exc:
        print(f"tlbethe: error: {exc}", file=sys.stderr)
        return 2
    text = render_table(out) if cfg.output_format == "table" else json.dumps(to_jsonable(out), indent=2)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
