"""Bethe vectors, off-shell equations, the Bethe-equation solver and ED cross-checks.

Rapidity lists are 0-based Python sequences; ``ubar[i]`` is u_{i+1}.  Vectors
are built through :class:`DoubleRowAction` (matrix-vector products only), while
the full operator identities for the A/D actions on B- and C-strings use dense
block matrices from :class:`BlockCache` and are meant for N <= 3.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Literal, Sequence

import numpy as np
import scipy.linalg as la

from .coefficients import Coefficients, _prod
from .model import ModelParams, SingularParameterError, omega
from .monodromy import BlockCache, DoubleRowAction, reference_state, transfer_matrix

log = logging.getLogger(__name__)

# rapidities closer than this to a singular locus are rejected
GUARD = 1e-6
# fixed spectral parameters used to fingerprint eigenvalue functions
PROBES = (1.13 + 0.21j, 0.87 - 0.34j, 0.62 + 0.95j)
# largest dense eigensolve for ED cross-checks (N <= 7)
ED_DIM_CAP = 3**7
# dense T and T^ at N = 7 take ~1.4 GB; vectors are built only up to N = 6
VECTOR_N_CAP = 6
# a Bethe vector below this fraction of its one-magnon scale counts as null
NULL_STATE_RATIO = 1e-12


@dataclass(frozen=True)
class RapiditySet:
    """Ordered rapidities u_1..u_M."""

    values: tuple[complex, ...]

    def __init__(self, values: Sequence[complex]):
        object.__setattr__(self, "values", tuple(complex(v) for v in values))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def M(self) -> int:
        return len(self.values)

    def drop(self, i: int) -> "RapiditySet":
        """The set with entry i (0-based) removed."""
        return RapiditySet(self.values[:i] + self.values[i + 1:])

    def check(self, params: ModelParams, guard: float = GUARD) -> "RapiditySet":
        """Raise SingularParameterError if any value sits on a pole locus."""
        q = params.q
        for i, u in enumerate(self.values):
            if abs(u) < guard:
                raise SingularParameterError(f"u_{i + 1} = 0")
            if abs(omega(u)) < guard:
                raise SingularParameterError(f"u_{i + 1} = +-1")
            if abs(omega(q * u * u)) < guard:
                raise SingularParameterError(f"omega(q u_{i + 1}^2) vanishes")
            for j in range(i + 1, len(self.values)):
                v = self.values[j]
                for label, val in (("omega(u_i/u_j)", omega(u / v)), ("omega(q u_i u_j)", omega(q * u * v)),
                                   ("omega(u_i u_j)", omega(u * v))):
                    if abs(val) < guard:
                        raise SingularParameterError(f"{label} vanishes for i={i + 1}, j={j + 1}")
        return self


def random_rapidities(rng: np.random.Generator, M: int, params: ModelParams,
                      spread: float = 0.3, guard: float = GUARD) -> RapiditySet:
    """M regular rapidities with log-modulus uniform in [-spread, spread] and uniform phase."""
    while True:
        vals = np.exp(rng.uniform(-spread, spread, M) + 1j * rng.uniform(0, 2 * np.pi, M))
        try:
            return RapiditySet(vals).check(params, guard)
        except SingularParameterError:
            continue


def _as_list(ubar) -> list[complex]:
    return [complex(x) for x in ubar]


# -- vectors ---------------------------------------------------------------

class _ActionCache:
    def __init__(self, params: ModelParams):
        if params.N > VECTOR_N_CAP:
            raise ValueError(f"vector construction capped at N={VECTOR_N_CAP}")
        self.params = params
        self._store: dict[complex, DoubleRowAction] = {}

    def __call__(self, u) -> DoubleRowAction:
        u = complex(u)
        if u not in self._store:
            self._store[u] = DoubleRowAction(u, self.params)
        return self._store[u]


def _apply_string_right(ops: list[tuple[str, complex]], params, acts) -> np.ndarray:
    """Apply op_1(x_1) ... op_k(x_k) to |0>."""
    v = reference_state(params)
    for name, x in reversed(ops):
        v = acts(x).right(name, v)
    return v


def _apply_string_left(ops: list[tuple[str, complex]], params, acts) -> np.ndarray:
    """<0| op_1(x_1) ... op_k(x_k) as a row vector."""
    w = reference_state(params)
    for name, x in ops:
        w = acts(x).left(name, w)
    return w


def bethe_vector(ubar, params: ModelParams, acts=None) -> np.ndarray:
    """B(u_1) ... B(u_M) |0>."""
    acts = acts or _ActionCache(params)
    return _apply_string_right([("B", x) for x in _as_list(ubar)], params, acts)


def dual_bethe_vector(ubar, params: ModelParams, acts=None) -> np.ndarray:
    """<0| C(u_M) ... C(u_1) as a row vector (bilinear pairing, no conjugation)."""
    acts = acts or _ActionCache(params)
    return _apply_string_left([("C", x) for x in reversed(_as_list(ubar))], params, acts)


def collapse_ratio(ubar, params: ModelParams, side: Literal["right", "left"] = "left", acts=None) -> float:
    """Norm of the (dual) Bethe vector over the product of its one-magnon norms.

    Regular states give O(1e-3) or more; values under NULL_STATE_RATIO mean the
    string B(u_1)...B(u_M) annihilates |0> up to rounding.
    """
    acts = acts or _ActionCache(params)
    build = dual_bethe_vector if side == "left" else bethe_vector
    ubar = _as_list(ubar)
    scale = float(np.prod([np.linalg.norm(build([x], params, acts)) for x in ubar]))
    return float(np.linalg.norm(build(ubar, params, acts)) / scale)


def _swap_in(u, ubar, i):
    """{u, ubar_i}: u followed by ubar without entry i."""
    return [u] + [x for j, x in enumerate(ubar) if j != i]


def eigenvalue(u: complex, ubar, params: ModelParams) -> complex:
    return Coefficients(params).eigenvalue(u, _as_list(ubar))


def bethe_residual(i: int, ubar, params: ModelParams) -> complex:
    """E({u_i, ubar_i}) for 0-based i."""
    return Coefficients(params).bethe_residual(i, _as_list(ubar))


def normalized_bethe_residuals(ubar, params: ModelParams) -> list[float]:
    c = Coefficients(params)
    ubar = _as_list(ubar)
    out = []
    for i in range(len(ubar)):
        tf, th = c.bethe_terms(i, ubar)
        out.append(abs(tf - th) / max(abs(tf), abs(th), 1e-300))
    return out


def offshell_residual(u: complex, ubar, params: ModelParams,
                      side: Literal["right", "left"] = "right", acts=None) -> float:
    """Relative defect of t(u)|ubar> = Lambda |ubar> + sum_i H(u,u_i) E_i |{u, ubar_i}> (or its dual)."""
    acts = acts or _ActionCache(params)
    c = Coefficients(params)
    ubar = _as_list(ubar)
    Q2 = params.Q**2
    weights = (1 / Q2, 1.0, Q2)
    act = acts(u)
    lam = c.eigenvalue(u, ubar)
    if side == "right":
        vec = bethe_vector(ubar, params, acts)
        tv = sum(w * act._raw_right(a, a, vec) for a, w in enumerate(weights))
        rhs = lam * vec
        for i in range(len(ubar)):
            rhs = rhs + c.H(u, ubar[i]) * c.bethe_residual(i, ubar) * bethe_vector(_swap_in(u, ubar, i), params, acts)
    elif side == "left":
        vec = dual_bethe_vector(ubar, params, acts)
        tv = sum(w * act._raw_left(a, a, vec) for a, w in enumerate(weights))
        rhs = lam * vec
        for i in range(len(ubar)):
            rest = [x for j, x in enumerate(ubar) if j != i]
            # <{u, ubar_i}| = <0| prod_{j=M, j!=i}^{1} C(u_j) C(u)
            ops = [("C", x) for x in reversed(rest)] + [("C", u)]
            dual = _apply_string_left(ops, params, acts)
            rhs = rhs + c.H(u, ubar[i]) * c.bethe_residual(i, ubar) * dual
    else:
        raise ValueError(f"unknown side {side!r}")
    return float(np.linalg.norm(tv - rhs) / max(np.linalg.norm(tv), 1e-300))


# -- full operator identities for the A / D actions -------------------------

def _mat_prod(mats, dim):
    return reduce(np.matmul, mats, np.eye(dim, dtype=complex))


class _Strings:
    """Operator strings built from cached double-row blocks."""

    def __init__(self, u, ubar, params, cache: BlockCache, side: str):
        self.u = complex(u)
        self.ubar = _as_list(ubar)
        self.M = len(self.ubar)
        self.blk = cache
        self.dim = params.dim
        self.side = side
        # 1-based rapidities with u_0 = u
        self.us = [self.u] + self.ubar

    def op(self, name, x):
        return self.blk(x)[name]

    def _ordered(self, factors):
        """B side keeps the index order; C side reverses it."""
        return _mat_prod(factors if self.side == "B" else list(reversed(factors)), self.dim)

    def creation(self):
        return "B" if self.side == "B" else "C"

    def string(self):
        """B^M or C^M."""
        X = self.creation()
        return self._ordered([self.op(X, x) for x in self.ubar])

    def string_i(self, i):
        """B_i^M = B(u) prod_{j != i} B(u_j);  C_i^M = prod_{j=M, j!=i}^1 C(u_j) C(u).  1-based i."""
        X = self.creation()
        return self._ordered([self.op(X, self.u)] + [self.op(X, self.us[j]) for j in range(1, self.M + 1) if j != i])

    def bar(self, i):
        """B-bar_i / C-bar_i for i = 0..M-1."""
        X = self.creation()
        if self.side == "B":
            seq = ([self.op("B", self.us[j]) for j in range(0, i)] + [self.op("B1", self.us[i]), self.op("B2", self.us[i + 1])]
                   + [self.op("B", self.us[j]) for j in range(i + 2, self.M + 1)])
            return _mat_prod(seq, self.dim)
        seq = ([self.op(X, self.us[j]) for j in range(self.M, i + 1, -1)] + [self.op("C2", self.us[i + 1]), self.op("C1", self.us[i])]
               + [self.op(X, self.us[j]) for j in range(i - 1, -1, -1)])
        return _mat_prod(seq, self.dim)

    def tilde(self, i):
        """B-tilde_i / C-tilde_i for i = 1..M."""
        if self.side == "B":
            seq = ([self.op("B", self.us[j]) for j in range(0, i)] + [self.op("E", self.us[i])]
                   + [self.op("B", self.us[j]) for j in range(i + 1, self.M + 1)])
            return _mat_prod(seq, self.dim)
        seq = ([self.op("C", self.us[j]) for j in range(self.M, i, -1)] + [self.op("E", self.us[i])]
               + [self.op("C", self.us[j]) for j in range(i - 1, -1, -1)])
        return _mat_prod(seq, self.dim)

    def with_diag(self, S, name, x):
        """S op(x) on the B side, op(x) S on the C side."""
        D = self.op(name, x)
        return S @ D if self.side == "B" else D @ S


def action_identity_terms(u, ubar, params: ModelParams, which: Literal["A", "D"], side: Literal["B", "C"],
                          cache: BlockCache | None = None):
    """Both sides of the A- or D-action identity on the B-string (or C-string).

    Returns ``(lhs, terms)`` with lhs = sum(terms) expected.
    """
    cache = cache or BlockCache(params)
    c = Coefficients(params)
    s = _Strings(u, ubar, params, cache, side)
    u, M, us = s.u, s.M, s.us
    Q2 = params.Q**2
    aQ = c.a(u) / Q2
    S = s.string()
    Xu = s.op(which, u)
    lhs = Xu @ S if side == "B" else S @ Xu
    terms = []
    if which == "A":
        terms.append(_prod(c.f(u, x) for x in s.ubar) * s.with_diag(S, "A", u))
    else:
        terms.append(_prod(c.h(u, x) for x in s.ubar) * s.with_diag(S, "D", u))
    for i in range(1, M + 1):
        ui = us[i]
        Si = s.string_i(i)
        others = [us[j] for j in range(1, M + 1) if j != i]
        pf = _prod(c.f(ui, x) for x in others)
        ph = _prod(c.h(ui, x) for x in others)
        kA, kD = (c.f1(u, ui), c.f2(u, ui)) if which == "A" else (c.h2(u, ui), c.h1(u, ui))
        terms.append(kA * pf * s.with_diag(Si, "A", ui))
        terms.append(kD * ph * s.with_diag(Si, "D", ui))
    zfac = 1.0 if which == "A" else -aQ
    for i in range(2, M + 1):
        ui = us[i]
        Si = s.string_i(i)
        SA, SD = s.with_diag(Si, "A", ui), s.with_diag(Si, "D", ui)
        for k in range(2, i + 1):
            rest = [us[j] for j in range(k, M + 1) if j != i]
            pf = _prod(c.f(ui, x) for x in rest)
            ph = _prod(c.h(ui, x) for x in rest)
            coeff = zfac * c.qq * c.r(k - 2)
            terms.append(coeff * (-c.d(ui) / Q2) * pf * SA)
            terms.append(coeff * ph * SD)
    for i in range(0, M):
        terms.append(zfac * c.r(i) * s.bar(i))
    for i in range(1, M):
        terms.append(zfac * c.s(i) * s.tilde(i))
    if M >= 1:
        last = c.alpha_M(u, s.ubar) if which == "A" else c.delta_M(u, s.ubar)
        terms.append(last * s.tilde(M))
    if which == "D":
        E = s.op("E", u)
        terms.append(-(E @ S if side == "B" else S @ E) / Q2)
    return lhs, terms


ACTION_VARIANTS = {"A_on_B": ("A", "B"), "D_on_B": ("D", "B"), "A_on_C": ("A", "C"), "D_on_C": ("D", "C")}


def check_action_identity(u, ubar, params: ModelParams, which: str = "A_on_B",
                          cache: BlockCache | None = None) -> float:
    """Residual of the full A/D-action operator identity on B- or C-strings.

    ``which`` is one of A_on_B, D_on_B (B-strings) and A_on_C, D_on_C (C-strings).
    The identity starts at M = 1: for an empty string the D variant would claim
    E(u) = 0 as an operator, which only holds on the reference state.
    """
    if len(ubar) < 1:
        raise ValueError("action identities are operator statements for M >= 1")
    op, side = ACTION_VARIANTS[which]
    lhs, terms = action_identity_terms(u, ubar, params, op, side, cache)
    rhs = sum(terms[1:], terms[0])
    scale = max([np.linalg.norm(lhs), 1.0] + [np.linalg.norm(t) for t in terms])
    return float(np.linalg.norm(lhs - rhs) / scale)


# -- solver ------------------------------------------------------------------

@dataclass
class BetheSolution:
    roots: RapiditySet
    residuals: list[float]
    params: ModelParams = field(repr=False)
    iterations: int = 0
    seed_index: int = -1
    ed_match: dict | None = None

    @property
    def eigenvalue_fn(self) -> Callable[[complex], complex]:
        c = Coefficients(self.params)
        roots = list(self.roots)
        return lambda u: c.eigenvalue(u, roots)

    def fingerprint(self) -> list[complex]:
        f = self.eigenvalue_fn
        return [f(p) for p in PROBES]


def m1_closed_form_roots(params: ModelParams, guard: float = GUARD) -> list[complex]:
    """All regular roots of omega(q u)^{2N} = omega(u)^{2N}, one per +-u pair.

    omega(q u) = z omega(u) with z^{2N} = 1 gives u^2 = (1/q - z) / (q - z).
    """
    q, N = params.q, params.N
    roots = []
    for k in range(2 * N):
        z = np.exp(1j * np.pi * k / N)
        u = complex(np.sqrt((1 / q - z) / (q - z)))
        try:
            RapiditySet([u]).check(params, guard)
        except SingularParameterError:
            continue
        roots.append(u)
    return roots


def _ratio_system(x, c: Coefficients):
    """Bethe ratios g_i = Lambda1 prod f / (Lambda2 prod h) - 1 and their analytic Jacobian."""
    xs = list(x)
    M = len(xs)
    g = np.empty(M, dtype=complex)
    J = np.empty((M, M), dtype=complex)
    for i in range(M):
        tf, th = c.bethe_terms(i, xs)
        ratio = tf / th
        g[i] = ratio - 1
        ui = xs[i]
        for k in range(M):
            if k == i:
                dl = c.dlog_Lambda1(ui) - c.dlog_Lambda2(ui) + sum(
                    c.dlog_f(ui, xs[j], 0) - c.dlog_h(ui, xs[j], 0) for j in range(M) if j != i)
            else:
                dl = c.dlog_f(ui, xs[k], 1) - c.dlog_h(ui, xs[k], 1)
            J[i, k] = ratio * dl
    return g, J


def _newton(ubar0, c: Coefficients, tol: float = 1e-13, max_iter: int = 200):
    """Damped Newton on the ratio form; returns (roots, ||g||, iterations)."""
    x = np.array(ubar0, dtype=complex)
    g, J = _ratio_system(x, c)
    norm = np.linalg.norm(g)
    for it in range(max_iter):
        if norm < tol:
            return x, norm, it
        try:
            step = np.linalg.solve(J, g)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        for _ in range(40):
            trial = x - lam * step
            try:
                gt, Jt = _ratio_system(trial, c)
                nt = np.linalg.norm(gt)
            except (SingularParameterError, ZeroDivisionError):
                nt = np.inf
            if np.isfinite(nt) and nt < norm:
                break
            lam /= 2
        else:
            break
        x, g, J, norm = trial, gt, Jt, nt
    return x, norm, max_iter


def solve_bethe(M: int, params: ModelParams, seeds: int = 200, rng: np.random.Generator | None = None,
                tol: float = 1e-10, max_iter: int = 200) -> list[BetheSolution]:
    """Multi-start damped Newton for the Bethe equations with analytic Jacobian.

    Newton runs on the ratio form Lambda1 prod f / (Lambda2 prod h) = 1, which
    has the same regular roots as E({u_i, ubar_i}) = 0 but O(1) scale; the
    acceptance test is on the normalized E itself.  Roots on singular loci are
    dropped; survivors are deduplicated by their eigenvalue functions at the
    fixed probe points (relative 1e-8).
    """
    if M < 1:
        raise ValueError("solve_bethe needs M >= 1")
    if M > params.N:
        raise ValueError("solver exposed for M <= N only")
    rng = rng if rng is not None else np.random.default_rng(params.rng_seed)
    c = Coefficients(params)
    found: list[BetheSolution] = []
    fingerprints: list[np.ndarray] = []
    failures = 0
    for s in range(seeds):
        mod = np.exp(rng.uniform(np.log(0.7), np.log(1.4), M))
        arg = rng.uniform(0, 2 * np.pi, M)
        seed = mod * np.exp(1j * arg)
        try:
            RapiditySet(seed).check(params)
            with np.errstate(all="ignore"):
                x, res, it = _newton(seed, c, 1e-13, max_iter)
        except (SingularParameterError, ZeroDivisionError, FloatingPointError):
            failures += 1
            continue
        if not np.isfinite(res) or res > tol:
            failures += 1
            continue
        try:
            roots = RapiditySet(x).check(params)
            sol = BetheSolution(roots, normalized_bethe_residuals(roots, params), params, it, s)
            fp = np.array(sol.fingerprint())
        except (SingularParameterError, ZeroDivisionError):
            failures += 1
            continue
        if max(sol.residuals) > tol:
            failures += 1
            continue
        if any(np.all(np.abs(fp - g) <= 1e-8 * np.maximum(np.abs(g), 1.0)) for g in fingerprints):
            continue
        found.append(sol)
        fingerprints.append(fp)
    log.info("solve_bethe M=%d N=%d: %d distinct solutions, %d seeds failed", M, params.N, len(found), failures)
    return found


def same_eigenvalue_function(s1: BetheSolution, s2: BetheSolution, rtol: float = 1e-8) -> bool:
    a, b = np.array(s1.fingerprint()), np.array(s2.fingerprint())
    return bool(np.all(np.abs(a - b) <= rtol * np.maximum(np.abs(b), 1.0)))


def verify_against_ed(solution: BetheSolution, u_probe: complex, params: ModelParams,
                      spectrum: np.ndarray | None = None, tmat: np.ndarray | None = None) -> dict:
    """Nearest eigenvalue of t(u_probe) to Lambda and the Bethe-vector eigen-residual."""
    if params.dim > ED_DIM_CAP:
        raise ValueError(f"dimension {params.dim} exceeds ED cap {ED_DIM_CAP}")
    if tmat is None:
        method = "matrix_free" if params.N > VECTOR_N_CAP else "trace"
        tmat = transfer_matrix(u_probe, params, method)
    t = tmat
    ev = la.eigvals(t) if spectrum is None else spectrum
    lam = solution.eigenvalue_fn(u_probe)
    idx = int(np.argmin(np.abs(ev - lam)))
    gap = float(abs(ev[idx] - lam))
    out = {"u_probe": u_probe, "eigenvalue": lam, "index": idx, "abs_gap": gap,
           "rel_gap": gap / max(abs(lam), 1e-300)}
    if params.N <= VECTOR_N_CAP:
        vec = bethe_vector(solution.roots, params)
        nv = np.linalg.norm(vec)
        out["vector_norm"] = float(nv)
        out["eigvec_residual"] = (float(np.linalg.norm(t @ vec - lam * vec) / max(np.linalg.norm(t @ vec), abs(lam) * nv, 1e-300))
                                  if nv > 0 else float("nan"))
    return out
