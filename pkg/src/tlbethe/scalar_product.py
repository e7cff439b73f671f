"""Scalar products between an on-shell dual Bethe vector and an off-shell Bethe vector.

The determinant formula is evaluated with rows of the Jacobian indexed by the
on-shell roots u_i and columns by the free parameters v_j; the Cauchy kernel
uses rows over v_i and columns over u_j.  Both determinants come from LAPACK
LU with partial pivoting, and the 2-norm condition number of the Cauchy kernel
is reported with every value.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .bethe import (GUARD, VECTOR_N_CAP, RapiditySet, _ActionCache, bethe_vector, dual_bethe_vector,
                    normalized_bethe_residuals)
from .coefficients import Coefficients
from .model import ModelParams, SingularParameterError, omega
from .monodromy import build_T, build_That, reference_state

ON_SHELL_TOL = 1e-9


class OffShellError(ValueError):
    """The dual rapidities do not solve the Bethe equations."""


@dataclass(frozen=True)
class SlavnovInput:
    """On-shell ubar, arbitrary vbar of the same length, and the chain parameters."""

    ubar: RapiditySet
    vbar: RapiditySet
    params: ModelParams
    guard: float = GUARD

    def __post_init__(self):
        ub, vb = RapiditySet(self.ubar), RapiditySet(self.vbar)
        object.__setattr__(self, "ubar", ub)
        object.__setattr__(self, "vbar", vb)
        if ub.M != vb.M or ub.M < 1:
            raise ValueError(f"need #ubar = #vbar >= 1, got {ub.M} and {vb.M}")
        p = self.params
        ub.check(p, self.guard)
        vb.check(p, self.guard)
        res = normalized_bethe_residuals(ub, p)
        if max(res) >= ON_SHELL_TOL:
            raise OffShellError(f"ubar is off-shell: max normalized Bethe residual {max(res):.3e}")
        q = p.q
        for i, v in enumerate(vb):
            if abs(omega(v * v * q * q)) < self.guard:
                raise SingularParameterError(f"omega(v_{i + 1}^2 q^2) vanishes")
            for j, u in enumerate(ub):
                if abs(omega(v / u)) < self.guard or abs(omega(v * u * q)) < self.guard:
                    raise SingularParameterError(f"Cauchy kernel singular at v_{i + 1}, u_{j + 1}")

    @property
    def M(self) -> int:
        return self.ubar.M


@dataclass(frozen=True)
class SlavnovResult:
    value: complex
    det_jacobian: complex
    det_cauchy: complex
    prefactor: complex
    cauchy_condition: float


def prefactor(ubar, vbar, params: ModelParams) -> complex:
    q, Q, N = params.q, params.Q, params.N
    ub, vb = list(ubar), list(vbar)
    out = (1 / (2 * Q**2)) ** len(ub)
    for i, u in enumerate(ub):
        out *= omega(u) ** (2 * N) * u * omega(u * u) / (omega(u * u * q) * omega(vb[i] ** 2 * q * q))
        for j in range(i):
            out *= omega(u * ub[j] * q * q) / omega(u * ub[j])
    return out


def jacobian_matrix(ubar, vbar, params: ModelParams) -> np.ndarray:
    """J[i, j] = d Lambda({v_j, ubar}) / d u_i."""
    c = Coefficients(params)
    ub, vb = list(ubar), list(vbar)
    M = len(ub)
    return np.array([[c.d_eigenvalue_d_root(vb[j], ub, i) for j in range(M)] for i in range(M)])


def cauchy_matrix(ubar, vbar, params: ModelParams) -> np.ndarray:
    """K[i, j] = 1 / (omega(v_i / u_j) omega(v_i u_j q))."""
    q = params.q
    return np.array([[1 / (omega(v / u) * omega(v * u * q)) for u in ubar] for v in vbar])


def slavnov_formula(inp: SlavnovInput) -> SlavnovResult:
    J = jacobian_matrix(inp.ubar, inp.vbar, inp.params)
    K = cauchy_matrix(inp.ubar, inp.vbar, inp.params)
    detJ, detK = np.linalg.det(J), np.linalg.det(K)
    if detK == 0:
        raise SingularParameterError("Cauchy kernel determinant vanishes")
    pref = prefactor(inp.ubar, inp.vbar, inp.params)
    return SlavnovResult(complex(pref * detJ / detK), complex(detJ), complex(detK), complex(pref),
                         float(np.linalg.cond(K)))


def direct_scalar_product(ubar, vbar, params: ModelParams, acts=None) -> complex:
    """<0| C(u_M)...C(u_1) B(v_1)...B(v_M) |0> as a literal bilinear product."""
    if params.N > VECTOR_N_CAP:
        raise ValueError(f"direct products capped at N={VECTOR_N_CAP}")
    acts = acts or _ActionCache(params)
    return complex(dual_bethe_vector(ubar, params, acts) @ bethe_vector(vbar, params, acts))


def relative_error(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def check_permutation_invariance(ubar, vbar, params: ModelParams) -> dict[str, float]:
    """Largest relative change of the formula and the direct product under permutations of either set."""
    ubar, vbar = list(ubar), list(vbar)
    acts = _ActionCache(params)
    base_f = slavnov_formula(SlavnovInput(ubar, vbar, params)).value
    base_d = direct_scalar_product(ubar, vbar, params, acts)
    worst_f = worst_d = 0.0
    for pu in itertools.permutations(range(len(ubar))):
        for pv in itertools.permutations(range(len(vbar))):
            u2, v2 = [ubar[k] for k in pu], [vbar[k] for k in pv]
            worst_f = max(worst_f, relative_error(slavnov_formula(SlavnovInput(u2, v2, params)).value, base_f))
            worst_d = max(worst_d, relative_error(direct_scalar_product(u2, v2, params, acts), base_d))
    return {"formula": worst_f, "direct": worst_d}


def eigenvalue_jacobian_fd(v: complex, ubar, params: ModelParams, i: int, step: float = 1e-7) -> tuple[complex, complex]:
    """Central differences of Lambda({v, ubar}) in u_i along the real and imaginary directions."""
    c = Coefficients(params)
    ub = list(ubar)

    def lam(x):
        shifted = ub[:i] + [x] + ub[i + 1:]
        return c.eigenvalue(v, shifted)

    u = ub[i]
    d_re = (lam(u + step) - lam(u - step)) / (2 * step)
    d_im = (lam(u + 1j * step) - lam(u - 1j * step)) / (2j * step)
    return d_re, d_im


def check_jacobian_fd(v: complex, ubar, params: ModelParams, step: float = 1e-7) -> float:
    """Worst relative gap between the analytic d Lambda / d u_i and both difference quotients."""
    c = Coefficients(params)
    worst = 0.0
    for i in range(len(ubar)):
        exact = c.d_eigenvalue_d_root(v, list(ubar), i)
        for approx in eigenvalue_jacobian_fd(v, ubar, params, i, step):
            worst = max(worst, relative_error(exact, approx))
    return worst


def c2b2_term(u1: complex, v1: complex, params: ModelParams, acts=None) -> complex:
    """<0| C2(u1) B2(v1) |0>."""
    acts = acts or _ActionCache(params)
    bra = acts(u1).left("C2", reference_state(params))
    ket = acts(v1).right("B2", reference_state(params))
    return complex(bra @ ket)


def m1_expansion(u1: complex, v1: complex, params: ModelParams, drop_c2b2: bool = False, acts=None) -> complex:
    """<u1|v1> assembled from the C-B commutation coefficients and the reference eigenvalues."""
    c = Coefficients(params)
    q, Q2 = params.q, params.Q**2
    L1u, L1v, L2u, L2v = c.Lambda1(u1), c.Lambda1(v1), c.Lambda2(u1), c.Lambda2(v1)
    ru = omega(u1 * u1) / omega(q * u1 * u1)
    rv = omega(v1 * v1) / omega(q * v1 * v1)
    x = [None] + [getattr(c, f"x{k}")(u1, v1) for k in range(1, 7)]
    val = ((x[1] + x[2]) * L1u * L1v
           - rv * x[4] / Q2 * L1u * L2v
           - ru * (x[3] + x[5]) / Q2 * L2u * L1v
           + ru * rv * x[6] / Q2**2 * L2u * L2v)
    if not drop_c2b2:
        val -= c2b2_term(u1, v1, params, acts)
    return complex(val)


def check_m1_expansion(u1: complex, v1: complex, params: ModelParams, drop_c2b2: bool = False) -> float:
    """Relative residual between the direct <u1|v1> and its expansion."""
    RapiditySet([u1]).check(params)
    RapiditySet([v1]).check(params)
    acts = _ActionCache(params)
    direct = direct_scalar_product([u1], [v1], params, acts)
    return relative_error(direct, m1_expansion(u1, v1, params, drop_c2b2, acts))


def check_c2_annihilation(u1: complex, params: ModelParams, require_on_shell: bool = True) -> float:
    """||<0| C2(u1)|| / ||C2(u1)||_F for an M=1 Bethe root u1.

    C2 = U_32 is assembled once as a dense matrix from T and T^.
    """
    c = Coefficients(params)
    if require_on_shell:
        L1, L2 = c.Lambda1(u1), c.Lambda2(u1)
        gap = abs(L1 - L2) / max(abs(L1), abs(L2), 1e-300)
        if gap >= ON_SHELL_TOL:
            raise OffShellError(f"u1={u1} is not an M=1 Bethe root (relative gap {gap:.3e})")
    if params.N > VECTOR_N_CAP:
        raise ValueError(f"C2 assembly capped at N={VECTOR_N_CAP}")
    T, Th = build_T(u1, params), build_That(u1, params)
    C2 = sum(T[2, k] @ Th[k, 1] for k in range(3))
    # <0| is the first basis row
    return float(np.linalg.norm(C2[0]) / max(np.linalg.norm(C2), 1e-300))


def norm_limit(ubar, params: ModelParams, eps=(1e-2, 1e-3, 1e-4)) -> dict:
    """Direct <ubar|vbar> along vbar = ubar (1 + eps) and at vbar = ubar."""
    acts = _ActionCache(params)
    ub = list(ubar)
    seq = [direct_scalar_product(ub, [u * (1 + e) for u in ub], params, acts) for e in eps]
    return {"eps": list(eps), "sequence": seq, "at_ubar": direct_scalar_product(ub, ub, params, acts)}
