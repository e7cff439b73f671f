"""Scalar coefficient functions of the open TL spin-1 Bethe ansatz.

Every function is a rational function of its arguments and of (q, Q).  Each
checks its denominator factors and raises :class:`SingularParameterError`
naming the factor that vanishes.  Empty products are 1 and empty sums 0.

Rapidity lists in this module are plain sequences indexed from 0; docstrings
use the 1-based labels u_1 ... u_M.
"""

from __future__ import annotations

from typing import Callable, Sequence

from .model import ModelParams, SingularParameterError, omega

# |denominator| below this is treated as an exact zero
POLE_GUARD = 1e-13


def _den(value: complex, label: str) -> complex:
    if abs(value) < POLE_GUARD:
        raise SingularParameterError(f"denominator factor {label} vanishes")
    return value


def _prod(values) -> complex:
    out = 1.0 + 0j
    for v in values:
        out *= v
    return out


def dlog_omega(x: complex, power: float, u: complex) -> complex:
    """d/du log omega(x) when x = const * u**power."""
    return power * (x + 1 / x) / (u * _den(omega(x), "omega(x)"))


class Coefficients:
    """All scalar functions bound to one :class:`ModelParams`."""

    def __init__(self, params: ModelParams):
        self.params = params
        self.q = params.q
        self.Q = params.Q
        self.N = params.N
        # q + 1/q appears in every Z-type sum
        self.qq = params.q + 1 / params.q

    # -- one-argument functions -------------------------------------------
    def d(self, u):
        return -omega(u * u) / _den(omega(self.q * u * u), "omega(q u^2)")

    def a(self, u):
        q = self.q
        return -omega(q * q * u * u) / _den(omega(q * u * u), "omega(q u^2)")

    def y(self, u):
        return 1 - self.d(u) / self.Q**2

    def Lambda1(self, u):
        return omega(self.q * u) ** (2 * self.N)

    def Lambda2(self, u):
        return omega(u) ** (2 * self.N)

    def zeta(self, u):
        q = self.q
        return omega(u / q) * omega(1 / (u * q))

    # -- exchange-relation coefficients (B side) --------------------------
    def f(self, u, v):
        q = self.q
        return (omega(u / (q * v)) * omega(u * v)
                / (_den(omega(u / v), "omega(u/v)") * _den(omega(q * u * v), "omega(q u v)")))

    def f1(self, u, v):
        q, Q = self.q, self.Q
        return (omega(v * v)
                / (_den(omega(q * v * v), "omega(q v^2)") * _den(omega(u / v), "omega(u/v)"))
                * (omega(q * v / u) + omega(v / u) / Q**2))

    def f2(self, u, v):
        q, Q = self.q, self.Q
        return -1 - Q**2 * omega(u * v) / _den(omega(q * u * v), "omega(q u v)")

    def f3(self, u, v):
        q = self.q
        return -omega(u * v) / _den(omega(q * u * v), "omega(q u v)")

    def h(self, u, v):
        q = self.q
        return (omega(u * q / v) * omega(q * q * u * v)
                / (_den(omega(u / v), "omega(u/v)") * _den(omega(q * u * v), "omega(q u v)")))

    def h1(self, u, v):
        q, Q = self.q, self.Q
        return (omega(q * q * u * u)
                / (Q**2 * _den(omega(q * u * u), "omega(q u^2)") * _den(omega(u / v), "omega(u/v)"))
                * ((1 + Q**-2) * omega(q * u / v) + omega(q * q * u / v)))

    def h2(self, u, v):
        q, Q = self.q, self.Q
        # omega(q u v) here, not omega(q v): only this form satisfies the D-B exchange relation
        den = (Q**4 * _den(omega(q * u * u), "omega(q u^2)") * _den(omega(q * u * v), "omega(q u v)")
               * _den(omega(q * v * v), "omega(q v^2)"))
        return (omega(q * q * u * u) * omega(v * v) / den
                * ((1 + Q**-2) * omega(q * q * u * v) + omega(q**3 * u * v)))

    def h3(self, u, v):
        q, Q = self.q, self.Q
        return ((q - 1 / q) * omega(q * u / v)
                / (Q**2 * _den(omega(q * u * u), "omega(q u^2)") * _den(omega(q * u * v), "omega(q u v)")))

    def H(self, u, v):
        q = self.q
        return ((q - 1 / q) * omega(q * q * u * u)
                / (_den(omega(u / v), "omega(u/v)") * _den(omega(q * u * v), "omega(q u v)"))
                * self.d(v))

    # -- C(u) B(v) commutation coefficients --------------------------------
    def x1(self, u, v):
        q, Q = self.q, self.Q
        num = omega(u * u) * (Q**2 * omega(q * v * v) + omega(v * v)) * (omega(q * u / v) + omega(u / v) / Q**2)
        den = (Q**2 * _den(omega(q * u * u), "omega(q u^2)") * _den(omega(q * v * v), "omega(q v^2)")
               * _den(omega(v / u), "omega(v/u)"))
        return num / den

    def x2(self, u, v):
        q, Q = self.q, self.Q
        num = omega(u * u) * omega(q * u / v) * (omega(q * u * v) + omega(u * v) / Q**2)
        den = (_den(omega(q * u * u), "omega(q u^2)") * _den(omega(u / v), "omega(u/v)")
               * _den(omega(q * u * v), "omega(q u v)"))
        return num / den

    def x3(self, u, v):
        q, Q = self.q, self.Q
        num = (Q**2 * omega(q * v * v) + omega(v * v)) * (omega(q * u * v) + Q**2 * omega(u * v))
        den = Q**2 * _den(omega(q * v * v), "omega(q v^2)") * _den(omega(q * u * v), "omega(q u v)")
        return -num / den

    def x4(self, u, v):
        q, Q = self.q, self.Q
        num = omega(u * u) * (omega(q * u / v) + omega(u / v) / Q**2)
        return num / (_den(omega(q * u * u), "omega(q u^2)") * _den(omega(v / u), "omega(v/u)"))

    def x5(self, u, v):
        q, Q = self.q, self.Q
        num = omega(u * v) * (omega(q * u / v) + Q**2 * omega(u / v))
        return num / (_den(omega(u / v), "omega(u/v)") * _den(omega(q * u * v), "omega(q u v)"))

    def x6(self, u, v):
        q, Q = self.q, self.Q
        return -(omega(q * u * v) + Q**2 * omega(u * v)) / _den(omega(q * u * v), "omega(q u v)")

    def y1(self, u, v):
        return omega(u * v) / _den(omega(self.q * u * v), "omega(q u v)")

    def y2(self, u, v):
        q, Q = self.q, self.Q
        num = omega(u * v) * (Q**2 * omega(q * v * v) + omega(v * v))
        den = Q**2 * _den(omega(q * v * v), "omega(q v^2)") * _den(omega(q * u * v), "omega(q u v)")
        return -num / den

    def y3(self, u, v):
        return -omega(u * v) / _den(omega(self.q * u * v), "omega(q u v)")

    # -- geometric sequences ----------------------------------------------
    def r(self, i: int):
        if i < 0:
            raise ValueError("r_i needs i >= 0")
        Q = self.Q
        return -(((1 + Q**2) / Q**4) ** i)

    def s(self, i: int):
        if i < 1:
            raise ValueError("s_i needs i >= 1")
        Q = self.Q
        return ((1 + Q**2) / Q**4) ** (i - 1) / Q**2

    # -- nested sums -------------------------------------------------------
    def _z_bracket(self, ui, k, others, fa, hb):
        """-Q^-2 d(u_i) fa prod_{j>=k, j!=i} f(u_i,u_j) + hb prod_{j>=k, j!=i} h(u_i,u_j).

        ``others`` is a list of (j, u_j) with 1-based j, already excluding i.
        """
        pf = _prod(self.f(ui, uj) for j, uj in others if j >= k)
        ph = _prod(self.h(ui, uj) for j, uj in others if j >= k)
        return -self.d(ui) * fa * pf / self.Q**2 + hb * ph

    def alpha_M(self, u, ubar: Sequence[complex]):
        """alpha^M({u, ubar}); ``ubar`` = (u_1..u_M)."""
        return self._alpha_delta(u, ubar, delta=False)

    def delta_M(self, u, ubar: Sequence[complex]):
        """delta^M({u, ubar}); depends on u also through a(u) in the nested sum."""
        return self._alpha_delta(u, ubar, delta=True)

    def _alpha_delta(self, u, ubar, delta: bool):
        M = len(ubar)
        if M < 1:
            raise ValueError("alpha^M / delta^M need M >= 1")
        us = [None, *ubar]  # 1-based
        uM = us[M]
        first, pf, ph = (self.h3, self.h, self.f) if delta else (self.f3, self.f, self.h)
        total = first(u, uM) * _prod(pf(u, us[i]) for i in range(1, M))
        for i in range(1, M):
            others = [(j, us[j]) for j in range(1, M) if j != i]
            ui = us[i]
            prod_f = _prod(self.f(ui, uj) for _, uj in others)
            prod_h = _prod(self.h(ui, uj) for _, uj in others)
            if delta:
                term = (self.h1(u, ui) * self.h3(ui, uM) * prod_h
                        + self.h2(u, ui) * self.f3(ui, uM) * prod_f)
                zpref = -self.qq * self.a(u) / self.Q**2
            else:
                term = (self.f1(u, ui) * self.f3(ui, uM) * prod_f
                        + self.f2(u, ui) * self.h3(ui, uM) * prod_h)
                zpref = self.qq
            zsum = sum(self.r(k - 2) * self._z_bracket(ui, k, others, self.f3(ui, uM), self.h3(ui, uM))
                       for k in range(2, i + 1))
            total += term + zpref * zsum
        return total

    # -- on-shell quantities -----------------------------------------------
    def eigenvalue(self, u, ubar: Sequence[complex]):
        """Lambda({u, ubar})."""
        return (self.a(u) * self.Lambda1(u) * _prod(self.f(u, x) for x in ubar)
                + self.d(u) * self.Lambda2(u) * _prod(self.h(u, x) for x in ubar))

    def bethe_terms(self, i: int, ubar: Sequence[complex]) -> tuple[complex, complex]:
        """(Lambda1(u_i) prod f, Lambda2(u_i) prod h) over j != i; ``i`` is 0-based."""
        ui = ubar[i]
        rest = [x for j, x in enumerate(ubar) if j != i]
        return (self.Lambda1(ui) * _prod(self.f(ui, x) for x in rest),
                self.Lambda2(ui) * _prod(self.h(ui, x) for x in rest))

    def bethe_residual(self, i: int, ubar: Sequence[complex]):
        tf, th = self.bethe_terms(i, ubar)
        return tf - th

    # -- logarithmic derivatives (solver Jacobian, Slavnov matrix) ---------
    def dlog_f(self, u, v, wrt: int):
        """d log f(u, v) / d(u if wrt == 0 else v)."""
        q = self.q
        # f = omega(u/(q v)) omega(u v) / (omega(u/v) omega(q u v))
        x = u if wrt == 0 else v
        s = 1 if wrt == 0 else -1
        return (dlog_omega(u / (q * v), s, x) + dlog_omega(u * v, 1, x)
                - dlog_omega(u / v, s, x) - dlog_omega(q * u * v, 1, x))

    def dlog_h(self, u, v, wrt: int):
        q = self.q
        # h = omega(q u/v) omega(q^2 u v) / (omega(u/v) omega(q u v))
        x = u if wrt == 0 else v
        s = 1 if wrt == 0 else -1
        return (dlog_omega(q * u / v, s, x) + dlog_omega(q * q * u * v, 1, x)
                - dlog_omega(u / v, s, x) - dlog_omega(q * u * v, 1, x))

    def dlog_Lambda1(self, u):
        return 2 * self.N * dlog_omega(self.q * u, 1, u)

    def dlog_Lambda2(self, u):
        return 2 * self.N * dlog_omega(u, 1, u)

    def d_eigenvalue_d_root(self, v, ubar: Sequence[complex], i: int):
        """d Lambda({v, ubar}) / d u_i (0-based i)."""
        ui = ubar[i]
        tf = self.a(v) * self.Lambda1(v) * _prod(self.f(v, x) for x in ubar)
        th = self.d(v) * self.Lambda2(v) * _prod(self.h(v, x) for x in ubar)
        return tf * self.dlog_f(v, ui, 1) + th * self.dlog_h(v, ui, 1)

    def bethe_jacobian(self, ubar: Sequence[complex]):
        """Analytic Jacobian of the Bethe residual map, J[i][k] = dE_i/du_k."""
        M = len(ubar)
        J = [[0j] * M for _ in range(M)]
        for i in range(M):
            ui = ubar[i]
            tf, th = self.bethe_terms(i, ubar)
            for k in range(M):
                if k == i:
                    gf = self.dlog_Lambda1(ui) + sum(self.dlog_f(ui, x, 0) for j, x in enumerate(ubar) if j != i)
                    gh = self.dlog_Lambda2(ui) + sum(self.dlog_h(ui, x, 0) for j, x in enumerate(ubar) if j != i)
                else:
                    gf = self.dlog_f(ui, ubar[k], 1)
                    gh = self.dlog_h(ui, ubar[k], 1)
                J[i][k] = tf * gf - th * gh
        return J


BASIC_FUNCTIONS = ("a", "d", "y", "Lambda1", "Lambda2", "zeta",
                   "f", "f1", "f2", "f3", "h", "h1", "h2", "h3", "H")
CB_FUNCTIONS = ("x1", "x2", "x3", "x4", "x5", "x6", "y1", "y2", "y3")


def eval_basic(name: str, u: complex, v: complex | None = None,
               params: ModelParams | None = None) -> complex:
    """Evaluate a named one- or two-argument coefficient function."""
    if name not in BASIC_FUNCTIONS:
        raise KeyError(f"unknown coefficient {name!r}")
    fn: Callable = getattr(Coefficients(params), name)
    return fn(u) if v is None else fn(u, v)


def eval_cb_coefficients(name: str, u: complex, v: complex, params: ModelParams) -> complex:
    if name not in CB_FUNCTIONS:
        raise KeyError(f"unknown coefficient {name!r}")
    return getattr(Coefficients(params), name)(u, v)


def r_coeff(i: int, params: ModelParams) -> complex:
    return Coefficients(params).r(i)


def s_coeff(i: int, params: ModelParams) -> complex:
    return Coefficients(params).s(i)


def alpha_M(u, ubar, params: ModelParams) -> complex:
    return Coefficients(params).alpha_M(u, ubar)


def delta_M(u, ubar, params: ModelParams) -> complex:
    return Coefficients(params).delta_M(u, ubar)


def _rel(x: complex, target: complex = 0.0, scale: float = 0.0) -> float:
    return abs(x - target) / max(abs(target), scale, 1.0)


def check_H_identities(u, v, params: ModelParams, H_shift: complex = 0.0) -> tuple[float, float]:
    """Residuals of the two f/h combination identities that produce H(u, v)."""
    c = Coefficients(params)
    Q2 = params.Q**2
    H = c.H(u, v) + H_shift
    lhs1 = c.a(u) * c.f1(u, v) + Q2 * c.h2(u, v)
    lhs2 = c.a(u) * c.f2(u, v) + Q2 * c.h1(u, v)
    rhs2 = -Q2 / c.d(v) * H
    r1 = abs(lhs1 - H) / max(abs(lhs1), abs(H), 1.0)
    r2 = abs(lhs2 - rhs2) / max(abs(lhs2), abs(rhs2), 1.0)
    return r1, r2


class InductionScalars:
    """Auxiliary scalars of the M -> M+1 induction step for the A and D actions.

    ``ubar`` holds M+1 rapidities (u_1..u_{M+1}); M = len(ubar) - 1 >= 1.
    """

    def __init__(self, u: complex, ubar: Sequence[complex], params: ModelParams):
        if len(ubar) < 2:
            raise ValueError("induction scalars need M >= 1, i.e. at least two rapidities")
        self.c = Coefficients(params)
        self.u = u
        self.us = [None, *ubar]
        self.M = len(ubar) - 1

    # helpers over 1..M
    def _pf(self, x, k=1, skip=None):
        return _prod(self.c.f(x, self.us[j]) for j in range(k, self.M + 1) if j != skip)

    def _ph(self, x, k=1, skip=None):
        return _prod(self.c.h(x, self.us[j]) for j in range(k, self.M + 1) if j != skip)

    # gamma: B^M A(u) B(u_{M+1}) reordered
    def gamma(self, which: str):
        c, u, M, us = self.c, self.u, self.M, self.us
        last = us[M + 1]
        base = self._pf(u)
        return {"a": c.f1(u, last) * base, "d": c.f2(u, last) * base,
                "e": c.f3(u, last) * base, "b2": -base}[which]

    def gamma_bar(self, which: str):
        c, u, M, us = self.c, self.u, self.M, self.us
        last = us[M + 1]
        base = self._ph(u)
        Q2 = c.Q**2
        return {"a": c.h2(u, last) * base, "d": c.h1(u, last) * base, "e": c.h3(u, last) * base,
                "b2": c.a(u) * base / Q2, "b": -base / Q2}[which]

    def _theta(self, which: str, kf, kh):
        """Shared shape of theta / theta-bar; kf, kh are the f-type and h-type prefactors."""
        c, u, M, us = self.c, self.u, self.M, self.us
        last = us[M + 1]
        Q2 = c.Q**2
        total = 0j
        if which == "a":
            total -= kf(u, last) * self._pf(last)
        elif which == "d":
            total -= kh(u, last) * self._ph(last)
        for i in range(1, M + 1):
            ui = us[i]
            pf = self._pf(ui, skip=i)
            ph = self._ph(ui, skip=i)
            if which == "a":
                total += kf(u, ui) * c.f1(ui, last) * pf + kh(u, ui) * c.h2(ui, last) * ph
            elif which == "d":
                total += kf(u, ui) * c.f2(ui, last) * pf + kh(u, ui) * c.h1(ui, last) * ph
            elif which == "e":
                total += kf(u, ui) * c.f3(ui, last) * pf + kh(u, ui) * c.h3(ui, last) * ph
            elif which == "b2":
                total -= kf(u, ui) * pf - kh(u, ui) * c.a(ui) * ph / Q2
            elif which == "b":
                total -= kh(u, ui) * ph / Q2
        return total

    def theta(self, which: str):
        return self._theta(which, self.c.f1, self.c.f2)

    def theta_bar(self, which: str):
        return self._theta(which, self.c.h2, self.c.h1)

    def tau(self, which: str):
        c, M, us = self.c, self.M, self.us
        last = us[M + 1]
        Q2 = c.Q**2
        qq = c.qq
        total = 0j
        if which == "a":
            total += qq * c.d(last) / Q2 * sum(c.r(k - 2) * self._pf(last, k) for k in range(2, M + 2))
        elif which == "d":
            total -= qq * sum(c.r(k - 2) * self._ph(last, k) for k in range(2, M + 2))
        for i in range(2, M + 1):
            ui = us[i]
            for k in range(2, i + 1):
                rk = c.r(k - 2)
                pf = self._pf(ui, k, skip=i)
                ph = self._ph(ui, k, skip=i)
                if which == "a":
                    total -= qq * rk * (c.d(ui) * c.f1(ui, last) * pf / Q2 - c.h2(ui, last) * ph)
                elif which == "d":
                    total -= qq * rk * (c.d(ui) * c.f2(ui, last) * pf / Q2 - c.h1(ui, last) * ph)
                elif which == "e":
                    total -= qq * rk * (c.d(ui) * c.f3(ui, last) * pf / Q2 - c.h3(ui, last) * ph)
                elif which == "b2":
                    total += qq * rk / Q2 * (c.d(ui) * pf + c.a(ui) * ph)
                elif which == "b":
                    total -= qq * rk / Q2 * ph
        return total


def induction_residuals(u: complex, ubar: Sequence[complex], params: ModelParams) -> dict[str, float]:
    """The ten functional identities closing the induction for the A and D actions.

    ``ubar`` has M+1 entries.  Each value is |lhs - rhs| / max(|rhs|, |terms|, 1).
    """
    s = InductionScalars(u, ubar, params)
    c, M = s.c, s.M
    ubarM = list(ubar[:M])
    a_over = c.a(u) / c.Q**2
    out = {}

    def record(name, terms, rhs):
        lhs = sum(terms)
        scale = max(abs(t) for t in terms)
        out[name] = _rel(lhs, rhs, scale)

    record("A:a", [s.gamma("a"), s.theta("a"), s.tau("a")], 0)
    record("A:d", [s.gamma("d"), s.theta("d"), s.tau("d")], 0)
    record("A:e", [s.gamma("e"), s.theta("e"), s.tau("e")], c.alpha_M(u, list(ubar)))
    record("A:b2", [s.gamma("b2"), s.theta("b2"), s.tau("b2")], c.r(M))
    record("A:b", [s.theta("b"), s.tau("b"), c.alpha_M(u, ubarM)], c.s(M))
    record("D:a", [s.gamma_bar("a"), s.theta_bar("a"), -a_over * s.tau("a")], 0)
    record("D:d", [s.gamma_bar("d"), s.theta_bar("d"), -a_over * s.tau("d")], 0)
    record("D:e", [s.gamma_bar("e"), s.theta_bar("e"), -a_over * s.tau("e")], c.delta_M(u, list(ubar)))
    record("D:b2", [s.gamma_bar("b2"), s.theta_bar("b2"), -a_over * s.tau("b2")], -a_over * c.r(M))
    record("D:b", [s.gamma_bar("b"), s.theta_bar("b"), -a_over * s.tau("b"), c.delta_M(u, ubarM)],
           -a_over * c.s(M))
    return out


def b2_limit_value(u: complex, ubar: Sequence[complex], params: ModelParams) -> complex:
    """gamma_b2 + theta_b2 + tau_b2, whose large-|u| limit is r_M."""
    s = InductionScalars(u, ubar, params)
    return s.gamma("b2") + s.theta("b2") + s.tau("b2")
