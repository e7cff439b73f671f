"""Single- and double-row monodromies, their blocks and the transfer matrix.

An operator-valued 3x3 auxiliary matrix is stored as an ndarray of shape
(3, 3, D, D) with D = 3^N: ``T[a, b]`` is the quantum-space operator in
auxiliary row a, column b (0-based).  Monodromies are grown one site at a
time so the (3 D)-dimensional joint space is only formed inside the
joint-space checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from .coefficients import Coefficients
from .lax import P9, build_dR, build_R, swap
from .model import ModelParams, SingularParameterError, omega, rel_residual

I3 = np.eye(3)

# block name -> (row, col) of U; E and D carry the A-subtraction of the block map
BLOCK_INDEX = {"A": (0, 0), "B1": (0, 1), "B": (0, 2), "C1": (1, 0), "E": (1, 1),
               "B2": (1, 2), "C": (2, 0), "C2": (2, 1), "D": (2, 2)}


def lax_entries(R9: np.ndarray) -> np.ndarray:
    """View a 9x9 matrix on (aux (x) site) as a 3x3 array of 3x3 site operators."""
    return R9.reshape(3, 3, 3, 3).transpose(0, 2, 1, 3)


def _left_grow(T, L):
    # T_new[a,b] = sum_c T[c,b] (x) L[a,c]; new site is the fastest tensor factor
    D = T.shape[-1]
    return np.einsum("cbij,ackl->abikjl", T, L).reshape(3, 3, 3 * D, 3 * D)


def _right_grow(T, L):
    # T_new[a,b] = sum_c T[a,c] (x) L[c,b]
    D = T.shape[-1]
    return np.einsum("acij,cbkl->abikjl", T, L).reshape(3, 3, 3 * D, 3 * D)


def _grow(L, dL, N, step):
    T, dT = L, dL
    for _ in range(N - 1):
        if dL is not None:
            dT = step(dT, L) + step(T, dL)
        T = step(T, L)
    return T, dT


def build_T(u: complex, params: ModelParams, derivative: bool = False):
    """T(u) = R_0N(u) ... R_01(u) as a (3, 3, D, D) array.

    With ``derivative=True`` returns ``(T, dT/du)``.
    """
    if u == 0:
        raise SingularParameterError("T(u) requires u != 0")
    L = lax_entries(build_R(u, params))
    dL = lax_entries(build_dR(u, params)) if derivative else None
    T, dT = _grow(L, dL, params.N, _left_grow)
    return (T, dT) if derivative else T


def build_That(u: complex, params: ModelParams, derivative: bool = False):
    """T^(u) = R_10(u) ... R_N0(u) as a (3, 3, D, D) array."""
    if u == 0:
        raise SingularParameterError("T^(u) requires u != 0")
    L = lax_entries(swap(build_R(u, params)))
    dL = lax_entries(swap(build_dR(u, params))) if derivative else None
    T, dT = _grow(L, dL, params.N, _right_grow)
    return (T, dT) if derivative else T


def aux_product(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """(X Y)[a, b] = sum_c X[a, c] @ Y[c, b]."""
    return np.einsum("acij,cbjk->abik", X, Y, optimize=True)


def build_U_matrix(u: complex, params: ModelParams) -> np.ndarray:
    """Raw double-row monodromy U(u) = T(u) T^(u) as (3, 3, D, D)."""
    return aux_product(build_T(u, params), build_That(u, params))


@dataclass(frozen=True)
class DoubleRowBlocks:
    """The nine quantum-space operators of U(u) after the A-subtractions."""

    u: complex
    y: complex
    A: np.ndarray
    B1: np.ndarray
    B: np.ndarray
    C1: np.ndarray
    E: np.ndarray
    B2: np.ndarray
    C: np.ndarray
    C2: np.ndarray
    D: np.ndarray

    @classmethod
    def from_U(cls, U: np.ndarray, u: complex, params: ModelParams) -> "DoubleRowBlocks":
        y = Coefficients(params).y(u)
        A = U[0, 0]
        return cls(u=u, y=y, A=A, B1=U[0, 1], B=U[0, 2], C1=U[1, 0], E=U[1, 1] - A,
                   B2=U[1, 2], C=U[2, 0], C2=U[2, 1], D=U[2, 2] - y * A)

    def reconstruct(self) -> np.ndarray:
        A = self.A
        return np.array([
            [A, self.B1, self.B],
            [self.C1, self.E + A, self.B2],
            [self.C, self.C2, self.D + self.y * A],
        ])

    def __getitem__(self, name: str) -> np.ndarray:
        return getattr(self, name)


def build_U(u: complex, params: ModelParams) -> DoubleRowBlocks:
    """Double-row blocks at u; rejects q u^2 = +-1 where d(u), y(u) blow up."""
    if u == 0 or abs(omega(params.q * u * u)) < 1e-13:
        raise SingularParameterError(f"u={u}: omega(q u^2) vanishes")
    return DoubleRowBlocks.from_U(build_U_matrix(u, params), u, params)


class BlockCache:
    """Memoises :func:`build_U` by spectral parameter for repeated operator algebra."""

    def __init__(self, params: ModelParams):
        self.params = params
        self._store: dict[complex, DoubleRowBlocks] = {}

    def __call__(self, u: complex) -> DoubleRowBlocks:
        u = complex(u)
        if u not in self._store:
            self._store[u] = build_U(u, self.params)
        return self._store[u]


class DoubleRowAction:
    """Apply blocks of U(u) to vectors through T and T^ without forming U."""

    def __init__(self, u: complex, params: ModelParams):
        if abs(omega(params.q * u * u)) < 1e-13:
            raise SingularParameterError(f"u={u}: omega(q u^2) vanishes")
        self.u = u
        self.y = Coefficients(params).y(u)
        self.T = build_T(u, params)
        self.Th = build_That(u, params)

    def _raw_right(self, a, b, v):
        return sum(self.T[a, c] @ (self.Th[c, b] @ v) for c in range(3))

    def _raw_left(self, a, b, w):
        return sum((w @ self.T[a, c]) @ self.Th[c, b] for c in range(3))

    def _apply(self, name, vec, raw):
        a, b = BLOCK_INDEX[name]
        out = raw(a, b, vec)
        if name == "E":
            out = out - raw(0, 0, vec)
        elif name == "D":
            out = out - self.y * raw(0, 0, vec)
        return out

    def right(self, name: str, v: np.ndarray) -> np.ndarray:
        """block(u) @ v"""
        return self._apply(name, v, self._raw_right)

    def left(self, name: str, w: np.ndarray) -> np.ndarray:
        """w @ block(u) for a row vector w"""
        return self._apply(name, w, self._raw_left)


def reference_state(params: ModelParams) -> np.ndarray:
    """|0> = e_1^{(x) N}."""
    v = np.zeros(params.dim, dtype=complex)
    v[0] = 1
    return v


def transfer_matrix(u: complex, params: ModelParams,
                    method: Literal["trace", "blocks", "matrix_free"] = "trace",
                    blocks: DoubleRowBlocks | None = None) -> np.ndarray:
    """t(u) = tr_0[M_0 U_0(u)], M = diag(Q^-2, 1, Q^2), or a(u) A + Q^2 D + E.

    ``matrix_free`` builds the dense matrix column-wise from local R factors and
    is the only method that stays within memory at N = 7.
    """
    Q2 = params.Q**2
    if method == "matrix_free":
        return apply_transfer(u, params, np.eye(params.dim, dtype=complex))
    if method == "trace":
        U = build_U_matrix(u, params) if blocks is None else blocks.reconstruct()
        return U[0, 0] / Q2 + U[1, 1] + Q2 * U[2, 2]
    if method == "blocks":
        b = build_U(u, params) if blocks is None else blocks
        return Coefficients(params).a(u) * b.A + Q2 * b.D + b.E
    raise ValueError(f"unknown method {method!r}")


def _apply_local(G4: np.ndarray, X: np.ndarray, site: int) -> np.ndarray:
    """Apply a two-factor operator (aux, site) with G4[a', s', a, s] to a joint tensor."""
    out = np.tensordot(G4, X, axes=([2, 3], [0, site]))
    return np.moveaxis(out, 1, site)


def apply_transfer(u: complex, params: ModelParams, V: np.ndarray) -> np.ndarray:
    """t(u) @ V without forming T or T^ (columns of V are quantum-space vectors).

    U = R_0N ... R_01 R_10 ... R_N0 is applied factor by factor to e_a (x) V.
    """
    N, Q2 = params.N, params.Q**2
    V = np.asarray(V, dtype=complex)
    squeeze = V.ndim == 1
    V = V.reshape(params.dim, -1)
    K = V.shape[1]
    R = build_R(u, params)
    G = R.reshape(3, 3, 3, 3)
    Gs = swap(R).reshape(3, 3, 3, 3)
    out = np.zeros_like(V)
    for a, w in enumerate((1 / Q2, 1.0, Q2)):
        X = np.zeros((3,) + (3,) * N + (K,), dtype=complex)
        X[a] = V.reshape((3,) * N + (K,))
        for site in range(N, 0, -1):
            X = _apply_local(Gs, X, site)
        for site in range(1, N + 1):
            X = _apply_local(G, X, site)
        out += w * X[a].reshape(params.dim, K)
    return out[:, 0] if squeeze else out


def transfer_derivative_at_one(params: ModelParams, method: Literal["analytic", "finite_difference"] = "analytic",
                               step: float = 1e-6) -> np.ndarray:
    """t'(1): product rule through every R factor, or 2-level Richardson central differences."""
    Q2 = params.Q**2
    M = np.array([1 / Q2, 1, Q2])
    if method == "analytic":
        T, dT = build_T(1.0, params, derivative=True)
        Th, dTh = build_That(1.0, params, derivative=True)
        dU = aux_product(dT, Th) + aux_product(T, dTh)
        return sum(M[a] * dU[a, a] for a in range(3))
    if method == "finite_difference":
        def t(x):
            return transfer_matrix(x, params, "trace")

        def central(hh):
            return (t(1 + hh) - t(1 - hh)) / (2 * hh)

        return (4 * central(step / 2) - central(step)) / 3
    raise ValueError(f"unknown method {method!r}")


def hamiltonian_coefficients(params: ModelParams) -> tuple[complex, complex]:
    """(alpha, beta) with H = alpha t'(1) + beta I."""
    q, N = params.q, params.N
    wq, wq2 = omega(q), omega(q * q)
    if abs(wq) < 1e-13 or abs(wq2) < 1e-13:
        raise SingularParameterError("omega(q) or omega(q^2) vanishes")
    alpha = -1 / (4 * wq2 * wq ** (2 * N - 2))
    beta = wq / wq2 - N / 2 * wq2 / wq
    return alpha, beta


def hamiltonian_from_transfer(params: ModelParams, method: Literal["analytic", "finite_difference"] = "analytic") -> float:
    """Relative residual of alpha t'(1) + beta I - H."""
    from .model import build_hamiltonian

    if params.N < 2:
        raise ValueError("needs N >= 2")
    alpha, beta = hamiltonian_coefficients(params)
    dt = transfer_derivative_at_one(params, method)
    H = build_hamiltonian(params)
    H = H.toarray() if hasattr(H, "toarray") else H
    return rel_residual(alpha * dt + beta * np.eye(params.dim), H)


# -- joint-space checks ----------------------------------------------------

def _embed_aux(T: np.ndarray, slot: int) -> np.ndarray:
    """Operator-valued auxiliary matrix placed in aux slot 1 or 2 of V1 (x) V2 (x) H."""
    D = T.shape[-1]
    if slot == 1:
        big = np.einsum("abij,xy->axibyj", T, I3)
    else:
        big = np.einsum("xy,abij->xaiybj", I3, T)
    return big.reshape(9 * D, 9 * D)


def _embed_R(R: np.ndarray, D: int) -> np.ndarray:
    return np.kron(R, np.eye(D))


def check_rtt(u: complex, v: complex, params: ModelParams) -> float:
    """R12(u/v) T1(u) T2(v) = T2(v) T1(u) R12(u/v) on the (9 D)-dim joint space."""
    D = params.dim
    R = _embed_R(build_R(u / v, params), D)
    T1 = _embed_aux(build_T(u, params), 1)
    T2 = _embed_aux(build_T(v, params), 2)
    return rel_residual(R @ T1 @ T2, T2 @ T1 @ R)


def check_reflection_equation(u: complex, v: complex, params: ModelParams) -> float:
    """R12(u/v) U1(u) R21(uv) U2(v) = U2(v) R12(uv) U1(u) R21(u/v)."""
    D = params.dim
    Ru_v = build_R(u / v, params)
    Ruv = build_R(u * v, params)
    U1 = _embed_aux(build_U_matrix(u, params), 1)
    U2 = _embed_aux(build_U_matrix(v, params), 2)
    lhs = _embed_R(Ru_v, D) @ U1 @ _embed_R(swap(Ruv), D) @ U2
    rhs = U2 @ _embed_R(Ruv, D) @ U1 @ _embed_R(swap(Ru_v), D)
    return rel_residual(lhs, rhs)


def _sum_terms(terms):
    return sum(terms[1:], terms[0])


def _rel_terms(lhs, terms) -> float:
    """Residual of lhs = sum(terms), normalised by the largest participating norm."""
    rhs = _sum_terms(terms)
    scale = max([np.linalg.norm(lhs), 1.0] + [np.linalg.norm(t) for t in terms])
    return float(np.linalg.norm(lhs - rhs) / scale)


def check_exchange_relations(u: complex, v: complex, params: ModelParams,
                             side: Literal["B", "C"] = "B",
                             cache: BlockCache | None = None) -> dict[str, float]:
    """Residuals of the five B-side (or C-side) exchange relations at (u, v)."""
    cache = cache or BlockCache(params)
    c = Coefficients(params)
    U, V = cache(u), cache(v)
    Q2 = params.Q**2
    fu = {k: getattr(c, k)(u, v) for k in ("f", "f1", "f2", "f3", "h", "h1", "h2", "h3")}
    aQ = c.a(u) / Q2
    if side == "B":
        return {
            "AB": _rel_terms(U.A @ V.B, [fu["f"] * V.B @ U.A, fu["f1"] * U.B @ V.A, fu["f2"] * U.B @ V.D,
                                         fu["f3"] * U.B @ V.E, -U.B1 @ V.B2]),
            "DB": _rel_terms(U.D @ V.B, [fu["h"] * V.B @ U.D, fu["h1"] * U.B @ V.D, fu["h2"] * U.B @ V.A,
                                         fu["h3"] * U.B @ V.E, aQ * U.B1 @ V.B2, -U.E @ V.B / Q2]),
            "BB": _rel_terms(U.B @ V.B, [V.B @ U.B]),
            "BB1": _rel_terms(U.B @ V.B1, [V.B @ U.B1]),
            "BE": _rel_terms(U.B @ V.E, [V.B @ U.E]),
        }
    if side == "C":
        return {
            "CA": _rel_terms(V.C @ U.A, [fu["f"] * U.A @ V.C, fu["f1"] * V.A @ U.C, fu["f2"] * V.D @ U.C,
                                         fu["f3"] * V.E @ U.C, -V.C2 @ U.C1]),
            "CD": _rel_terms(V.C @ U.D, [fu["h"] * U.D @ V.C, fu["h1"] * V.D @ U.C, fu["h2"] * V.A @ U.C,
                                         fu["h3"] * V.E @ U.C, aQ * V.C2 @ U.C1, -V.C @ U.E / Q2]),
            "CC": _rel_terms(V.C @ U.C, [U.C @ V.C]),
            "C1C": _rel_terms(V.C1 @ U.C, [U.C1 @ V.C]),
            "EC": _rel_terms(V.E @ U.C, [U.E @ V.C]),
        }
    raise ValueError(f"unknown side {side!r}")


def check_cb_commutation(u1: complex, v1: complex, params: ModelParams,
                         x6_shift: complex = 0.0, cache: BlockCache | None = None) -> float:
    """Residual of the C(u1) B(v1) commutation relation with its A/D/E quadratic terms."""
    cache = cache or BlockCache(params)
    c = Coefficients(params)
    U, V = cache(u1), cache(v1)
    x = [None] + [getattr(c, f"x{k}")(u1, v1) for k in range(1, 7)]
    x[6] += x6_shift
    y = [None] + [getattr(c, f"y{k}")(u1, v1) for k in range(1, 4)]
    terms = [
        V.B @ U.C,
        x[1] * U.A @ V.A, x[2] * V.A @ U.A, x[3] * U.D @ V.A,
        x[4] * U.A @ V.D, x[5] * V.A @ U.D, x[6] * U.D @ V.D,
        y[1] * V.A @ U.E, y[2] * U.E @ V.A, y[3] * U.E @ V.D,
        V.B1 @ U.C1, -U.C2 @ V.B2,
    ]
    return _rel_terms(U.C @ V.B, terms)


def reference_state_report(u: complex, params: ModelParams) -> dict[str, float]:
    """Residuals of the reference-state relations for T, T^ and the double-row blocks."""
    c = Coefficients(params)
    T, Th = build_T(u, params), build_That(u, params)
    zero = reference_state(params)
    bra = zero.conj()
    out = {}
    lower = max(max(np.linalg.norm(X[i, j] @ zero) for i in range(3) for j in range(i))
                for X in (T, Th))
    out["T_lower"] = float(lower)
    diag_vals = (omega(params.q * u) ** params.N, 0.0, omega(u) ** params.N)
    out["T_diag"] = max(rel_residual(X[k, k] @ zero, diag_vals[k] * zero) for X in (T, Th) for k in range(3))
    y = c.y(u)
    t11 = T[0, 0] @ Th[0, 0] @ zero
    t33 = T[2, 2] @ Th[2, 2] @ zero
    out["composite"] = max(
        rel_residual(T[1, 0] @ Th[0, 1] @ zero, t11),
        rel_residual(T[2, 1] @ Th[1, 2] @ zero, t33 / params.Q**2),
        rel_residual(T[2, 0] @ Th[0, 2] @ zero, y * t11 - (params.Q**-2 + y) * t33),
        rel_residual(T[0, 0] @ Th[0, 1] @ zero, 0 * zero),
    )
    b = build_U(u, params)
    L1, L2, d = c.Lambda1(u), c.Lambda2(u), c.d(u)
    Q2 = params.Q**2
    out["blocks_right"] = max(
        rel_residual(b.A @ zero, L1 * zero), rel_residual(b.D @ zero, d * L2 / Q2 * zero),
        *(rel_residual(b[n] @ zero, 0 * zero) for n in ("E", "C", "C1", "C2", "B1")),
    )
    out["blocks_left"] = max(
        rel_residual(bra @ b.A, L1 * bra), rel_residual(bra @ b.D, d * L2 / Q2 * bra),
        *(rel_residual(bra @ b[n], 0 * bra) for n in ("E", "B", "B1", "B2", "C1")),
    )
    return out
