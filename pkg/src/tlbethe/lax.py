"""Baxterized TL R-matrix and its Yang-Baxter / unitarity checks."""

from __future__ import annotations

import numpy as np

from .model import ModelParams, SingularParameterError, build_X, omega, rel_residual

I3 = np.eye(3)


def build_P() -> np.ndarray:
    """Permutation on C^3 (x) C^3."""
    P = np.zeros((9, 9), dtype=complex)
    for a in range(3):
        for b in range(3):
            P[a * 3 + b, b * 3 + a] = 1
    return P


P9 = build_P()


def build_R(u: complex, params: ModelParams, X: np.ndarray | None = None) -> np.ndarray:
    """R(u) = omega(q u) P + omega(u) P X.  ``X`` may be replaced for negative controls."""
    if u == 0:
        raise SingularParameterError("R(u) requires u != 0")
    X = build_X(params) if X is None else X
    return omega(params.q * u) * P9 + omega(u) * (P9 @ X)


def build_dR(u: complex, params: ModelParams) -> np.ndarray:
    """Derivative dR/du, using d omega(k u)/du = k + 1/(k u^2)."""
    q = params.q
    X = build_X(params)
    return (q + 1 / (q * u * u)) * P9 + (1 + 1 / (u * u)) * (P9 @ X)


def swap(R: np.ndarray) -> np.ndarray:
    """R_21 = P R_12 P."""
    return P9 @ R @ P9


def zeta(u: complex, params: ModelParams) -> complex:
    q = params.q
    return omega(u / q) * omega(1 / (u * q))


def _triple(R: np.ndarray, where: str) -> np.ndarray:
    R12 = np.kron(R, I3)
    if where == "12":
        return R12
    if where == "23":
        return np.kron(I3, R)
    P23 = np.kron(I3, P9)
    return P23 @ R12 @ P23


def check_yang_baxter(u: complex, v: complex, params: ModelParams,
                      X: np.ndarray | None = None) -> float:
    """Relative residual of R12(u/v) R13(u) R23(v) = R23(v) R13(u) R12(u/v)."""
    if u == 0 or v == 0:
        raise SingularParameterError("Yang-Baxter check needs u, v != 0")
    R12 = _triple(build_R(u / v, params, X), "12")
    R13 = _triple(build_R(u, params, X), "13")
    R23 = _triple(build_R(v, params, X), "23")
    return rel_residual(R12 @ R13 @ R23, R23 @ R13 @ R12)


def check_unitarity(u: complex, params: ModelParams) -> float:
    """Relative residual of R12(u) R21(1/u) = zeta(u) I."""
    lhs = build_R(u, params) @ swap(build_R(1 / u, params))
    return rel_residual(lhs, zeta(u, params) * np.eye(9))


def partial_transpose_both(R: np.ndarray) -> np.ndarray:
    """R^{t1 t2}: transposing both tensor factors is the full transpose."""
    return R.T
