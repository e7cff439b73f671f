"""Model parameters, the TL generator X and the open-chain Hamiltonian.

Local basis: three states per site, indexed 0, 1, 2.  The generator X is
stored literally as the 9x9 matrix of the spin-1 TL representation; under
the general (2s+1)^2 formula that literal layout corresponds to index = m + s
(m = -1 first).  Tensor factors are ordered with site 1 slowest.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce

import numpy as np
import scipy.sparse as sp

# dim 3^N at or above this switches the Hamiltonian to sparse storage
DENSE_DIM_LIMIT = 1000


class SingularParameterError(ValueError):
    """A spectral parameter or rapidity hits a zero of a required denominator."""


class Branch(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


def omega(u: complex) -> complex:
    """Return u - 1/u."""
    if u == 0:
        raise SingularParameterError("omega(u) requires u != 0")
    return u - 1.0 / u


def derive_q(Q: complex, branch: Branch | str = Branch.PLUS) -> complex:
    """Solve 1 + Q^2 + Q^-2 = -(q + 1/q) for q.

    PLUS picks the root with |q| >= 1 (ties: larger real part), MINUS the other.
    """
    Q = complex(Q)
    if Q == 0:
        raise ValueError("Q must be nonzero")
    branch = Branch(branch)
    c = 1 + Q**2 + Q**-2
    disc = cmath.sqrt(c * c - 4)
    r1 = (-c + disc) / 2
    r2 = (-c - disc) / 2
    if abs(r1 - r2) < 1e-7 * max(1.0, abs(c)):
        raise ValueError(f"Q={Q} gives the double root q={r1:.6g}; omega(q) vanishes")
    # order (big, small) by modulus, ties broken by real part
    if (abs(r1), r1.real) >= (abs(r2), r2.real):
        big, small = r1, r2
    else:
        big, small = r2, r1
    return big if branch is Branch.PLUS else small


@dataclass(frozen=True)
class ModelParams:
    """Single source of truth for the chain: sites, deformation, tolerances.

    ``q`` is derived from ``Q`` on construction; it can be pinned explicitly
    (``q_override``) for negative-control experiments only.
    """

    N: int
    Q: complex
    branch: Branch = Branch.PLUS
    tol_identity: float = 1e-9
    tol_derivative: float = 1e-5
    rng_seed: int = 0
    q: complex = field(init=False)

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        Q = complex(self.Q)
        if Q == 0:
            raise ValueError("ModelParams invariant violated: Q must be nonzero")
        if self.tol_identity <= 0 or self.tol_derivative <= 0:
            raise ValueError("tolerances must be positive")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "branch", Branch(self.branch))
        q = derive_q(Q, self.branch)
        # c = +-2 gives q = -+1 up to rounding of order sqrt(eps)
        if abs(q) == 0 or abs(q - 1 / q) < 1e-7:
            raise ValueError(f"ModelParams invariant violated: q={q} must avoid 0, +1, -1")
        object.__setattr__(self, "q", q)

    @property
    def c(self) -> complex:
        """Loop weight -(q + 1/q) = 1 + Q^2 + Q^-2."""
        return -(self.q + 1 / self.q)

    @property
    def dim(self) -> int:
        return 3**self.N

    def with_(self, **changes) -> "ModelParams":
        kw = dict(N=self.N, Q=self.Q, branch=self.branch, tol_identity=self.tol_identity,
                  tol_derivative=self.tol_derivative, rng_seed=self.rng_seed)
        kw.update(changes)
        return ModelParams(**kw)


def relation_residual(params: ModelParams) -> float:
    """Relative error of 1 + Q^2 + Q^-2 = -(q + 1/q)."""
    Q, q = params.Q, params.q
    lhs = 1 + Q**2 + Q**-2
    rhs = -(q + 1 / q)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


def build_X(params: ModelParams | complex) -> np.ndarray:
    """The 9x9 spin-1 TL generator, entered literally."""
    Q = params.Q if isinstance(params, ModelParams) else complex(params)
    X = np.zeros((9, 9), dtype=complex)
    idx = (2, 4, 6)
    block = np.array([
        [Q**-2, -1 / Q, 1],
        [-1 / Q, 1, -Q],
        [1, -Q, Q**2],
    ])
    X[np.ix_(idx, idx)] = block
    return X


def build_X_general(Q: complex, s: float = 1) -> np.ndarray:
    """TL generator from the general spin-s matrix-element formula.

    Basis index for a spin projection m is m + s, so for s=1 the result is
    directly comparable with :func:`build_X`.
    """
    d = int(round(2 * s + 1))
    ms = [-s + k for k in range(d)]
    X = np.zeros((d * d, d * d), dtype=complex)
    for i1, m1 in enumerate(ms):
        for i2, m2 in enumerate(ms):
            if m1 + m2 != 0:
                continue
            for j1, n1 in enumerate(ms):
                for j2, n2 in enumerate(ms):
                    if n1 + n2 != 0:
                        continue
                    X[i1 * d + i2, j1 * d + j2] = (-1) ** int(round(m1 - n1)) * Q ** (m1 + n1)
    return X


def spin1_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """S^x, S^y, S^z for spin 1 in the basis m = +1, 0, -1."""
    r = 1 / np.sqrt(2)
    Sx = r * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    Sy = r * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
    Sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return Sx, Sy, Sz


def biquadratic_X() -> np.ndarray:
    """(S.S)^2 - I on two spin-1 sites."""
    SS = sum(np.kron(S, S) for S in spin1_matrices())
    return SS @ SS - np.eye(9)


def _use_sparse(params: ModelParams) -> bool:
    return params.dim >= DENSE_DIM_LIMIT


def embed_generator(i: int, params: ModelParams, X: np.ndarray | None = None):
    """X acting on sites i, i+1 (1-based) of the N-site chain."""
    N = params.N
    if not 1 <= i <= N - 1:
        raise IndexError(f"generator index {i} outside 1..{N - 1}")
    X = build_X(params) if X is None else X
    left, right = 3 ** (i - 1), 3 ** (N - i - 1)
    if _use_sparse(params):
        return sp.kron(sp.kron(sp.identity(left, format="csr"), sp.csr_matrix(X)),
                       sp.identity(right, format="csr"), format="csr")
    return np.kron(np.kron(np.eye(left), X), np.eye(right))


def build_hamiltonian(params: ModelParams, X: np.ndarray | None = None):
    """H = sum_i X_(i); dense below dim 1000, scipy CSR above."""
    if params.N < 2:
        raise ValueError("the Hamiltonian needs N >= 2")
    X = build_X(params) if X is None else X
    terms = [embed_generator(i, params, X) for i in range(1, params.N)]
    return reduce(lambda a, b: a + b, terms)


def rel_residual(lhs, rhs) -> float:
    """||lhs - rhs||_F / max(||lhs||_F, ||rhs||_F, 1)."""
    lhs = lhs.toarray() if sp.issparse(lhs) else np.asarray(lhs)
    rhs = rhs.toarray() if sp.issparse(rhs) else np.asarray(rhs)
    scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs), 1.0)
    return float(np.linalg.norm(lhs - rhs) / scale)


def check_tl_relations(params: ModelParams, c: complex | None = None) -> dict[str, float]:
    """Max residuals of the three TL relations over all generator pairs.

    ``c`` overrides the loop weight (negative controls).
    """
    if params.N < 3:
        raise ValueError("TL relation check needs N >= 3")
    c = params.c if c is None else c
    gens = [np.asarray(g.toarray() if sp.issparse(g) else g)
            for g in (embed_generator(i, params) for i in range(1, params.N))]
    idem = braid = comm = 0.0
    for i, Xi in enumerate(gens):
        idem = max(idem, rel_residual(Xi @ Xi, c * Xi))
        for j, Xj in enumerate(gens):
            if abs(i - j) == 1:
                braid = max(braid, rel_residual(Xi @ Xj @ Xi, Xi))
            elif abs(i - j) > 1:
                comm = max(comm, rel_residual(Xi @ Xj, Xj @ Xi))
    return {"idempotency": idem, "braid": braid, "commutation": comm}
