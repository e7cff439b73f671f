import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given

from conftest import deformations, make_params
from tlbethe.model import (Branch, ModelParams, build_hamiltonian, build_X, build_X_general, biquadratic_X,
                           check_tl_relations, derive_q, embed_generator, omega, relation_residual, spin1_matrices)

# sympy solution of 1 + Q^2 + Q^-2 = -(q + 1/q) at Q = 11/10
Q_11_ROOTS = (-2.6605897648057412, -0.37585651618599437)


def test_omega_values():
    assert omega(2.0) == pytest.approx(1.5)
    assert omega(1j) == pytest.approx(2j)
    with pytest.raises(ValueError):
        omega(0)


def test_derive_q_frozen_roots():
    assert derive_q(1.1, "plus") == pytest.approx(Q_11_ROOTS[0], abs=1e-14)
    assert derive_q(1.1, "minus") == pytest.approx(Q_11_ROOTS[1], abs=1e-14)


@given(deformations())
def test_branches_are_reciprocal(Q):
    try:
        qp, qm = derive_q(Q, Branch.PLUS), derive_q(Q, Branch.MINUS)
    except ValueError:
        return
    assert abs(qp * qm - 1) < 1e-10
    assert abs(qp) >= abs(qm) - 1e-12
    assert relation_residual(ModelParams(3, Q)) < 1e-13


def test_params_reject_bad_input():
    with pytest.raises(ValueError, match="ModelParams invariant violated"):
        ModelParams(3, 0)
    with pytest.raises(ValueError):
        ModelParams(0, 1.1)
    with pytest.raises(ValueError):
        ModelParams(3, 1.1, tol_identity=-1)
    # c = 2 makes q = -1 a double root
    with pytest.raises(ValueError):
        ModelParams(3, np.exp(1j * np.pi / 6))


def test_params_frozen_and_with():
    p = ModelParams(3, 1.1)
    with pytest.raises(AttributeError):
        p.N = 4
    p2 = p.with_(N=4)
    assert p2.N == 4 and p2.Q == p.Q and p2.q == p.q


def test_X_literal_matches_general_formula():
    for Q in (1.1, 0.7 + 0.3j, 1.9j):
        assert np.allclose(build_X(Q), build_X_general(Q, 1), atol=1e-15)


def test_X_is_rank_one_with_loop_weight():
    p = ModelParams(2, 1.3 - 0.2j)
    X = build_X(p)
    assert np.linalg.matrix_rank(X) == 1
    assert np.allclose(X @ X, p.c * X, atol=1e-13)
    assert np.trace(X) == pytest.approx(p.c)


def test_biquadratic_limit_entrywise():
    assert np.max(np.abs(build_X(1.0) - biquadratic_X())) < 1e-13


def test_spin1_algebra():
    Sx, Sy, Sz = spin1_matrices()
    assert np.allclose(Sx @ Sy - Sy @ Sx, 1j * Sz)
    assert np.allclose(Sx @ Sx + Sy @ Sy + Sz @ Sz, 2 * np.eye(3))


@given(deformations())
def test_tl_relations_random_Q(Q):
    for N in (3, 4):
        p = make_params(N, Q)
        assert max(check_tl_relations(p).values()) < 1e-12


def test_tl_wrong_loop_weight_fails():
    p = ModelParams(3, 1.1)
    assert check_tl_relations(p, c=p.c + 0.1)["idempotency"] > 1e-3


def test_hamiltonian_N2_spectrum():
    # H = X for two sites: eigenvalues c (once) and 0 (eight times)
    p = ModelParams(2, 1.1)
    ev = np.sort_complex(np.linalg.eigvals(build_hamiltonian(p)))
    expected = np.sort_complex(np.array([0] * 8 + [1 + 1.1**2 + 1.1**-2], dtype=complex))
    assert np.allclose(ev, expected, atol=1e-12)


def test_sparse_switch():
    H = build_hamiltonian(ModelParams(7, 1.1))
    assert sp.issparse(H) and H.shape == (3**7, 3**7)
    assert isinstance(embed_generator(1, ModelParams(3, 1.1)), np.ndarray)
    with pytest.raises(IndexError):
        embed_generator(3, ModelParams(3, 1.1))
