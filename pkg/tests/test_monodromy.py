import numpy as np
import pytest
from hypothesis import given, settings

from conftest import draw_spectral, spectral
from tlbethe.coefficients import Coefficients
from tlbethe.model import ModelParams, SingularParameterError, build_hamiltonian, rel_residual
from tlbethe.monodromy import (BlockCache, DoubleRowAction, apply_transfer, build_T, build_That, build_U,
                               build_U_matrix, check_cb_commutation, check_exchange_relations,
                               check_reflection_equation, check_rtt, hamiltonian_coefficients,
                               hamiltonian_from_transfer, reference_state, reference_state_report,
                               transfer_derivative_at_one, transfer_matrix)

B_KEYS = {"AB", "DB", "BB", "BB1", "BE"}
C_KEYS = {"CA", "CD", "CC", "C1C", "EC"}


@pytest.mark.parametrize("N", [1, 2, 3])
def test_monodromy_shapes(N):
    p = ModelParams(N, 1.1)
    assert build_T(0.8 + 0.2j, p).shape == (3, 3, 3**N, 3**N)
    assert build_That(0.8 + 0.2j, p).shape == (3, 3, 3**N, 3**N)


def test_single_site_T_is_lax_operator():
    from tlbethe.lax import build_R
    from tlbethe.monodromy import lax_entries
    p = ModelParams(1, 0.9)
    assert np.allclose(build_T(1.2, p), lax_entries(build_R(1.2, p)))


@pytest.mark.parametrize("N", [2, 3])
def test_rtt_and_reflection(N, rng, branch):
    p = ModelParams(N, 1.1, branch)
    for _ in range(3):
        u, v = draw_spectral(rng), draw_spectral(rng)
        assert check_rtt(u, v, p) < 1e-10
        assert check_reflection_equation(u, v, p) < 1e-10


@settings(max_examples=10)
@given(spectral())
def test_blocks_reconstruct_U(u):
    p = ModelParams(2, 1.1 - 0.2j)
    b = build_U(u, p)
    assert rel_residual(b.reconstruct(), build_U_matrix(u, p)) < 1e-14
    assert b["B"] is b.B


@pytest.mark.parametrize("N", [2, 3])
def test_reference_state_relations(N):
    rep = reference_state_report(0.9 + 0.35j, ModelParams(N, 1.1))
    assert max(rep.values()) < 1e-12


def test_action_matches_dense_blocks(rng):
    p = ModelParams(3, 1.1)
    u = draw_spectral(rng)
    b, act = build_U(u, p), DoubleRowAction(u, p)
    v = rng.normal(size=p.dim) + 1j * rng.normal(size=p.dim)
    for name in ("A", "B", "B1", "B2", "C", "C1", "C2", "D", "E"):
        assert rel_residual(act.right(name, v), b[name] @ v) < 1e-13
        assert rel_residual(act.left(name, v), v @ b[name]) < 1e-13


@pytest.mark.parametrize("N", [2, 3, 4])
def test_transfer_methods_agree(N, rng):
    p = ModelParams(N, 1.1 + 0.15j)
    u = draw_spectral(rng)
    t = transfer_matrix(u, p, "trace")
    assert rel_residual(transfer_matrix(u, p, "blocks"), t) < 1e-12
    assert rel_residual(transfer_matrix(u, p, "matrix_free"), t) < 1e-12
    v = rng.normal(size=p.dim) + 0j
    assert rel_residual(apply_transfer(u, p, v), t @ v) < 1e-12


@pytest.mark.parametrize("N", [2, 3, 4])
def test_commutativity(N, rng):
    p = ModelParams(N, 1.1)
    for _ in range(3):
        u, v = draw_spectral(rng), draw_spectral(rng)
        tu, tv = transfer_matrix(u, p), transfer_matrix(v, p)
        assert rel_residual(tu @ tv, tv @ tu) < 1e-10


def test_commutativity_negative_control(rng):
    # transfer matrices of different deformations do not commute
    u, v = draw_spectral(rng), draw_spectral(rng)
    tu, tv = transfer_matrix(u, ModelParams(3, 1.1)), transfer_matrix(v, ModelParams(3, 0.7))
    assert rel_residual(tu @ tv, tv @ tu) > 1e-3


def test_reference_state_eigenvalue():
    p = ModelParams(3, 1.1)
    c = Coefficients(p)
    u = 0.8 - 0.45j
    zero = reference_state(p)
    lam = c.eigenvalue(u, [])
    assert rel_residual(transfer_matrix(u, p) @ zero, lam * zero) < 1e-13


@pytest.mark.parametrize("N", [2, 3, 4])
def test_hamiltonian_recovery(N):
    p = ModelParams(N, 1.1)
    assert hamiltonian_from_transfer(p, "analytic") < 1e-11
    dt_a = transfer_derivative_at_one(p, "analytic")
    dt_f = transfer_derivative_at_one(p, "finite_difference")
    assert rel_residual(dt_f, dt_a) < 1e-7


def test_hamiltonian_wrong_normalisation_fails():
    p = ModelParams(3, 1.1)
    alpha, beta = hamiltonian_coefficients(p)
    dt = transfer_derivative_at_one(p)
    H = build_hamiltonian(p)
    assert rel_residual(1.01 * alpha * dt + beta * np.eye(p.dim), H) > 1e-3


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("side,keys", [("B", B_KEYS), ("C", C_KEYS)])
def test_exchange_relations(N, side, keys, rng, branch):
    p = ModelParams(N, 1.1, branch)
    cache = BlockCache(p)
    for _ in range(3):
        res = check_exchange_relations(draw_spectral(rng), draw_spectral(rng), p, side, cache)
        assert set(res) == keys
        assert max(res.values()) < 1e-10


@pytest.mark.parametrize("N", [2, 3])
def test_cb_commutation(N, rng):
    p = ModelParams(N, 1.1)
    u, v = draw_spectral(rng), draw_spectral(rng)
    assert check_cb_commutation(u, v, p) < 1e-10
    assert check_cb_commutation(u, v, p, x6_shift=0.1) > 1e-6


def test_singular_point_rejected():
    p = ModelParams(2, 1.1)
    u = complex(np.sqrt(1 / p.q))
    with pytest.raises(SingularParameterError):
        build_U(u, p)
