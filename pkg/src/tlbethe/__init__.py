"""Algebraic Bethe ansatz for the open spin-1 Temperley-Lieb chain."""

from .bethe import (BetheSolution, RapiditySet, bethe_vector, check_action_identity, dual_bethe_vector, eigenvalue,
                    m1_closed_form_roots, offshell_residual, solve_bethe, verify_against_ed)
from .coefficients import Coefficients
from .lax import build_P, build_R, check_unitarity, check_yang_baxter
from .model import Branch, ModelParams, SingularParameterError, build_hamiltonian, build_X, derive_q, omega
from .monodromy import (DoubleRowBlocks, build_T, build_That, build_U, check_exchange_relations, check_reflection_equation,
                        check_rtt, transfer_matrix)
from .scalar_product import (SlavnovInput, check_c2_annihilation, check_m1_expansion, direct_scalar_product,
                             slavnov_formula)

__version__ = "0.1.0"
