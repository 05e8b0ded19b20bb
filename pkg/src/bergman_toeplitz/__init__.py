"""Truncated Toeplitz operators on weighted Bergman spaces of the ball and matrix ball.

Submodules: ``domains``, ``quadrature``, ``basis``, ``symbols``, ``toeplitz``,
``group``, ``multiplicity``, ``experiments``, ``reports`` and ``cli``.
"""
from .basis import (BasisError, BergmanBasis, bergman_basis, bergman_project, gram_matrix,
                    kernel_eval, monomial_norm, orthonormal_basis)
from .domains import (Domain, DomainError, MultiIndex, as_points, contains, density_unnormalized,
                      disk, make_domain, matrix_ball, multi_index_enumerate, unit_ball)
from .group import (GroupElement, GroupError, Subgroup, average_operator, average_symbol,
                    hyperbolic_subgroup, intertwine_defect, invariance_defect, jacobian_factor,
                    maximal_compact_subgroup, mobius_apply, parabolic_subgroup, pi_lambda_matrix,
                    pkp_assemble, pkp_factorize, real_form_subgroup, rotation_subgroup,
                    subgroup_from_name, torus_subgroup)
from .multiplicity import (CensusReport, Weight, algebra_is_commutative, commutant_basis,
                           is_multiplicity_free_torus, torus_generators, weight_census, weight_of)
from .quadrature import (Estimate, QuadratureError, QuadratureRule, ball_radial_rule, haar_rule,
                         hyperbolic_grid_rule, integrate, mc_sample, radial_rule, torus_rule)
from .symbols import (Symbol, SymbolError, constant, hyperbolic_arc, k_invariant, oracle,
                      parabolic, radial, real_form, symbol_eval, torus_invariant)
from .toeplitz import (OperatorMatrix, ToeplitzError, commutator_norm, commutator_study,
                       toeplitz_matrix)

__version__ = "0.1.0"
