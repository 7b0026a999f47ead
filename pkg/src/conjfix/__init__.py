"""Generalized conjugations on finite sets and their self-conjugate fixed points."""
from .core import (
    CouplingMatrix,
    Membership,
    conjugate1,
    conjugate2,
    diag_halves,
    indicator,
    is_in_H,
    max_conjugate,
    sym_conjugate,
    symmetrize,
)
from .errors import ConjfixError, ContractError, InvariantViolation, PreconditionError, ResourceError
from .extreal import INF, NEG_INF, ZERO, ExtReal
from .fitzpatrick import (
    OperatorSample,
    ProductGrid,
    build_grid_coupling,
    delta_T_plus_pi,
    duality_product,
    fitzpatrick_grid,
    fitzpatrick_value,
    ft_membership_grid,
    j_transform_grid,
    monotonicity_check,
    pi_grid,
    self_conjugate_representer,
)
from .fixpoint import (
    DescentConfig,
    FixpointResult,
    descent_step,
    fixed_point_gap,
    minimality_probe,
    solve_fixpoint,
    solve_from_below,
    triple_conjugate_residual,
)
from .nonsymmetric import (
    counterexample_fixture,
    fixed_point_implies_minimal_check,
    general_minimal,
    membership_equivalence,
    subdifferential_check,
    subdifferential_check_approx,
)
from .valuation import Valuation

__all__ = [
    "build_grid_coupling",
    "ConjfixError",
    "conjugate1",
    "conjugate2",
    "ContractError",
    "counterexample_fixture",
    "CouplingMatrix",
    "delta_T_plus_pi",
    "descent_step",
    "DescentConfig",
    "diag_halves",
    "duality_product",
    "ExtReal",
    "fitzpatrick_grid",
    "fitzpatrick_value",
    "fixed_point_gap",
    "fixed_point_implies_minimal_check",
    "FixpointResult",
    "ft_membership_grid",
    "general_minimal",
    "indicator",
    "INF",
    "InvariantViolation",
    "is_in_H",
    "j_transform_grid",
    "max_conjugate",
    "Membership",
    "membership_equivalence",
    "minimality_probe",
    "monotonicity_check",
    "NEG_INF",
    "OperatorSample",
    "pi_grid",
    "PreconditionError",
    "ProductGrid",
    "ResourceError",
    "self_conjugate_representer",
    "solve_fixpoint",
    "solve_from_below",
    "subdifferential_check",
    "subdifferential_check_approx",
    "sym_conjugate",
    "symmetrize",
    "triple_conjugate_residual",
    "Valuation",
    "ZERO",
]
