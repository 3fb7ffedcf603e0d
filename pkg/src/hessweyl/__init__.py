"""Hessian rank strata, Weyl-differenced counts and circle-method diagnostics for integer forms."""
from .errors import (BadPrimeError, BudgetExceeded, FormParseError, HessWeylError, NoFullRankMinor,
                     VerificationFailed)
from .forms import (FormSystem, HomogeneousForm, ZeroForm, evaluate, format_form, gamma_eval,
                    gamma_via_polarization, gradient, hessian_entry, hessian_matrix, parse_form,
                    partial, symmetric_coeff)
from .linalg import (IntegerMatrix, KernelBasis, adjugate, count_kernel_points_in_box, determinant,
                     kernel_basis, rank_mod_p, rank_rational)
from .strata import (DEFAULT_PRIMES, DimensionEstimate, HessianReport, PencilReport, hessian_invariant,
                     pencil_sigma, singular_locus_dim, stratum_count_mod_p)
from .weyl import (WeylCountReport, fit_weyl_exponent, gamma_zero_count_naive,
                   gamma_zero_count_stratified)
from .circle import (Box, DichotomyResult, ExpSumParams, RationalApprox, build_M_matrix,
                     dichotomy_check, exp_sum, rational_approx_from_minor, weyl_solution_set)
from .counting import (CountFit, count_zeros_box, count_zeros_split, fit_leading_term,
                       singular_integral, truncated_singular_series)
from .families import ExampleSpec, example1_form, example2_form, verify_example

__version__ = "0.1.0"

__all__ = [
    "BadPrimeError", "BudgetExceeded", "FormParseError", "HessWeylError", "NoFullRankMinor",
    "VerificationFailed",
    "FormSystem", "HomogeneousForm", "ZeroForm", "evaluate", "format_form", "gamma_eval",
    "gamma_via_polarization", "gradient", "hessian_entry", "hessian_matrix", "parse_form",
    "partial", "symmetric_coeff",
    "IntegerMatrix", "KernelBasis", "adjugate", "count_kernel_points_in_box", "determinant",
    "kernel_basis", "rank_mod_p", "rank_rational",
    "DEFAULT_PRIMES", "DimensionEstimate", "HessianReport", "PencilReport", "hessian_invariant",
    "pencil_sigma", "singular_locus_dim", "stratum_count_mod_p",
    "WeylCountReport", "fit_weyl_exponent", "gamma_zero_count_naive", "gamma_zero_count_stratified",
    "Box", "DichotomyResult", "ExpSumParams", "RationalApprox", "build_M_matrix", "dichotomy_check",
    "exp_sum", "rational_approx_from_minor", "weyl_solution_set",
    "CountFit", "count_zeros_box", "count_zeros_split", "fit_leading_term", "singular_integral",
    "truncated_singular_series",
    "ExampleSpec", "example1_form", "example2_form", "verify_example",
]
