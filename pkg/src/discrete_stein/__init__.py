"""Discrete Stein characterizations, information functionals and Poisson TV bounds."""

from .bounds import (
    BoundReport,
    d_H,
    h1_constant,
    h2_constant,
    khj_tv_bound,
    optimal_tv_test_function,
    stein_factor_sup_1,
    stein_factor_sup_2,
    stein_magic_H,
    tv_bound_k1,
    tv_bound_k2,
    tv_distance,
)
from .errors import DomainError, ParameterError, PreconditionError, SteinError
from .information import (
    IdentityReport,
    ScoreField,
    factorization_check_1,
    identity_check_1,
    identity_check_2,
    jm_fisher_information,
    k1_scaled_fisher,
    k1_subadditive_bound,
    k2_discrete_fisher,
    r1_score,
    r2_score,
)
from .pmf import (
    Pmf,
    RealFunctionOnZ,
    Support,
    convolve,
    convolve_n,
    expectation,
    make_bernoulli,
    make_binomial,
    make_geometric,
    make_poisson,
    pmf_from_probs,
    point_mass,
    read_pmf,
    write_pmf,
)
from .repro import ExampleRow, ex1_bernoulli, ex2_mu_sqrt_n, ex3_geometric
from .stein import (
    ParametricFamily,
    TestFunction,
    canonical_f_z,
    geometric_family,
    p_tilde,
    poisson_family,
    stein_solution_1,
    stein_solution_2,
    t1_apply,
    t2_apply,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "ParameterError",
    "PreconditionError",
    "SteinError",
    "ExampleRow",
    "ex1_bernoulli",
    "ex2_mu_sqrt_n",
    "ex3_geometric",
    "BoundReport",
    "d_H",
    "h1_constant",
    "h2_constant",
    "khj_tv_bound",
    "optimal_tv_test_function",
    "stein_factor_sup_1",
    "stein_factor_sup_2",
    "stein_magic_H",
    "tv_bound_k1",
    "tv_bound_k2",
    "tv_distance",
    "IdentityReport",
    "ScoreField",
    "factorization_check_1",
    "identity_check_1",
    "identity_check_2",
    "jm_fisher_information",
    "k1_scaled_fisher",
    "k1_subadditive_bound",
    "k2_discrete_fisher",
    "r1_score",
    "r2_score",
    "Pmf",
    "RealFunctionOnZ",
    "Support",
    "convolve",
    "convolve_n",
    "expectation",
    "make_bernoulli",
    "make_binomial",
    "make_geometric",
    "make_poisson",
    "pmf_from_probs",
    "point_mass",
    "read_pmf",
    "write_pmf",
    "ParametricFamily",
    "TestFunction",
    "canonical_f_z",
    "geometric_family",
    "p_tilde",
    "poisson_family",
    "stein_solution_1",
    "stein_solution_2",
    "t1_apply",
    "t2_apply",
]
