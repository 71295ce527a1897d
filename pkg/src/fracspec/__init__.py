"""Eigenvalues and eigenfunctions of fractional boundary value problems.

Two problem variants share one frequency variable rho = lambda^{1/(2 alpha)}:
the rl-bridge problem (integral form: bridge covariance kernel) and the
caputo problem (integral form: Riemann-Liouville kernel). The package
provides matched solvers at three accuracy tiers: closed-form asymptotics,
a corrected Nystrom reference discretization, and secular-equation root
refinement through a half-line integral system, plus a CLI harness that
serializes their comparisons.
"""

from .asymptotics import (
    AsymptoticEigenpair,
    EigenfunctionApprox,
    Layer,
    Order,
    boundary_layer,
    eigenfunction_asymptotic,
    lambda_asymptotic,
    lambda_two_term,
    rho_asymptotic,
    upsilon0,
    upsilon1,
)
from .errors import (
    AccuracyError,
    BracketError,
    ConvergenceError,
    DomainError,
    FracspecError,
)
from .integro import (
    PQRSolution,
    RefinedRoot,
    SecularValue,
    analytic_extend,
    apply_A,
    build_pqr_grid,
    c_ratio,
    dump_integro_csv,
    reconstruct_f_exact,
    refine_rho,
    secular,
    solve_pqr,
)
from .nystrom import (
    DiscreteSpectrum,
    KernelKind,
    KernelSpec,
    NystromGrid,
    build_grid,
    caputo_endpoint_value,
    discretize_and_solve,
    dump_spectrum_csv,
    eigenfunction_at,
    kernel_K,
    kernel_bridge,
    mercer_trace_gap,
)
from .phase import (
    FractionalOrder,
    PhaseTable,
    Variant,
    b_alpha,
    cache_dir,
    g0,
    gamma0,
    h0,
    load_cache,
    pv_weight,
    save_cache,
    theta0,
    xc0,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "AsymptoticEigenpair",
    "BracketError",
    "ConvergenceError",
    "DiscreteSpectrum",
    "DomainError",
    "EigenfunctionApprox",
    "FracspecError",
    "FractionalOrder",
    "KernelKind",
    "KernelSpec",
    "Layer",
    "NystromGrid",
    "Order",
    "PQRSolution",
    "PhaseTable",
    "RefinedRoot",
    "SecularValue",
    "Variant",
    "analytic_extend",
    "apply_A",
    "b_alpha",
    "boundary_layer",
    "build_grid",
    "build_pqr_grid",
    "c_ratio",
    "cache_dir",
    "caputo_endpoint_value",
    "discretize_and_solve",
    "dump_integro_csv",
    "dump_spectrum_csv",
    "eigenfunction_asymptotic",
    "eigenfunction_at",
    "g0",
    "gamma0",
    "h0",
    "kernel_K",
    "kernel_bridge",
    "lambda_asymptotic",
    "lambda_two_term",
    "load_cache",
    "mercer_trace_gap",
    "pv_weight",
    "reconstruct_f_exact",
    "refine_rho",
    "rho_asymptotic",
    "save_cache",
    "secular",
    "solve_pqr",
    "theta0",
    "upsilon0",
    "upsilon1",
    "xc0",
    "__version__",
]
