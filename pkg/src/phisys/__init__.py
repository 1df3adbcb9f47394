"""Numerical toolkit for singular quasilinear elliptic systems driven by a Phi-Laplacian."""

from .comparison import ComparisonInstance, check_phi_power_convexity, comparison_test, j_functional
from .grid import DiscreteField, Mesh, check_poincare, distance_function, gradient, luxemburg_norm, modular
from .kernels import BACKEND
from .nfunction import NFunction, PhiKernel, audit_nfunction, build_nfunction, conjugate_eval
from .solver import (
    RegularizationParams,
    assemble_jacobian,
    assemble_residual,
    compute_r0,
    continuation_solve,
    fit_lower_bound,
    minimize_g,
    newton_solve,
    solve_barrier,
)
from .system import Structure, SystemSpec, make_spec, rhs_eval, validate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ComparisonInstance",
    "DiscreteField",
    "Mesh",
    "NFunction",
    "PhiKernel",
    "RegularizationParams",
    "Structure",
    "SystemSpec",
    "assemble_jacobian",
    "assemble_residual",
    "audit_nfunction",
    "build_nfunction",
    "check_phi_power_convexity",
    "check_poincare",
    "comparison_test",
    "compute_r0",
    "conjugate_eval",
    "continuation_solve",
    "distance_function",
    "fit_lower_bound",
    "gradient",
    "j_functional",
    "luxemburg_norm",
    "make_spec",
    "minimize_g",
    "modular",
    "newton_solve",
    "rhs_eval",
    "solve_barrier",
    "validate",
]
