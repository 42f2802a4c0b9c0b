"""Weighted Gaussian Sobolev calculus and Neumann problems at desk scale."""
from .ball import ode_solution
from .divergence import (CylVectorField, bilinear_identity_residual, boundary_hessian_identity,
                         divergence, ibp_residual, rotation_field)
from .domains import (LevelSetDomain, contains, dH_distance, dH_project, half_space,
                      surface_integrate, trace_restrict, unit_ball, whole_space)
from .extension import extend, matching_report, operator_norm_probe, solve_coefficients
from .gaussian import CylFunction, GaussianModel, QuadratureGrid, cm_inner, hermite_fn, integrate_mu
from .probes import LCG
from .solver import (DiscreteProblem, SolveResult, apply_L, estimate_report, graph_norm_check,
                     penalization_sweep, solve)
from .weights import (PenalizedWeight, ProxResult, Weight, my_gradient, my_hessian, penalized,
                      prox)

__all__ = [
    "CylFunction", "CylVectorField", "DiscreteProblem", "GaussianModel", "LCG", "LevelSetDomain",
    "PenalizedWeight", "ProxResult", "QuadratureGrid", "SolveResult", "Weight", "apply_L",
    "bilinear_identity_residual", "boundary_hessian_identity", "cm_inner", "contains",
    "dH_distance", "dH_project", "divergence", "estimate_report", "extend", "graph_norm_check",
    "half_space", "hermite_fn", "ibp_residual", "integrate_mu", "matching_report", "my_gradient",
    "my_hessian", "ode_solution", "operator_norm_probe", "penalization_sweep", "penalized", "prox",
    "rotation_field", "solve", "solve_coefficients", "surface_integrate", "trace_restrict",
    "unit_ball", "whole_space",
]
