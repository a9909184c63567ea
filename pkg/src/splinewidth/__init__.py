"""Optimal spline spaces for L2 n-width problems with boundary conditions."""

from .bspline import KnotVector, UniformBSpline, cardinal_bspline, eval_bspline, interior_knots
from .kernels import (DiscreteOperator, EigenSystem, Kernel, OperatorChain, adjoint, build_chain,
                      compose, discretize, eigen_system)
from .quadrature import QuadratureGrid, default_grid, gauss_grid, gauss_legendre
from .spaces import (ConstrainedSplineBasis, SpaceSpec, build_basis, perturbed_space, trig_basis,
                     verify_boundary_conditions)
from .widths import (Projector, WidthReport, approx_error, convergence_study, l2_projector,
                     theoretical_width, width_report)

__all__ = [
    "KnotVector", "UniformBSpline", "cardinal_bspline", "eval_bspline", "interior_knots",
    "DiscreteOperator", "EigenSystem", "Kernel", "OperatorChain", "adjoint", "build_chain",
    "compose", "discretize", "eigen_system",
    "QuadratureGrid", "default_grid", "gauss_grid", "gauss_legendre",
    "ConstrainedSplineBasis", "SpaceSpec", "build_basis", "perturbed_space", "trig_basis",
    "verify_boundary_conditions",
    "Projector", "WidthReport", "approx_error", "convergence_study", "l2_projector",
    "theoretical_width", "width_report",
]
