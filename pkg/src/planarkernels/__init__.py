"""Szego, Garabedian, Bergman and Green kernels on smooth multiply connected
planar domains, with residual checks of the identities that tie them together."""

from .classical import AhlforsMap, ProperMap, ahlfors, garabedian, mobius_simplify, szego, szego_zeros
from .errors import KernelError
from .geometry import BoundaryGrid, Curve, Domain, builtin_domain, contains, parse_domain, sample_boundary
from .hardy import (
    BoundaryFunction,
    HardyBasis,
    Weight,
    build_hardy_basis,
    sigma,
    sigma_dbar,
    szego_project,
    weighted_cauchy_kernel,
    weighted_garabedian,
    weighted_inner,
)
from .potential import bergman, green, harmonic_measure, lambda_capital, poisson_weight, solve_dirichlet

__all__ = [
    "AhlforsMap", "ProperMap", "ahlfors", "garabedian", "mobius_simplify", "szego", "szego_zeros",
    "KernelError", "BoundaryGrid", "Curve", "Domain", "builtin_domain", "contains", "parse_domain",
    "sample_boundary", "BoundaryFunction", "HardyBasis", "Weight", "build_hardy_basis", "sigma",
    "sigma_dbar", "szego_project", "weighted_cauchy_kernel", "weighted_garabedian", "weighted_inner",
    "bergman", "green", "harmonic_measure", "lambda_capital", "poisson_weight", "solve_dirichlet",
]
