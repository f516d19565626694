"""Desk-scale analysis toolkit for a three-species vegetation model.

Biomass, soil water and toxic compounds on a 1-D domain with zero-flux
boundaries: analytic homogeneous equilibria and their mode-wise stability,
method-of-lines simulation of pattern formation, and pseudo-arclength
continuation with fold and pitchfork detection producing the full
bifurcation diagram in the precipitation rate.
"""

__version__ = "0.1.0"

from .continuation import (BifurcationEvent, Branch, BranchPoint,
                           ContinuationOptions, DiagramResult, Problem,
                           continue_branch, full_diagram, switch_branch)
from .errors import ConsistencyError, ConvergenceError, InvalidArgumentError
from .grid import FieldState, GridSpec
from .integrate import IntegratorOptions, Trajectory, integrate, settle
from .model import (HomogeneousState, QuadraticCoeffs, double_root_biomass,
                    fold_precipitation, homogeneous_equilibria,
                    quadratic_coeffs, reaction, reaction_jacobian)
from .params import ModelParams
from .semidiscrete import semidiscrete_jacobian, semidiscrete_rhs
from .stability import (CharCoeffs, ModeMatrix, StabilityReport,
                        critical_domain_size, homogeneous_stability,
                        mode_matrix, routh_hurwitz, turing_locus, turing_scan)
from .symmetry import SymmetryReport, classify, near_onset_shape, reflect

__all__ = [
    "__version__",
    "BifurcationEvent", "Branch", "BranchPoint", "CharCoeffs",
    "ConsistencyError", "ContinuationOptions", "ConvergenceError",
    "DiagramResult", "FieldState", "GridSpec", "HomogeneousState",
    "IntegratorOptions", "InvalidArgumentError", "ModeMatrix", "ModelParams",
    "Problem", "QuadraticCoeffs", "StabilityReport", "SymmetryReport",
    "Trajectory", "classify", "continue_branch", "critical_domain_size",
    "double_root_biomass", "fold_precipitation", "full_diagram",
    "homogeneous_equilibria", "homogeneous_stability", "integrate",
    "mode_matrix", "near_onset_shape", "quadratic_coeffs", "reaction",
    "reaction_jacobian", "reflect", "routh_hurwitz", "semidiscrete_jacobian",
    "semidiscrete_rhs", "settle", "switch_branch", "turing_locus",
    "turing_scan",
]
