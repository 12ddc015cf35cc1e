"""Two-axis hemispherical-shell piecewise isometry."""

from ._backend import NAME as BACKEND
from .fatline import FatParams, completeness_probe, coverage, render_eset
from .pwi import Protocol, atom_areas, build_cut_arcs, gamma_prime, map_forward, map_inverse
from .resonance import BranchSpec, branch_gamma, branch_intersection, theta_41j_closed_form
from .symmetry import SymmetryId, fold_to_fundamental, symmetry_residual

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BranchSpec",
    "FatParams",
    "Protocol",
    "SymmetryId",
    "atom_areas",
    "branch_gamma",
    "branch_intersection",
    "build_cut_arcs",
    "completeness_probe",
    "coverage",
    "fold_to_fundamental",
    "gamma_prime",
    "map_forward",
    "map_inverse",
    "render_eset",
    "symmetry_residual",
    "theta_41j_closed_form",
]
