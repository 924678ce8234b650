"""
Transverse eigenproblem: potentials, grids, slice solves and mode bundles.
"""

from .bundle import ModeBundle, align_and_differentiate, compute_mode_bundle, mode_derivatives, solve_slice
from .grid import TransverseGrid
from .hamiltonian import build_transverse_hamiltonian, laplacian, solve_transverse_modes
from .potential import (
    CrossSectionPotential,
    TabulatedProfile,
    dirichlet_box,
    double_well,
    harmonic_anisotropic,
    harmonic_isotropic,
    tabulated_profile,
)

__all__ = [
    "CrossSectionPotential",
    "ModeBundle",
    "TabulatedProfile",
    "TransverseGrid",
    "align_and_differentiate",
    "build_transverse_hamiltonian",
    "compute_mode_bundle",
    "dirichlet_box",
    "double_well",
    "harmonic_anisotropic",
    "harmonic_isotropic",
    "laplacian",
    "mode_derivatives",
    "solve_slice",
    "solve_transverse_modes",
    "tabulated_profile",
]
