"""
Effective longitudinal Hamiltonians at each approximation tier.
"""

from .assemble import EffectiveHamiltonian, assemble_effective, block_tridiagonal, discretize
from .merge import merge_kinetic
from .single_mode import SingleModePotentials, shift_potential, single_mode_potentials, twist_potential
from .tiers import ApproximationTier, TierTag

__all__ = [
    "ApproximationTier",
    "EffectiveHamiltonian",
    "SingleModePotentials",
    "TierTag",
    "assemble_effective",
    "block_tridiagonal",
    "discretize",
    "merge_kinetic",
    "shift_potential",
    "single_mode_potentials",
    "twist_potential",
]
