"""
Adiabatic-to-diabatic basis changes of a coupled mode subset.
"""

from .gauge import (
    GaugeField,
    adiabatic_to_diabatic,
    conjugate_hamiltonian,
    gauge_extra_terms,
    gauge_transform,
    mixing_angle,
    overlap_intermediates,
    rotation,
    transport_links,
)
from .lyapunov import commutator_rate, lyapunov_residual, primed_kinetic, solve_lyapunov

__all__ = [
    "GaugeField",
    "adiabatic_to_diabatic",
    "commutator_rate",
    "conjugate_hamiltonian",
    "gauge_extra_terms",
    "gauge_transform",
    "lyapunov_residual",
    "mixing_angle",
    "overlap_intermediates",
    "primed_kinetic",
    "rotation",
    "solve_lyapunov",
    "transport_links",
]
