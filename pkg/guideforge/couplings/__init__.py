"""
Coupling matrices between transverse modes: exact quadrature, truncated
series and Hellmann-Feynman estimates.
"""

from .exact import born_huang_flat, compute_couplings, coupling_matrices_exact
from .fields import SliceFields, slice_fields
from .hellmann_feynman import HF_DEGENERACY_TOL, hellmann_feynman_F
from .moments import ORDER_CAP, MomentTable, build_moment_table, moment_matrix
from .series import coupling_matrices_series
from .types import CouplingSet, CouplingSlice

__all__ = [
    "HF_DEGENERACY_TOL",
    "ORDER_CAP",
    "CouplingSet",
    "CouplingSlice",
    "MomentTable",
    "SliceFields",
    "born_huang_flat",
    "build_moment_table",
    "compute_couplings",
    "coupling_matrices_exact",
    "coupling_matrices_series",
    "hellmann_feynman_F",
    "moment_matrix",
    "slice_fields",
]
