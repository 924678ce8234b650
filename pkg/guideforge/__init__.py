"""
GuideForge: coupled-mode solver for curved, twisted and deformed quantum waveguides.

Computes transverse modes, nonadiabatic coupling matrices, few-mode
effective Hamiltonians, longitudinal spectra and the adiabatic-to-diabatic
basis transformation, with a brute-force 3D grid oracle for validation.
"""

__version__ = "1.0.0"
