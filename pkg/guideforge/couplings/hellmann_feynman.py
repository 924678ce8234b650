"""
Off-diagonal derivative couplings from energy differences.

The plain variant is the textbook <phi_m|dV|phi_n> / (E_n - E_m). The
generalized variant includes the metric weight D and therefore
reproduces the D-weighted F of a curved guide.
"""

import logging
from typing import Literal

import numpy as np

from ..geometry.curve import CurveSpec
from ..geometry.frame import TangFrame
from ..transverse.bundle import ModeBundle
from ..transverse.hamiltonian import laplacian
from ..transverse.potential import CrossSectionPotential
from .fields import slice_fields

logger = logging.getLogger(__name__)

HF_DEGENERACY_TOL = 1e-6

Variant = Literal["plain", "generalized"]


def hellmann_feynman_F(
    bundle: ModeBundle,
    curve: CurveSpec,
    pot: CrossSectionPotential,
    frame: TangFrame | None,
    u1: float,
    variant: Variant = "plain",
    hf_tol: float = HF_DEGENERACY_TOL,
) -> np.ndarray:
    """
    Estimate F over all bundle modes from the energy denominators.

    Diagonal entries and pairs with |E_n - E_m| < hf_tol are NaN: the
    estimate does not exist there.

    Args:
        bundle: aligned and differentiated mode bundle
        curve: curve data
        pot: cross-section potential (must have a u1 derivative)
        frame: Tang frame, None for planar curves
        u1: slice position
        variant: "plain" or "generalized"
        hf_tol: degeneracy threshold on energy differences

    Raises:
        PresetMismatch: if the potential has no u1 derivative (hard-wall box)
    """
    if variant not in ("plain", "generalized"):
        raise ValueError(f"unknown Hellmann-Feynman variant {variant!r}")
    i = bundle.slice_index(u1)
    X, Y = bundle.grid.mesh
    phi = bundle.modes[i]
    v_dot = pot.transverse_dot(X, Y, u1)
    energies = bundle.energies[i]

    if variant == "plain":
        numerator = bundle.inner(phi, phi * v_dot)
    else:
        if not bundle.is_differentiated:
            raise ValueError("the generalized variant needs mode derivatives")
        D = slice_fields(bundle.grid, curve, frame, u1).D
        lap = laplacian(bundle.grid, bundle.stencil_order)

        def commutator(psi: np.ndarray) -> np.ndarray:
            # [D, H_perp] psi = -1/2 (D lap psi - lap (D psi)) row-wise
            return -0.5 * (D * (lap @ psi.T).T - (lap @ (D * psi).T).T)

        dphi = bundle.dmodes[i]
        e_dot = np.gradient(bundle.energies, bundle.spacing, axis=0, edge_order=2)[i]
        D_mn = bundle.inner(phi, phi * D)
        numerator = 0.5 * (
            bundle.inner(phi, phi * (2.0 * D * v_dot))
            + bundle.inner(phi, commutator(dphi))
            - bundle.inner(dphi, commutator(phi))
            - (e_dot[:, None] + e_dot[None, :]) * D_mn
        )

    gaps = energies[None, :] - energies[:, None]
    absent = np.abs(gaps) < hf_tol
    with np.errstate(divide="ignore", invalid="ignore"):
        estimate = numerator / gaps
    estimate[absent] = np.nan
    if np.any(absent & ~np.eye(energies.size, dtype=bool)):
        logger.debug("near-degenerate Hellmann-Feynman entries dropped at u1=%g", u1)
    return estimate
