"""
Shared fixtures: small guides whose transverse grids stay on the dense
eigensolver path so the whole suite runs in seconds.
"""

from typing import NamedTuple

import numpy as np
import pytest

from guideforge.geometry import circular_arc, clothoid, frenet_frame_and_curve, straight
from guideforge.geometry.curve import CurveSpec
from guideforge.geometry.frame import TangFrame
from guideforge.transverse import (
    CrossSectionPotential,
    ModeBundle,
    TransverseGrid,
    compute_mode_bundle,
    harmonic_anisotropic,
    harmonic_isotropic,
)


class Guide(NamedTuple):
    curve: CurveSpec
    frame: TangFrame
    pot: CrossSectionPotential
    bundle: ModeBundle


def make_guide(curve, pot, grid, n_slices, n_modes, **kwargs) -> Guide:
    slices = curve.grid(n_slices)
    frame = frenet_frame_and_curve(curve, slices)
    bundle = compute_mode_bundle(grid, pot, slices, n_modes, curve=curve, frame=frame, **kwargs)
    return Guide(curve, frame, pot, bundle)


@pytest.fixture(scope="session")
def straight_guide() -> Guide:
    """Straight guide of length pi, isotropic omega = 1, three modes."""
    return make_guide(
        straight(np.pi), harmonic_isotropic(1.0), TransverseGrid(20, 20, 5.0, 5.0), n_slices=33, n_modes=3
    )


@pytest.fixture(scope="session")
def arc_guide() -> Guide:
    """Planar arc of radius 5 with a u1-independent profile omega = 4."""
    return make_guide(
        circular_arc(5.0, np.pi), harmonic_isotropic(4.0), TransverseGrid(20, 20, 2.5, 2.5), n_slices=33, n_modes=3
    )


@pytest.fixture(scope="session")
def varying_guide() -> Guide:
    """Clothoid with a widening anisotropic profile; every coupling is nonzero."""
    pot = harmonic_anisotropic(lambda u: 3.0 + 0.1 * u, 4.0)
    return make_guide(
        clothoid(0.05, np.pi, kappa0=0.1), pot, TransverseGrid(20, 20, 2.5, 2.5), n_slices=65, n_modes=5
    )
