"""
Closed-form potentials of the lowest-order single-mode equation.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import PresetMismatch
from ..geometry.curve import CurveSpec
from ..transverse.bundle import ModeBundle
from ..transverse.potential import CrossSectionPotential

CLOSED_FORMS = ("twist", "shift")


@dataclass
class SingleModePotentials:
    """Per-slice contributions to the effective potential of one mode."""
    slices: np.ndarray
    mode: int
    V_geo: np.ndarray
    V_surface: np.ndarray
    V_bh_diag: np.ndarray
    V_longitudinal: np.ndarray
    V_twist: np.ndarray | None = None
    V_shift: np.ndarray | None = None

    @property
    def total(self) -> np.ndarray:
        """Effective potential of the single-mode equation; the closed forms are parts of V_bh_diag."""
        return self.V_longitudinal + self.V_surface + self.V_geo + self.V_bh_diag


# Eighth-order first-derivative weights for offsets 1..4
FIRST_DERIVATIVE = (4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0)


def _central(image: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Eighth-order centered difference; the mode is continued oddly through the walls."""
    reach = len(FIRST_DERIVATIVE)
    walls = [(0, 0)] * image.ndim
    walls[axis] = (1, 1)
    ghosts = [(0, 0)] * image.ndim
    ghosts[axis] = (reach - 1, reach - 1)
    f = np.pad(np.pad(image, walls), ghosts, mode="reflect", reflect_type="odd")
    n = image.shape[axis]

    def s(k):
        return np.take(f, np.arange(reach + k, reach + k + n), axis=axis)

    return sum(w * (s(k) - s(-k)) for k, w in enumerate(FIRST_DERIVATIVE, start=1)) / h


def _gradient(bundle: ModeBundle, mode: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    grid = bundle.grid
    image = grid.as_image(mode)
    return _central(image, grid.hx, 0).ravel(), _central(image, grid.hy, 1).ravel()


def twist_potential(bundle: ModeBundle, pot: CrossSectionPotential, m: int) -> np.ndarray:
    """(alpha_dot^2 / 2) ||d_vartheta phi_m||^2 per slice."""
    if not pot.is_twisted:
        raise PresetMismatch("twist potential requested for a cross-section without twist")
    X, Y = bundle.grid.mesh
    out = np.empty(bundle.n_slices)
    for i, u1 in enumerate(bundle.slices):
        g2, g3 = _gradient(bundle, bundle.modes[i, m])
        angular = X * g3 - Y * g2
        out[i] = 0.5 * pot.alpha_dot(float(u1)) ** 2 * float(np.real(bundle.inner(angular, angular)))
    return out


def shift_potential(bundle: ModeBundle, pot: CrossSectionPotential, m: int) -> np.ndarray:
    """(1/2) ||(d_dot . grad) phi_m||^2 per slice."""
    if not pot.is_shifted:
        raise PresetMismatch("shift potential requested for a cross-section without shift")
    out = np.empty(bundle.n_slices)
    for i, u1 in enumerate(bundle.slices):
        g2, g3 = _gradient(bundle, bundle.modes[i, m])
        d_dot = pot.shift_dot(float(u1))
        directional = d_dot[0] * g2 + d_dot[1] * g3
        out[i] = 0.5 * float(np.real(bundle.inner(directional, directional)))
    return out


def single_mode_potentials(
    bundle: ModeBundle,
    curve: CurveSpec,
    m: int,
    pot: CrossSectionPotential | None = None,
    closed_forms: tuple[str, ...] | None = None,
) -> SingleModePotentials:
    """
    Geometric, surface and Born-Huang potentials of mode m.

    Args:
        bundle: aligned and differentiated bundle (real gauge)
        curve: curve data for the geometric potential -kappa^2/8
        m: mode index
        pot: cross-section potential, needed for the closed forms
        closed_forms: which of "twist", "shift" to evaluate; by default
            whichever the cross-section supports

    Raises:
        PresetMismatch: if a requested closed form does not apply
    """
    if not bundle.is_differentiated:
        raise ValueError("single-mode potentials need mode derivatives")
    if closed_forms is None:
        closed_forms = () if pot is None else tuple(
            name for name, on in (("twist", pot.is_twisted), ("shift", pot.is_shifted)) if on
        )
    unknown = set(closed_forms) - set(CLOSED_FORMS)
    if unknown:
        raise ValueError(f"unknown closed forms {sorted(unknown)}")
    if closed_forms and pot is None:
        raise PresetMismatch("closed forms need the cross-section potential")

    phi, dphi = bundle.modes[:, m], bundle.dmodes[:, m]
    norm = np.real(np.einsum("ip,ip->i", np.conj(dphi), dphi)) * bundle.grid.weight
    connection = np.einsum("ip,ip->i", np.conj(phi), dphi) * bundle.grid.weight
    kappa = curve.evaluate(bundle.slices).kappa

    return SingleModePotentials(
        slices=bundle.slices.copy(),
        mode=m,
        V_geo=-0.125 * kappa**2,
        V_surface=bundle.energies[:, m].copy(),
        V_bh_diag=0.5 * (norm + np.real(connection**2)),
        V_longitudinal=bundle.v1.copy(),
        V_twist=twist_potential(bundle, pot, m) if "twist" in closed_forms else None,
        V_shift=shift_potential(bundle, pot, m) if "shift" in closed_forms else None,
    )
