"""
Cross-section potentials V(u1) = V1(u1) + V_perp(u2, u3; u1).

A profile is built from a base family, then rotated by alpha(u1) and
translated by d(u1). Evaluating at a normal-plane point applies the
inverse maps to the point.
"""

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..errors import PresetMismatch

Family = Literal["harmonic_isotropic", "harmonic_anisotropic", "dirichlet_box", "double_well", "tabulated"]
Param = float | Callable[[float], float]
Vector = tuple[float, float] | Callable[[float], tuple[float, float]]

# Step for centered differences of the profile along u1
PROFILE_DERIVATIVE_STEP = 1e-4

FAMILY_PARAMS: dict[str, tuple[str, ...]] = {
    "harmonic_isotropic": ("omega",),
    "harmonic_anisotropic": ("omega2", "omega3"),
    "dirichlet_box": ("half_width2", "half_width3"),
    "double_well": ("barrier", "separation", "omega3", "tilt"),
    "tabulated": (),
}


def _value(param: Param, u1: float) -> float:
    return float(param(u1)) if callable(param) else float(param)


def _vector(param: Vector, u1: float) -> np.ndarray:
    return np.asarray(param(u1) if callable(param) else param, dtype=float)


@dataclass
class TabulatedProfile:
    """
    Sampled transverse potential.

    ``values`` has shape (n_u2, n_u3) for a u1-independent profile or
    (n_u1, n_u2, n_u3) otherwise; cubic interpolation on the regular grid.
    """
    u2: np.ndarray
    u3: np.ndarray
    values: np.ndarray
    u1: np.ndarray | None = None
    _interp: RegularGridInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        axes = (self.u2, self.u3) if self.u1 is None else (self.u1, self.u2, self.u3)
        method = "cubic" if all(np.size(ax) >= 4 for ax in axes) else "linear"
        self._interp = RegularGridInterpolator(
            axes, np.asarray(self.values, dtype=float),
            method=method, bounds_error=False, fill_value=None,
        )

    def __call__(self, x: np.ndarray, y: np.ndarray, u1: float) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if self.u1 is None:
            pts = np.stack([x.ravel(), y.ravel()], axis=-1)
        else:
            pts = np.stack([np.full(x.size, u1), x.ravel(), y.ravel()], axis=-1)
        return self._interp(pts).reshape(x.shape)


@dataclass
class CrossSectionPotential:
    """
    Transverse profile family with optional twist, shift and longitudinal part.

    Params may be constants or callables of u1.
    """
    family: Family
    params: dict[str, Param] = field(default_factory=dict)
    twist_alpha: Param | None = None
    twist_alpha_dot: Param | None = None
    shift_d: Vector | None = None
    shift_d_dot: Vector | None = None
    v1: Param = 0.0
    table: TabulatedProfile | None = None

    def __post_init__(self):
        missing = [p for p in FAMILY_PARAMS[self.family] if p not in self.params and p != "tilt"]
        if missing:
            raise ValueError(f"{self.family} profile needs parameters {missing}")
        if self.family == "tabulated" and self.table is None:
            raise ValueError("tabulated profile needs a table")

    @property
    def is_twisted(self) -> bool:
        return self.twist_alpha is not None

    @property
    def is_shifted(self) -> bool:
        return self.shift_d is not None

    @property
    def has_hard_walls(self) -> bool:
        return self.family == "dirichlet_box"

    def param(self, name: str, u1: float) -> float:
        return _value(self.params.get(name, 0.0), u1)

    def alpha(self, u1: float) -> float:
        return 0.0 if self.twist_alpha is None else _value(self.twist_alpha, u1)

    def alpha_dot(self, u1: float) -> float:
        if self.twist_alpha is None:
            raise PresetMismatch("profile is not twisted")
        if self.twist_alpha_dot is not None:
            return _value(self.twist_alpha_dot, u1)
        h = PROFILE_DERIVATIVE_STEP
        return (self.alpha(u1 + h) - self.alpha(u1 - h)) / (2 * h)

    def shift(self, u1: float) -> np.ndarray:
        return np.zeros(2) if self.shift_d is None else _vector(self.shift_d, u1)

    def shift_dot(self, u1: float) -> np.ndarray:
        if self.shift_d is None:
            raise PresetMismatch("profile is not shifted")
        if self.shift_d_dot is not None:
            return _vector(self.shift_d_dot, u1)
        h = PROFILE_DERIVATIVE_STEP
        return (self.shift(u1 + h) - self.shift(u1 - h)) / (2 * h)

    def longitudinal(self, u1: float) -> float:
        return _value(self.v1, u1)

    def body_coordinates(self, u2, u3, u1: float) -> tuple[np.ndarray, np.ndarray]:
        """Undo the shift, then the rotation."""
        d = self.shift(u1)
        qx, qy = np.asarray(u2, dtype=float) - d[0], np.asarray(u3, dtype=float) - d[1]
        alpha = self.alpha(u1)
        c, s = np.cos(alpha), np.sin(alpha)
        return c * qx + s * qy, -s * qx + c * qy

    def base(self, x: np.ndarray, y: np.ndarray, u1: float) -> np.ndarray:
        """Untransformed profile in body coordinates."""
        if self.family == "harmonic_isotropic":
            omega = self.param("omega", u1)
            return 0.5 * omega**2 * (x**2 + y**2)
        if self.family == "harmonic_anisotropic":
            w2, w3 = self.param("omega2", u1), self.param("omega3", u1)
            return 0.5 * (w2**2 * x**2 + w3**2 * y**2)
        if self.family == "double_well":
            a = self.param("separation", u1)
            return (
                self.param("barrier", u1) * ((x / a) ** 2 - 1.0) ** 2
                + self.param("tilt", u1) * x
                + 0.5 * self.param("omega3", u1) ** 2 * y**2
            )
        if self.family == "dirichlet_box":
            return np.zeros(np.broadcast(x, y).shape)
        return self.table(x, y, u1)

    def transverse(self, u2, u3, u1: float) -> np.ndarray:
        x, y = self.body_coordinates(u2, u3, u1)
        return self.base(x, y, u1)

    def transverse_dot(self, u2, u3, u1: float) -> np.ndarray:
        """d/du1 of V_perp at fixed (u2, u3), by centered differences."""
        if self.has_hard_walls:
            raise PresetMismatch("hard-wall profiles have no smooth u1 derivative")
        h = PROFILE_DERIVATIVE_STEP
        return (self.transverse(u2, u3, u1 + h) - self.transverse(u2, u3, u1 - h)) / (2 * h)

    def box_mask(self, u2, u3, u1: float) -> np.ndarray | None:
        """Points strictly inside the hard walls, or None for soft profiles."""
        if not self.has_hard_walls:
            return None
        x, y = self.body_coordinates(u2, u3, u1)
        return (np.abs(x) < self.param("half_width2", u1)) & (np.abs(y) < self.param("half_width3", u1))


# === FAMILY FACTORIES ===

def harmonic_isotropic(omega: Param, **extra) -> CrossSectionPotential:
    return CrossSectionPotential("harmonic_isotropic", {"omega": omega}, **extra)


def harmonic_anisotropic(omega2: Param, omega3: Param, **extra) -> CrossSectionPotential:
    return CrossSectionPotential("harmonic_anisotropic", {"omega2": omega2, "omega3": omega3}, **extra)


def dirichlet_box(half_width2: Param, half_width3: Param, **extra) -> CrossSectionPotential:
    return CrossSectionPotential(
        "dirichlet_box", {"half_width2": half_width2, "half_width3": half_width3}, **extra
    )


def double_well(
    barrier: Param, separation: Param, omega3: Param, tilt: Param = 0.0, **extra
) -> CrossSectionPotential:
    """Quartic double well along u2 with minima at +-separation, harmonic along u3."""
    return CrossSectionPotential(
        "double_well",
        {"barrier": barrier, "separation": separation, "omega3": omega3, "tilt": tilt},
        **extra,
    )


def tabulated_profile(table: TabulatedProfile, **extra) -> CrossSectionPotential:
    return CrossSectionPotential("tabulated", {}, table=table, **extra)
