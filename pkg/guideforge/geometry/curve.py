"""
Reference curves for waveguide geometry.

A curve is described by its curvature and torsion as functions of arc
length, together with the derivatives that enter the coupling matrices.
Presets carry analytic derivatives; tabulated input is interpolated with
cubic splines and differentiated through the interpolant.
"""

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import TabulationError

ScalarField = Callable[[np.ndarray], np.ndarray]
PresetTag = Literal["straight", "circular_arc", "clothoid", "helix", "bump", "tabulated"]

# Half-sampling tolerance for tabulated curvature/torsion
TABULATION_TOL = 1e-6


@dataclass(frozen=True)
class CurveValues:
    """Curvature, torsion and derivatives sampled on a u1 array."""
    kappa: np.ndarray
    tau: np.ndarray
    kappa_dot: np.ndarray
    kappa_ddot: np.ndarray
    tau_dot: np.ndarray


@dataclass(frozen=True)
class CurveSpec:
    """
    Arc-length parametrized curve given by kappa(u1) and tau(u1).

    All callables accept scalars or numpy arrays and return arrays of the
    same shape.
    """
    u1_min: float
    u1_max: float
    kappa: ScalarField
    tau: ScalarField
    kappa_dot: ScalarField
    kappa_ddot: ScalarField
    tau_dot: ScalarField
    preset_tag: PresetTag = "tabulated"
    params: dict = field(default_factory=dict)

    @property
    def length(self) -> float:
        return self.u1_max - self.u1_min

    def evaluate(self, u1) -> CurveValues:
        u = np.asarray(u1, dtype=float)
        return CurveValues(
            kappa=np.asarray(self.kappa(u), dtype=float),
            tau=np.asarray(self.tau(u), dtype=float),
            kappa_dot=np.asarray(self.kappa_dot(u), dtype=float),
            kappa_ddot=np.asarray(self.kappa_ddot(u), dtype=float),
            tau_dot=np.asarray(self.tau_dot(u), dtype=float),
        )

    def grid(self, n: int) -> np.ndarray:
        """Uniform u1 samples including both ends."""
        return np.linspace(self.u1_min, self.u1_max, n)

    def summary(self) -> str:
        details = ", ".join(f"{k}={v:g}" for k, v in self.params.items()
                            if isinstance(v, (int, float)))
        return f"{self.preset_tag} on [{self.u1_min:g}, {self.u1_max:g}]" + (
            f" ({details})" if details else ""
        )


def _constant(value: float) -> ScalarField:
    return lambda u: np.full(np.shape(u), float(value))


def _linear(offset: float, slope: float) -> ScalarField:
    return lambda u: offset + slope * np.asarray(u, dtype=float)


# === PRESETS ===

def straight(length: float, u1_min: float = 0.0) -> CurveSpec:
    """Straight line, kappa = tau = 0."""
    zero = _constant(0.0)
    return CurveSpec(
        u1_min=u1_min, u1_max=u1_min + length,
        kappa=zero, tau=zero, kappa_dot=zero, kappa_ddot=zero, tau_dot=zero,
        preset_tag="straight", params={"length": length},
    )


def circular_arc(radius: float, length: float, u1_min: float = 0.0) -> CurveSpec:
    """Planar arc of constant curvature 1/radius."""
    zero = _constant(0.0)
    return CurveSpec(
        u1_min=u1_min, u1_max=u1_min + length,
        kappa=_constant(1.0 / radius), tau=zero,
        kappa_dot=zero, kappa_ddot=zero, tau_dot=zero,
        preset_tag="circular_arc", params={"radius": radius, "length": length},
    )


def clothoid(rate: float, length: float, kappa0: float = 0.0, u1_min: float = 0.0) -> CurveSpec:
    """Planar Euler spiral, kappa = kappa0 + rate * u1."""
    zero = _constant(0.0)
    return CurveSpec(
        u1_min=u1_min, u1_max=u1_min + length,
        kappa=_linear(kappa0, rate), tau=zero,
        kappa_dot=_constant(rate), kappa_ddot=zero, tau_dot=zero,
        preset_tag="clothoid", params={"rate": rate, "kappa0": kappa0, "length": length},
    )


def helix(kappa: float, tau: float, length: float, u1_min: float = 0.0) -> CurveSpec:
    """
    Circular helix with constant curvature and torsion.

    Radius is kappa / (kappa^2 + tau^2), pitch per radian tau / (kappa^2 + tau^2).
    """
    zero = _constant(0.0)
    return CurveSpec(
        u1_min=u1_min, u1_max=u1_min + length,
        kappa=_constant(kappa), tau=_constant(tau),
        kappa_dot=zero, kappa_ddot=zero, tau_dot=zero,
        preset_tag="helix", params={"kappa": kappa, "tau": tau, "length": length},
    )


def bump(
    kappa0: float,
    length: float,
    start: float,
    end: float,
    width: float = 0.2,
    u1_min: float = 0.0,
) -> CurveSpec:
    """
    Planar arc of curvature kappa0 on [start, end] with straight tails.

    The window edges are smoothed by tanh steps of the given width so that
    kappa is C-infinity and its derivatives are available in closed form.
    """
    def kappa(u):
        xa, xb = (np.asarray(u, dtype=float) - start) / width, (np.asarray(u, dtype=float) - end) / width
        return 0.5 * kappa0 * (np.tanh(xa) - np.tanh(xb))

    def kappa_dot(u):
        xa, xb = (np.asarray(u, dtype=float) - start) / width, (np.asarray(u, dtype=float) - end) / width
        return 0.5 * kappa0 / width * (np.cosh(xa) ** -2 - np.cosh(xb) ** -2)

    def kappa_ddot(u):
        xa, xb = (np.asarray(u, dtype=float) - start) / width, (np.asarray(u, dtype=float) - end) / width
        return kappa0 / width**2 * (
            -np.tanh(xa) * np.cosh(xa) ** -2 + np.tanh(xb) * np.cosh(xb) ** -2
        )

    zero = _constant(0.0)
    return CurveSpec(
        u1_min=u1_min, u1_max=u1_min + length,
        kappa=kappa, tau=zero, kappa_dot=kappa_dot, kappa_ddot=kappa_ddot, tau_dot=zero,
        preset_tag="bump",
        params={"kappa0": kappa0, "length": length, "start": start, "end": end, "width": width},
    )


def tabulated(
    u1: np.ndarray,
    kappa: np.ndarray,
    tau: np.ndarray,
    tol: float | None = TABULATION_TOL,
) -> CurveSpec:
    """
    Curve from sampled curvature and torsion.

    Args:
        u1: strictly increasing arc-length samples
        kappa: signed curvature samples (a consistent sign convention is the caller's job)
        tau: torsion samples
        tol: half-sampling tolerance; None skips the check

    Returns:
        CurveSpec whose derivatives come from the cubic interpolants

    Raises:
        TabulationError: if the samples are too coarse for the tolerance
    """
    u1 = np.asarray(u1, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if u1.ndim != 1 or u1.size < 4 or np.any(np.diff(u1) <= 0):
        raise TabulationError("tabulated u1 must be strictly increasing with at least 4 samples")
    if not (np.all(np.isfinite(kappa)) and np.all(np.isfinite(tau))):
        raise TabulationError("tabulated kappa/tau contain non-finite values")
    if tol is not None:
        check_tabulation(u1, kappa, tol, name="kappa")
        check_tabulation(u1, tau, tol, name="tau")

    k_spline = CubicSpline(u1, kappa)
    t_spline = CubicSpline(u1, tau)
    return CurveSpec(
        u1_min=float(u1[0]), u1_max=float(u1[-1]),
        kappa=k_spline, tau=t_spline,
        kappa_dot=k_spline.derivative(1), kappa_ddot=k_spline.derivative(2),
        tau_dot=t_spline.derivative(1),
        preset_tag="tabulated", params={"samples": int(u1.size)},
    )


def check_tabulation(u1: np.ndarray, values: np.ndarray, tol: float, name: str = "values") -> float:
    """
    Compare the spline of every other sample with the dropped samples.

    Returns:
        The largest interpolation error found

    Raises:
        TabulationError: if that error exceeds ``tol``
    """
    if u1.size < 8:
        return 0.0
    coarse = CubicSpline(u1[::2], values[::2])
    error = float(np.max(np.abs(coarse(u1[1::2]) - values[1::2])))
    if error > tol:
        raise TabulationError(
            f"half-sampling error of tabulated {name} is {error:.3e} > {tol:.1e}; "
            "supply denser samples"
        )
    return error


def derivative_defect(curve: CurveSpec, u1: np.ndarray, step: float = 1e-3) -> dict[str, float]:
    """
    Sup-norm mismatch between stored derivatives and centered differences.

    The mismatch is O(step^2) for a consistent curve.
    """
    u = np.asarray(u1, dtype=float)

    def centered(f: ScalarField) -> np.ndarray:
        return (np.asarray(f(u + step)) - np.asarray(f(u - step))) / (2 * step)

    return {
        "kappa_dot": float(np.max(np.abs(curve.kappa_dot(u) - centered(curve.kappa)))),
        "kappa_ddot": float(np.max(np.abs(curve.kappa_ddot(u) - centered(curve.kappa_dot)))),
        "tau_dot": float(np.max(np.abs(curve.tau_dot(u) - centered(curve.tau)))),
    }


PRESET_BUILDERS: dict[str, Callable[..., CurveSpec]] = {
    "straight": straight,
    "circular_arc": circular_arc,
    "clothoid": clothoid,
    "helix": helix,
    "bump": bump,
}
