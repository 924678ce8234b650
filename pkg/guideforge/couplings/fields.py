"""
Geometric weight fields on the transverse grid of one slice.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidTube
from ..geometry.curve import CurveSpec
from ..geometry.frame import TangFrame
from ..geometry.metric import frenet_projections
from ..transverse.grid import TransverseGrid


@dataclass(frozen=True)
class SliceFields:
    """Curve scalars at u1 and the fields nhat, bhat, w = 1 - kappa nhat on the grid."""
    u1: float
    kappa: float
    tau: float
    kappa_dot: float
    kappa_ddot: float
    tau_dot: float
    nhat: np.ndarray
    bhat: np.ndarray

    @property
    def w(self) -> np.ndarray:
        return 1.0 - self.kappa * self.nhat

    @property
    def D(self) -> np.ndarray:
        return self.w ** -2

    @property
    def bend_rate(self) -> np.ndarray:
        """kappa_dot nhat + kappa tau bhat."""
        return self.kappa_dot * self.nhat + self.kappa * self.tau * self.bhat

    @property
    def D_dot(self) -> np.ndarray:
        return 2.0 * self.bend_rate / self.w**3

    @property
    def bend_accel(self) -> np.ndarray:
        """(kappa_ddot - kappa tau^2) nhat + (2 kappa_dot tau + kappa tau_dot) bhat."""
        return (
            (self.kappa_ddot - self.kappa * self.tau**2) * self.nhat
            + (2 * self.kappa_dot * self.tau + self.kappa * self.tau_dot) * self.bhat
        )

    @property
    def C(self) -> np.ndarray:
        w = self.w
        return (
            0.25 * self.kappa**2 * w**-2
            + 0.5 * self.bend_accel / w**3
            + 1.25 * self.bend_rate**2 / w**4
        )


def slice_fields(
    grid: TransverseGrid,
    curve: CurveSpec,
    frame: TangFrame | None,
    u1: float,
) -> SliceFields:
    """
    Sample the geometric fields at u1.

    Planar curves may pass ``frame=None`` (theta = 0).

    Raises:
        InvalidTube: if any grid point has 1 - kappa nhat <= 0
    """
    theta = 0.0 if frame is None else float(frame.theta_at(u1))
    X, Y = grid.mesh
    nhat, bhat = frenet_projections(theta, X, Y)
    values = curve.evaluate(u1)
    fields = SliceFields(
        u1=float(u1),
        kappa=float(values.kappa),
        tau=float(values.tau),
        kappa_dot=float(values.kappa_dot),
        kappa_ddot=float(values.kappa_ddot),
        tau_dot=float(values.tau_dot),
        nhat=nhat,
        bhat=bhat,
    )
    if np.any(fields.w <= 0):
        raise InvalidTube(f"grid leaves the tube at u1={u1:g}; shrink the transverse extent")
    if not all(np.isfinite([fields.kappa, fields.tau, fields.kappa_dot, fields.kappa_ddot, fields.tau_dot])):
        raise InvalidTube(f"curve data not finite at u1={u1:g}")
    return fields
