"""
Normal-plane coordinates, Frenet projections and the metric weight D.
"""

from dataclasses import dataclass

import numpy as np

from .curve import CurveSpec
from .frame import TangFrame


@dataclass(frozen=True)
class NormalPlanePoint:
    """Point (u2, u3) in the normal plane; polar form derived on access."""
    u2: np.ndarray | float
    u3: np.ndarray | float

    @classmethod
    def from_polar(cls, rho, vartheta) -> "NormalPlanePoint":
        return cls(u2=rho * np.cos(vartheta), u3=rho * np.sin(vartheta))

    @property
    def rho(self):
        return np.hypot(self.u2, self.u3)

    @property
    def vartheta(self):
        return np.arctan2(self.u3, self.u2)


@dataclass(frozen=True)
class MetricSample:
    """
    Metric weight and projections at one or many normal-plane points.

    ``D`` is NaN wherever ``valid`` is False.
    """
    D: np.ndarray
    nhat: np.ndarray
    bhat: np.ndarray
    valid: np.ndarray

    @property
    def all_valid(self) -> bool:
        return bool(np.all(self.valid))


def frenet_projections(theta, u2, u3) -> tuple[np.ndarray, np.ndarray]:
    """
    Project Tang-frame coordinates onto the Frenet normal and binormal.

    Returns:
        (nhat, bhat) = (rho cos(theta + vartheta), rho sin(theta + vartheta))
    """
    c, s = np.cos(theta), np.sin(theta)
    return u2 * c - u3 * s, u2 * s + u3 * c


def metric_factor(curve: CurveSpec, theta: float, p: NormalPlanePoint, u1: float) -> MetricSample:
    """
    Evaluate D = (1 - kappa nhat)^-2 with its validity flag.

    Args:
        curve: reference curve
        theta: Tang angle at u1
        p: normal-plane point(s)
        u1: arc length

    Returns:
        MetricSample; points with 1 - kappa nhat <= 0 are flagged invalid

    Example:
        >>> metric_factor(circular_arc(2.0, 1.0), 0.0, NormalPlanePoint(1.0, 0.0), 0.5).D
        4.0
    """
    nhat, bhat = frenet_projections(theta, np.asarray(p.u2, dtype=float), np.asarray(p.u3, dtype=float))
    w = 1.0 - float(curve.kappa(u1)) * nhat
    valid = w > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        D = np.where(valid, 1.0 / np.where(valid, w, 1.0) ** 2, np.nan)
    return MetricSample(D=D, nhat=nhat, bhat=bhat, valid=valid)


def adapted_metric(frame: TangFrame, index: int, u2: float, u3: float) -> np.ndarray:
    """
    Metric tensor of r(u) = a(u1) + u2 e2(u1) + u3 e3(u1) at an interior sample.

    The u1 derivative is a centered difference over neighbouring samples, so
    the off-diagonal entries g12, g13 vanish up to O(du1^2) in the Tang frame.
    """
    if not 0 < index < frame.u1.size - 1:
        raise ValueError("adapted_metric needs an interior sample index")

    def point(i):
        return frame.a[i] + u2 * frame.e2[i] + u3 * frame.e3[i]

    du = frame.u1[index + 1] - frame.u1[index - 1]
    jac = np.stack([
        (point(index + 1) - point(index - 1)) / du,
        frame.e2[index],
        frame.e3[index],
    ])
    return jac @ jac.T
