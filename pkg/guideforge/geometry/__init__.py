"""
Curve geometry: presets, Frenet/Tang frames and the metric weight.
"""

from .curve import (
    CurveSpec,
    CurveValues,
    bump,
    circular_arc,
    clothoid,
    derivative_defect,
    helix,
    straight,
    tabulated,
)
from .frame import TangFrame, frenet_frame_and_curve, frenet_residual, integrate_tang_angle
from .metric import MetricSample, NormalPlanePoint, adapted_metric, frenet_projections, metric_factor

__all__ = [
    "CurveSpec",
    "CurveValues",
    "MetricSample",
    "NormalPlanePoint",
    "TangFrame",
    "adapted_metric",
    "bump",
    "circular_arc",
    "clothoid",
    "derivative_defect",
    "frenet_frame_and_curve",
    "frenet_projections",
    "frenet_residual",
    "helix",
    "integrate_tang_angle",
    "metric_factor",
    "straight",
    "tabulated",
]
