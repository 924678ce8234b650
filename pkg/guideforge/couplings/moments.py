"""
Matrix elements of powers of the Frenet projections between transverse modes.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..geometry.frame import TangFrame
from ..geometry.metric import frenet_projections
from ..transverse.bundle import ModeBundle
from .types import hermitian_part

logger = logging.getLogger(__name__)

ORDER_CAP = 4
# Mode density below this fraction of its peak does not count toward the series reach
DENSITY_FLOOR = 1e-12

Key = tuple[int, int]


@dataclass(frozen=True)
class MomentTable:
    """
    Moments <phi_m| nhat^l bhat^k |.> for every slice and all bundle modes.

    ``entries`` holds <phi|.|phi>, ``first`` <phi|.|d phi>, ``second``
    <phi|.|d^2 phi> and ``cross`` <d phi|.|d phi>, each shaped (N, M, M).
    ``nhat_max[i, m]`` is the largest |nhat| where mode m carries density.
    """
    slices: np.ndarray
    order_cap: int
    entries: dict[Key, np.ndarray]
    first: dict[Key, np.ndarray]
    second: dict[Key, np.ndarray]
    cross: dict[Key, np.ndarray]
    nhat_max: np.ndarray

    def slice_index(self, u1: float) -> int:
        i = int(np.argmin(np.abs(self.slices - u1)))
        if not np.isclose(self.slices[i], u1, rtol=0.0, atol=1e-9 * max(1.0, abs(u1))):
            raise ValueError(f"u1={u1:g} is not a slice of this table")
        return i

    def E(self, l: int, k: int, i: int) -> np.ndarray:
        return self.entries[(l, k)][i]

    def reach(self, i: int, subset) -> float:
        return float(np.max(self.nhat_max[i, list(subset)]))


def _keys(degree: int) -> list[Key]:
    return [(l, d - l) for d in range(degree + 1) for l in range(d, -1, -1)]


def _theta(frame: TangFrame | None, u1: float) -> float:
    return 0.0 if frame is None else float(frame.theta_at(u1))


def moment_matrix(
    bundle: ModeBundle,
    frame: TangFrame | None,
    l: int,
    k: int,
    u1: float,
    order_cap: int = ORDER_CAP,
) -> np.ndarray:
    """
    Quadrature of phi_m nhat^l bhat^k phi_n over the transverse grid.

    Args:
        bundle: mode bundle containing the slice u1
        frame: Tang frame (None for planar curves)
        l, k: powers of nhat and bhat
        u1: slice position
        order_cap: largest allowed l + k

    Returns:
        Hermitian (M, M) matrix over all bundle modes

    Example:
        >>> moment_matrix(bundle, frame, 0, 0, 0.0)  # identity to 1e-10
    """
    if l < 0 or k < 0 or l + k > order_cap:
        raise ValueError(f"moment ({l}, {k}) outside the order cap {order_cap}")
    i = bundle.slice_index(u1)
    X, Y = bundle.grid.mesh
    nhat, bhat = frenet_projections(_theta(frame, u1), X, Y)
    phi = bundle.modes[i]
    raw = bundle.inner(phi, phi * (nhat**l * bhat**k))
    sym, defect = hermitian_part(raw)
    if defect > 1e-12:
        logger.debug("moment (%d, %d) at u1=%g symmetrized, defect %.2e", l, k, u1, defect)
    return sym


def _reach(phi: np.ndarray, nhat: np.ndarray) -> np.ndarray:
    density = np.abs(phi) ** 2
    carried = density > DENSITY_FLOOR * density.max(axis=1, keepdims=True)
    return np.max(np.where(carried, np.abs(nhat)[None, :], 0.0), axis=1)


def build_moment_table(bundle: ModeBundle, frame: TangFrame | None, order: int) -> MomentTable:
    """
    Tabulate every moment a series expansion of the given order needs.

    Plain moments run up to total degree ``order + 1`` (the curvature
    potential reaches one power beyond the metric weight); derivative
    moments up to ``order``.
    """
    if not bundle.is_differentiated:
        raise ValueError("moment tables need an aligned and differentiated bundle")
    if order < 0 or order > ORDER_CAP:
        raise ValueError(f"series order {order} outside 0..{ORDER_CAP}")

    X, Y = bundle.grid.mesh
    plain_keys, derivative_keys = _keys(order + 1), _keys(order)
    shape = (bundle.n_slices, bundle.n_modes, bundle.n_modes)
    entries = {key: np.empty(shape) for key in plain_keys}
    first = {key: np.empty(shape) for key in derivative_keys}
    second = {key: np.empty(shape) for key in derivative_keys}
    cross = {key: np.empty(shape) for key in derivative_keys}
    nhat_max = np.empty((bundle.n_slices, bundle.n_modes))

    for i, u1 in enumerate(bundle.slices):
        nhat, bhat = frenet_projections(_theta(frame, u1), X, Y)
        phi, dphi, d2phi = bundle.modes[i], bundle.dmodes[i], bundle.d2modes[i]
        nhat_max[i] = _reach(phi, nhat)
        for (l, k) in plain_keys:
            weighted = phi * (nhat**l * bhat**k)
            entries[(l, k)][i] = hermitian_part(bundle.inner(phi, weighted))[0]
            if (l, k) in first:
                first[(l, k)][i] = bundle.inner(weighted, dphi)
                second[(l, k)][i] = bundle.inner(weighted, d2phi)
                cross[(l, k)][i] = hermitian_part(bundle.inner(dphi, dphi * (nhat**l * bhat**k)))[0]

    logger.debug("moment table: %d slices, degree <= %d", bundle.n_slices, order + 1)
    return MomentTable(
        slices=bundle.slices.copy(),
        order_cap=order + 1,
        entries=entries,
        first=first,
        second=second,
        cross=cross,
        nhat_max=nhat_max,
    )
