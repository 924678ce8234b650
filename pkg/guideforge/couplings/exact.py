"""
Coupling matrices by direct quadrature of their closed-form integrands.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch
from ..geometry.curve import CurveSpec
from ..geometry.frame import TangFrame
from ..transverse.bundle import ModeBundle
from .fields import slice_fields
from .types import CouplingSet, CouplingSlice, hermitian_part, skew_part

logger = logging.getLogger(__name__)


def _check_subset(bundle: ModeBundle, subset: Sequence[int]) -> tuple[int, ...]:
    subset = tuple(int(m) for m in subset)
    if not subset:
        raise DimensionMismatch("mode subset is empty")
    if len(set(subset)) != len(subset) or min(subset) < 0 or max(subset) >= bundle.n_modes:
        raise DimensionMismatch(f"subset {subset} is not a set of modes 0..{bundle.n_modes - 1}")
    return subset


def _adj(a: np.ndarray) -> np.ndarray:
    return np.conj(a.T)


def full_derivative_coupling(bundle: ModeBundle, weight: np.ndarray, i: int) -> np.ndarray:
    """F over all bundle modes: 1/2 (<phi|D|d phi> - <d phi|D|phi>)."""
    A = bundle.inner(bundle.modes[i], bundle.dmodes[i] * weight)
    return 0.5 * (A - _adj(A))


def coupling_matrices_exact(
    bundle: ModeBundle,
    frame: TangFrame | None,
    curve: CurveSpec,
    subset: Sequence[int],
    u1: float,
) -> CouplingSlice:
    """
    V, D, C, F, G and the Born-Huang potential on one slice.

    The completeness sum inside G runs over every bundle mode; the
    Born-Huang potential subtracts the sum over the subset only. The
    contribution of the last bundle mode to G is kept in
    ``diagnostics["g_tail"]`` as an estimate of the truncation error.

    Raises:
        InvalidTube: if the grid leaves the tube at u1
        DimensionMismatch: for an invalid subset
    """
    if not bundle.is_differentiated:
        raise ValueError("coupling matrices need an aligned and differentiated bundle")
    S = list(_check_subset(bundle, subset))
    i = bundle.slice_index(u1)
    fields = slice_fields(bundle.grid, curve, frame, u1)
    D_field, D_dot = fields.D, fields.D_dot

    phi = bundle.modes[i][S]
    dphi = bundle.dmodes[i][S]
    d2phi = bundle.d2modes[i][S]
    inner = bundle.inner

    V = np.diag(bundle.v1[i] + bundle.energies[i][S])
    D, d_defect = hermitian_part(inner(phi, phi * D_field))
    C, c_defect = hermitian_part(inner(phi, phi * fields.C))

    F_all = full_derivative_coupling(bundle, D_field, i)
    F, _ = skew_part(F_all[np.ix_(S, S)])

    B = inner(phi, dphi * D_dot)
    E = inner(phi, d2phi * D_field)
    bracket = B + _adj(B) + E + _adj(E)
    G, g_defect = hermitian_part(0.5 * bracket - (F_all @ F_all)[np.ix_(S, S)])
    VBH, _ = hermitian_part(0.5 * F @ F - 0.25 * bracket)

    last = bundle.n_modes - 1
    tail = 0.0 if last in S else float(np.max(np.abs(np.outer(F_all[S, last], F_all[last, S]))))
    if max(d_defect, c_defect, g_defect) > 1e-10:
        logger.debug(
            "symmetrized couplings at u1=%g: D %.1e, C %.1e, G %.1e", u1, d_defect, c_defect, g_defect
        )

    return CouplingSlice(
        u1=float(u1),
        subset=tuple(S),
        V=V,
        D=D,
        C=C,
        F=F,
        G=G,
        VBH=VBH,
        kappa=fields.kappa,
        VBH0=_flat_born_huang(bundle, S, i),
        diagnostics={"g_tail": tail, "d_defect": d_defect, "c_defect": c_defect, "g_defect": g_defect},
    )


def compute_couplings(
    bundle: ModeBundle,
    frame: TangFrame | None,
    curve: CurveSpec,
    subset: Sequence[int],
    threads: int = 1,
) -> CouplingSet:
    """Exact couplings on every slice of the bundle, stacked into a CouplingSet."""
    subset = _check_subset(bundle, subset)

    def work(u1):
        return coupling_matrices_exact(bundle, frame, curve, subset, float(u1))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bundle.slices))
    else:
        parts = [work(u1) for u1 in bundle.slices]

    tail = max(p.diagnostics["g_tail"] for p in parts)
    if tail > 1e-6:
        logger.info("completeness tail of G reaches %.2e; consider more buffer modes", tail)
    couplings = CouplingSet.from_slices(parts)
    couplings.check_symmetries()
    return couplings


def born_huang_flat(bundle: ModeBundle, subset: Sequence[int], u1: float) -> np.ndarray:
    """
    Born-Huang potential of a straight guide, 1/2 <d phi|(1 - P_S)|d phi>.

    Only valid for kappa = 0, where it cross-checks the quadrature route.
    """
    return _flat_born_huang(bundle, list(_check_subset(bundle, subset)), bundle.slice_index(u1))


def _flat_born_huang(bundle: ModeBundle, S: list[int], i: int) -> np.ndarray:
    dphi = bundle.dmodes[i][S]
    overlap = bundle.inner(bundle.modes[i][S], dphi)
    projected = _adj(overlap) @ overlap
    return hermitian_part(0.5 * (bundle.inner(dphi, dphi) - projected))[0]
