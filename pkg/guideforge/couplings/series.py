"""
Coupling matrices from truncated expansions in powers of kappa nhat.

Every matrix is assembled from MomentTable entries, so the cost per slice is
a handful of small matrix products. Each retained term is kept in a ledger
keyed ``"<matrix>:<order>"``, which answers which correction dominates the
adiabatic expansion on a given slice.
"""

import logging
from typing import Sequence

import numpy as np

from ..errors import SeriesDomainError
from ..geometry.curve import CurveSpec
from ..transverse.bundle import ModeBundle
from .exact import _check_subset
from .moments import ORDER_CAP, MomentTable
from .types import CouplingSlice, hermitian_part, skew_part

logger = logging.getLogger(__name__)


class _Ledger(dict):
    def add(self, key: str, term: np.ndarray) -> np.ndarray:
        self[key] = self[key] + term if key in self else term
        return term


def _tri(l: int) -> float:
    return (l + 1) * (l + 2) / 2


def _tet(l: int) -> float:
    return (l + 1) * (l + 2) * (l + 3) / 6


def coupling_matrices_series(
    bundle: ModeBundle,
    moments: MomentTable,
    curve: CurveSpec,
    order: int,
    u1: float,
    subset: Sequence[int] | None = None,
) -> CouplingSlice:
    """
    Series approximation of the coupling matrices on one slice.

    Order 0 gives D = 1, F = <phi|d phi>, G = 0 and C = kappa^2/4; order 1
    adds the first moments of nhat and bhat to C.

    Args:
        bundle: aligned and differentiated mode bundle
        moments: table built with at least this order
        curve: curve data
        order: truncation order, at most ORDER_CAP
        u1: slice position
        subset: modes to keep (all bundle modes by default)

    Returns:
        CouplingSlice with the term ledger filled in

    Raises:
        SeriesDomainError: if |kappa nhat| reaches 1 where the subset lives
    """
    if order < 0 or order > min(ORDER_CAP, moments.order_cap - 1):
        raise ValueError(f"series order {order} not covered by the moment table")
    S = list(_check_subset(bundle, range(bundle.n_modes) if subset is None else subset))
    i = moments.slice_index(u1)
    v = curve.evaluate(u1)
    kappa, tau = float(v.kappa), float(v.tau)
    kdot, kddot, tdot = float(v.kappa_dot), float(v.kappa_ddot), float(v.tau_dot)

    reach = abs(kappa) * moments.reach(i, S)
    if reach >= 1.0:
        raise SeriesDomainError(f"|kappa| rho = {reach:.3f} >= 1 at u1={u1:g}; the series diverges")

    ix = np.ix_(S, S)
    others = [m for m in range(bundle.n_modes) if m not in S]

    def E(l, k):
        return moments.entries[(l, k)][i][ix]

    ledger = _Ledger()

    # === METRIC WEIGHT ===
    D = sum(ledger.add(f"D:{l}", (l + 1) * kappa**l * E(l, 0)) for l in range(order + 1))

    # === CURVATURE POTENTIAL ===
    C = np.zeros_like(D)
    for l in range(max(order - 1, 0) + 1):
        C = C + ledger.add(f"C:{0 if l == 0 else l + 1}", 0.25 * kappa**2 * (l + 1) * kappa**l * E(l, 0))
    for l in range(order):
        term = 0.5 * _tri(l) * kappa**l * (kddot * E(l + 1, 0) + (2 * kdot * tau + kappa * tdot) * E(l, 1))
        term = term + 1.25 * _tet(l) * kappa**l * (kdot**2 * E(l + 2, 0) + kappa**2 * tau**2 * E(l, 2))
        C = C + ledger.add(f"C:{l + 1}", term)
    for l in range(order - 1):
        term = -0.5 * tau**2 * _tri(l) * kappa ** (l + 1) * E(l + 1, 0)
        term = term + 2.5 * kdot * tau * _tet(l) * kappa ** (l + 1) * E(l + 1, 1)
        C = C + ledger.add(f"C:{l + 2}", term)

    # === DERIVATIVE COUPLINGS (all modes, restricted at the end) ===
    A = [moments.first[(l, 0)][i] for l in range(order + 1)]
    F_all = A[0].copy()
    ledger.add("F:0", A[0][ix])
    for l in range(1, order + 1):
        term = 0.5 * (l + 1) * kappa**l * (A[l] - A[l].T)
        F_all = F_all + term
        ledger.add(f"F:{l}", term[ix])

    G_all = np.zeros_like(F_all)
    for l in range(1, order + 1):
        Bl = moments.first[(l, 0)][i]
        term = 0.5 * kdot * l * (l + 1) * kappa ** (l - 1) * (Bl + Bl.T)
        mixed = moments.first[(l - 1, 1)][i]
        term = term + 0.5 * tau * l * (l + 1) * kappa**l * (mixed + mixed.T)
        sec = moments.second[(l, 0)][i]
        term = term + 0.5 * (l + 1) * kappa**l * (sec + sec.T)
        G_all = G_all + term
        ledger.add(f"G:{l}", term[ix])
    for l in range(order + 1):
        for lp in range(order + 1):
            if l == 0 and lp == 0:
                continue
            term = 0.25 * (l + 1) * (lp + 1) * kappa ** (l + lp) * (
                A[l] @ A[lp].T + A[l].T @ A[lp] - A[l] @ A[lp] - A[l].T @ A[lp].T
            )
            G_all = G_all + term
            ledger.add(f"G:{max(l, lp)}", term[ix])

    F, _ = skew_part(F_all[ix])
    G, _ = hermitian_part(G_all[ix])
    outside = F_all[np.ix_(S, others)] @ F_all[np.ix_(others, S)] if others else np.zeros_like(G)
    VBH, _ = hermitian_part(-0.5 * (G + outside))

    return CouplingSlice(
        u1=float(u1),
        subset=tuple(S),
        V=np.diag(bundle.v1[i] + bundle.energies[i][S]),
        D=hermitian_part(D)[0],
        C=hermitian_part(C)[0],
        F=F,
        G=G,
        VBH=VBH,
        kappa=kappa,
        ledger=dict(ledger),
        diagnostics={"series_reach": reach, "order": float(order)},
    )
