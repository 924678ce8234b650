"""
Local unitary basis changes of the mode subset.

A(u1) rotates the adiabatic modes among themselves, phi~ = A phi, and obeys
dA/du1 = A S. The adjoint is marched toward increasing u1 as a product of
midpoint exponentials, A^H(u1 + du) = exp(-S_mid du) A^H(u1), with a polar
projection back onto the unitary group after every step.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.integrate import cumulative_trapezoid

from ..couplings.fields import slice_fields
from ..couplings.types import CouplingSet, hermitian_part, skew_part
from ..errors import DimensionMismatch, UnitarityDrift
from ..geometry.curve import CurveSpec
from ..geometry.frame import TangFrame
from ..transverse.bundle import ModeBundle
from .lyapunov import primed_kinetic

logger = logging.getLogger(__name__)

POLAR_TOL = 1e-6
CLOSED_FORM_TOL = 1e-8


def _adj(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def _anti(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


@dataclass
class GaugeField:
    """
    Unitaries A(u1) with their generator S = A^H dA/du1.

    ``gamma`` is the mixing angle of a real two-mode rotation and
    ``residual_F`` the derivative coupling left over in the rotated basis.
    ``closed_form_gap`` is the largest entrywise distance between the
    path-ordered product and the closed-form rotation, two real modes only.
    """
    slices: np.ndarray
    S: np.ndarray
    A: np.ndarray
    gamma: np.ndarray | None = None
    residual_F: np.ndarray | None = None
    polar_corrections: np.ndarray | None = None
    closed_form_gap: float | None = None

    @classmethod
    def identity(cls, slices: np.ndarray, n: int) -> "GaugeField":
        eye = np.broadcast_to(np.eye(n), (len(slices), n, n)).copy()
        return cls(slices=np.asarray(slices, dtype=float), S=np.zeros_like(eye), A=eye)

    @classmethod
    def from_unitaries(cls, slices: np.ndarray, A: np.ndarray) -> "GaugeField":
        """Gauge from tabulated unitaries; S is recovered by finite differences."""
        slices = np.asarray(slices, dtype=float)
        dA = np.gradient(A, slices, axis=0, edge_order=2)
        S, _ = skew_part(_adj(A) @ dA)
        return cls(slices=slices, S=S, A=np.asarray(A))

    @property
    def n_modes(self) -> int:
        return self.A.shape[-1]

    def unitarity_defect(self) -> float:
        eye = np.eye(self.n_modes)
        return float(np.max(np.abs(_adj(self.A) @ self.A - eye)))

    def derivative_residual(self) -> float:
        """max |dA/du1 - A S| with dA/du1 by centered differences."""
        dA = np.gradient(self.A, self.slices, axis=0, edge_order=2)
        return float(np.max(np.abs(dA - self.A @ self.S)))


def adiabatic_to_diabatic(
    S: np.ndarray,
    slices: np.ndarray,
    A0: np.ndarray | None = None,
    F: np.ndarray | None = None,
    D: np.ndarray | None = None,
) -> GaugeField:
    """
    Integrate dA/du1 = A S from A(slices[0]) = A0.

    Args:
        S: skew-Hermitian generators, shape (N, n, n)
        slices: ordered u1 samples
        A0: initial unitary (identity by default)
        F, D: adiabatic couplings; when given the residual coupling is
            recorded and, for two real modes, the closed-form mixing
            angle gamma = 2 int F_12 / (D_11 + D_22) is cross-checked

    Returns:
        GaugeField over the same slices

    Raises:
        UnitarityDrift: if one step needs a polar correction above 1e-6, or
            the two-mode product strays from the closed form by more than 1e-8
    """
    S = np.asarray(S)
    slices = np.asarray(slices, dtype=float)
    n = S.shape[-1]
    if S.shape[0] != slices.size:
        raise DimensionMismatch(f"{S.shape[0]} generators for {slices.size} slices")
    A0 = np.eye(n) if A0 is None else np.asarray(A0)
    if np.max(np.abs(_adj(A0) @ A0 - np.eye(n))) > 1e-10:
        raise ValueError("initial basis change is not unitary")

    adjoint = np.empty(S.shape, dtype=np.result_type(S, A0))
    adjoint[0] = _adj(A0)
    corrections = np.zeros(slices.size - 1)
    for i in range(slices.size - 1):
        step = slices[i + 1] - slices[i]
        nxt = scipy.linalg.expm(-0.5 * (S[i] + S[i + 1]) * step) @ adjoint[i]
        unitary, positive = scipy.linalg.polar(nxt)
        corrections[i] = float(np.max(np.abs(positive - np.eye(n))))
        if corrections[i] > POLAR_TOL:
            raise UnitarityDrift(
                f"polar correction {corrections[i]:.2e} between u1={slices[i]:g} and {slices[i + 1]:g}"
            )
        adjoint[i + 1] = unitary
    logger.debug("path-ordered product: largest polar correction %.2e", corrections.max(initial=0.0))

    gauge = GaugeField(slices=slices, S=S, A=_adj(adjoint), polar_corrections=corrections)

    if F is not None and D is not None:
        F, D = np.asarray(F), np.asarray(D)
        gauge.residual_F = gauge.A @ (F - 0.5 * _anti(D, S)) @ _adj(gauge.A)
        if n == 2 and np.isrealobj(F) and np.isrealobj(D):
            gauge.gamma = mixing_angle(F, D, slices)
            closed = rotation(gauge.gamma) @ _adj(A0)
            gauge.closed_form_gap = float(np.max(np.abs(closed - adjoint)))
            logger.debug("two-mode closed form vs product: %.2e", gauge.closed_form_gap)
            if gauge.closed_form_gap > CLOSED_FORM_TOL:
                raise UnitarityDrift(
                    f"path-ordered product differs from the closed-form rotation by {gauge.closed_form_gap:.2e}"
                )
    return gauge


def mixing_angle(F: np.ndarray, D: np.ndarray, slices: np.ndarray) -> np.ndarray:
    """gamma(u1) = 2 int F_12 / (D_11 + D_22) du1 by the trapezoidal rule."""
    integrand = 2.0 * F[:, 0, 1] / (D[:, 0, 0] + D[:, 1, 1])
    return cumulative_trapezoid(integrand, slices, initial=0.0)


def rotation(gamma: np.ndarray) -> np.ndarray:
    """A^H for a two-mode rotation: [[cos, -sin], [sin, cos]] per angle."""
    c, s = np.cos(gamma), np.sin(gamma)
    return np.stack([np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=-2)


def transport_links(connection: np.ndarray, slices: np.ndarray) -> np.ndarray:
    """
    Unitaries U_i = exp(du (W_i + W_i+1) / 2) carrying slice i+1 to slice i.

    ``connection`` is the skew-Hermitian W of the covariant derivative
    d + W, shape (N, n, n); the result has shape (N - 1, n, n).
    """
    connection = np.asarray(connection)
    steps = np.diff(np.asarray(slices, dtype=float))
    mids = 0.5 * (connection[1:] + connection[:-1]) * steps[:, None, None]
    if not np.any(mids):
        return np.broadcast_to(np.eye(connection.shape[-1]), mids.shape).copy()
    return np.stack([scipy.linalg.expm(m) for m in mids])


def gauge_extra_terms(D: np.ndarray, S: np.ndarray, F: np.ndarray, dSD: np.ndarray) -> np.ndarray:
    """
    Extra terms shared by the transformed kinetic and Born-Huang parts.

    -1/4 {D,S}^2 + 1/2 {{D,S},F} + 1/2 d[S,D] - {S,F} + 1/2 {S^2,D}, where
    ``dSD`` is the u1 derivative of [S, D]. Vanishes identically for D = 1.
    """
    DS = _anti(D, S)
    return -0.25 * DS @ DS + 0.5 * _anti(DS, F) + 0.5 * dSD - _anti(S, F) + 0.5 * _anti(S @ S, D)


def gauge_transform(couplings: CouplingSet, gauge: GaugeField) -> CouplingSet:
    """
    Transform every coupling matrix to the basis phi~ = A phi.

    V, D, C and G conjugate plainly; F picks up -1/2 {D,S} and the
    Born-Huang potential the extra terms of ``gauge_extra_terms``. The
    result always carries the merged-kinetic matrices, F' -> A(F' - S)A^H and
    V'_BH by plain conjugation, together with the slice links
    A_i U_i A_i+1^H. Assembled from these, the coupled tiers reproduce
    ``conjugate_hamiltonian`` of the original operator up to rounding.

    Raises:
        DimensionMismatch: if slices or mode counts differ
    """
    if gauge.A.shape[0] != couplings.n_slices or gauge.n_modes != couplings.n_modes:
        raise DimensionMismatch(
            f"gauge {gauge.A.shape} does not match couplings ({couplings.n_slices}, {couplings.n_modes})"
        )
    if not np.allclose(gauge.slices, couplings.slices, rtol=0.0, atol=1e-9):
        raise DimensionMismatch("gauge and couplings are sampled on different slices")

    A, S = gauge.A, gauge.S
    Ah = _adj(A)

    def conj(x):
        return A @ x @ Ah

    D, F = couplings.D, couplings.F
    dSD = np.gradient(_comm(S, D), couplings.slices, axis=0, edge_order=2)
    extra = gauge_extra_terms(D, S, F, dSD)

    out = replace(
        couplings,
        V=hermitian_part(conj(couplings.V))[0],
        D=hermitian_part(conj(D))[0],
        C=hermitian_part(conj(couplings.C))[0],
        G=hermitian_part(conj(couplings.G))[0],
        F=skew_part(conj(F - 0.5 * _anti(D, S)))[0],
        VBH=hermitian_part(conj(couplings.VBH) - 0.5 * conj(extra))[0],
        VBH0=None,
    )
    if couplings.has_primed:
        Fp, VpBH = couplings.Fp, couplings.VpBH
    else:
        Fp, Cp = primed_kinetic(D, F, couplings.slices)
        VpBH = couplings.VBH - 0.5 * Cp
    links = couplings.links if couplings.links is not None else transport_links(Fp, couplings.slices)

    out.Fp = skew_part(conj(Fp - S))[0]
    out.VpBH = hermitian_part(conj(VpBH))[0]
    out.Cp = 2.0 * (out.VBH - out.VpBH)
    out.links = A[:-1] @ links @ Ah[1:]
    return out


def overlap_intermediates(
    bundle: ModeBundle,
    curve: CurveSpec,
    frame: TangFrame | None,
    subset,
    u1: float,
) -> tuple[np.ndarray, np.ndarray]:
    """
    L_ij = <d phi_i|D|phi_j> and Dring_ij = <phi_i|dD/du1|phi_j> on one slice.

    They satisfy 2F = L^H - L and d/du1 <phi|D|phi> = L + Dring + L^H.
    """
    S = list(subset)
    i = bundle.slice_index(u1)
    fields = slice_fields(bundle.grid, curve, frame, u1)
    phi, dphi = bundle.modes[i][S], bundle.dmodes[i][S]
    L = bundle.inner(dphi, phi * fields.D)
    Dring = hermitian_part(bundle.inner(phi, phi * fields.D_dot))[0]
    return L, Dring


def conjugate_hamiltonian(H, gauge: GaugeField):
    """
    Block conjugation A H A^H of an assembled longitudinal operator, as a sparse matrix.

    ``H`` is an EffectiveHamiltonian (or its assembled matrix) whose
    unknowns are the interior slices, slice-major. The result is unitarily
    equivalent to ``H`` by construction and serves as the exact reference
    for component-wise transformed couplings.
    """
    matrix = getattr(H, "assembled", H)
    blocks = sp.block_diag(list(gauge.A[1:-1]), format="csr")
    if blocks.shape != matrix.shape:
        raise DimensionMismatch(f"gauge blocks {blocks.shape} vs operator {matrix.shape}")
    conjugated = sp.csr_matrix(blocks @ matrix @ blocks.conj().T)
    return ((conjugated + conjugated.conj().T) * 0.5).tocsr()
