"""
Finite-difference assembly of the effective longitudinal Hamiltonian.

Every tier is written as

    H = -1/2 [ d K d + {Phi, d} ] + P

with a Hermitian kinetic weight K, a skew-Hermitian first-derivative
coupling Phi and a Hermitian potential block P, all sampled per slice. The
coupled tiers are discretized in the equivalent covariant form

    H = -1/2 (d + W) K (d + W) + Q,    {K, W} = 2 Phi,

where d + W becomes a difference across slices with link unitaries. A local
basis change then acts on the assembled matrix as plain block conjugation.
The unknowns are the amplitudes psi_m on the interior slices (Dirichlet
ends), ordered slice-major: index = (slice - 1) * n + m.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..couplings.types import CouplingSet, hermitian_part
from ..diabatic.gauge import transport_links
from ..diabatic.lyapunov import commutator_rate, primed_kinetic
from ..errors import DimensionMismatch, MissingPrimedMatrices
from .tiers import ApproximationTier, TierTag

logger = logging.getLogger(__name__)

HERMITICITY_TOL = 1e-12


@dataclass
class EffectiveHamiltonian:
    """
    Discretized effective Hamiltonian of one tier.

    ``potential``, ``coupling`` and ``weight`` are the per-slice blocks
    P, Phi and K of shape (N, n, n) over all slices including the ends;
    ``covariant_potential`` is Q and ``links`` the N - 1 slice links of the
    covariant form. ``assembled`` is the sparse operator on the interior
    slices.
    """
    tier: ApproximationTier
    slices: np.ndarray
    potential: np.ndarray
    coupling: np.ndarray
    weight: np.ndarray
    assembled: sp.csr_matrix
    covariant_potential: np.ndarray | None = None
    links: np.ndarray | None = None

    @property
    def n_modes(self) -> int:
        return self.potential.shape[-1]

    @property
    def interior(self) -> np.ndarray:
        return self.slices[1:-1]

    @property
    def spacing(self) -> float:
        return float(self.slices[1] - self.slices[0])

    @property
    def dimension(self) -> int:
        return self.assembled.shape[0]

    def hermiticity_defect(self) -> float:
        diff = self.assembled - self.assembled.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def effective_potential(self) -> np.ndarray:
        """Diagonal of the potential block per slice, shape (N, n)."""
        return np.real(np.diagonal(self.potential, axis1=1, axis2=2))


def block_tridiagonal(diag: np.ndarray, upper: np.ndarray) -> sp.csr_matrix:
    """
    Sparse Hermitian matrix from diagonal blocks and the blocks above them.

    The blocks below the diagonal are the adjoints of ``upper``.
    """
    count, n = diag.shape[0], diag.shape[-1]
    local_r = np.repeat(np.arange(n), n)
    local_c = np.tile(np.arange(n), n)
    base = (np.arange(count) * n)[:, None]
    lower = np.conj(np.swapaxes(upper, -1, -2))

    rows = [(base + local_r).ravel(), (base[:-1] + local_r).ravel(), (base[:-1] + n + local_r).ravel()]
    cols = [(base + local_c).ravel(), (base[:-1] + n + local_c).ravel(), (base[:-1] + local_c).ravel()]
    values = [diag.ravel(), upper.ravel(), lower.ravel()]
    size = count * n
    matrix = sp.coo_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    )
    return matrix.tocsr()


def discretize(potential: np.ndarray, weight: np.ndarray, links: np.ndarray, spacing: float) -> sp.csr_matrix:
    """
    Second-order covariant stencil for -1/2 (d + W) K (d + W) + Q.

    The difference (U_i psi_i+1 - psi_i) / du is weighted by the midpoint
    average (K_i + U_i K_i+1 U_i^H) / 2, so with unit links this is the
    conservative midpoint form of d K d. Under psi -> A psi, K -> A K A^H and
    U_i -> A_i U_i A_i+1^H the matrix changes by block conjugation exactly.
    """
    if potential.shape[0] < 3:
        raise ValueError("the longitudinal grid needs at least one interior slice")
    if links.shape[0] != potential.shape[0] - 1:
        raise DimensionMismatch(f"{links.shape[0]} links for {potential.shape[0]} slices")
    h2 = spacing**2
    back = np.conj(np.swapaxes(links, -1, -2))
    mid = 0.5 * (weight[:-1] + links @ weight[1:] @ back)
    diag = potential[1:-1] + 0.5 * (mid[1:] + back[:-1] @ mid[:-1] @ links[:-1]) / h2
    upper = -0.5 * (mid[1:-1] @ links[1:-1]) / h2
    diag, _ = hermitian_part(diag)
    return block_tridiagonal(diag, upper)


def _blocks(couplings: CouplingSet, tier: ApproximationTier) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    tag = tier.tag
    n = couplings.n_modes
    eye = np.broadcast_to(np.eye(n), couplings.D.shape)
    zero = np.zeros_like(couplings.D)
    geometric = -0.125 * couplings.kappa[:, None, None] ** 2 * eye

    if tag is TierTag.BORN_OPPENHEIMER:
        diag_V = np.diagonal(couplings.V, axis1=1, axis2=2)
        return np.real(diag_V)[:, :, None] * np.eye(n) + geometric, zero, eye.copy()

    if tag is TierTag.SINGLE_MODE_BH:
        lowest = couplings.VBH0 if couplings.VBH0 is not None else zero
        if couplings.VBH0 is None:
            logger.warning("no lowest-order Born-Huang data; single_mode_bh falls back to zero")
        return couplings.V + geometric + lowest, zero, eye.copy()

    F, D = couplings.F, couplings.D
    if tag is TierTag.SUBSET_BH:
        return couplings.V + couplings.VBH - 0.5 * couplings.C - 0.5 * F @ F, F, D

    if tag is TierTag.FULL_COUPLED:
        return couplings.V - 0.5 * (F @ F + couplings.G + couplings.C), F, D

    if not couplings.has_primed:
        raise MissingPrimedMatrices("the merged tier needs F' and V'_BH; run merge_kinetic first")
    Fp = couplings.Fp
    extra = Fp @ D @ Fp - 0.5 * commutator_rate(Fp, D, couplings.slices)
    potential = couplings.V + couplings.VpBH - 0.5 * couplings.C - 0.5 * extra
    return potential, 0.5 * (Fp @ D + D @ Fp), D


def _covariant(couplings: CouplingSet, tier: ApproximationTier, potential: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Q and the slice links; Q = P + (Phi^2 - C') / 2 on the coupled tiers."""
    tag = tier.tag
    n = couplings.n_modes
    if tag in (TierTag.BORN_OPPENHEIMER, TierTag.SINGLE_MODE_BH):
        return potential, np.broadcast_to(np.eye(n), (couplings.n_slices - 1, n, n)).copy()

    if couplings.has_primed and couplings.Cp is not None:
        Fp, Cp = couplings.Fp, couplings.Cp
    else:
        Fp, Cp = primed_kinetic(couplings.D, couplings.F, couplings.slices)
    links = couplings.links if couplings.links is not None else transport_links(Fp, couplings.slices)

    if tag is TierTag.SUBSET_BH:
        Q = couplings.V + couplings.VBH - 0.5 * (couplings.C + Cp)
    elif tag is TierTag.FULL_COUPLED:
        Q = couplings.V - 0.5 * (couplings.G + couplings.C + Cp)
    else:
        Q = couplings.V + couplings.VpBH - 0.5 * couplings.C
    return hermitian_part(Q)[0], links


def assemble_effective(couplings: CouplingSet, tier: ApproximationTier) -> EffectiveHamiltonian:
    """
    Assemble the effective Hamiltonian of one tier over the tier's modes.

    Args:
        couplings: coupling set over all slices, computed for ``tier.subset``
        tier: approximation tier

    Returns:
        EffectiveHamiltonian with Hermitian ``assembled`` operator

    Raises:
        MissingPrimedMatrices: merged tier without merge_kinetic data
        DimensionMismatch: if the coupling set was computed for other modes

    Example:
        >>> H = assemble_effective(couplings, ApproximationTier(TierTag.SUBSET_BH, (0, 1)))
        >>> H.assembled.shape  # (2 * (N - 2), 2 * (N - 2))
    """
    if tuple(tier.subset) != tuple(couplings.subset):
        raise DimensionMismatch(
            f"tier acts on modes {list(tier.subset)} but couplings were computed for {list(couplings.subset)}"
        )

    potential, coupling, weight = _blocks(couplings, tier)
    Q, links = _covariant(couplings, tier, potential)
    H = EffectiveHamiltonian(
        tier=tier,
        slices=couplings.slices.copy(),
        potential=potential,
        coupling=coupling,
        weight=weight,
        assembled=discretize(Q, weight, links, couplings.spacing),
        covariant_potential=Q,
        links=links,
    )
    defect = H.hermiticity_defect()
    if defect > HERMITICITY_TOL:
        logger.warning("%s operator Hermiticity defect %.1e", tier, defect)
    logger.debug("assembled %s: dimension %d", tier, H.dimension)
    return H

