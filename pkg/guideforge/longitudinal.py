"""
Low-lying spectrum of an assembled effective Hamiltonian.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from .effective.assemble import EffectiveHamiltonian
from .errors import ConvergenceFailure
from .transverse.hamiltonian import DENSE_LIMIT, RESIDUAL_TOL, gershgorin_floor

logger = logging.getLogger(__name__)


@dataclass
class SpectralResult:
    """
    Eigenvalues and per-mode longitudinal profiles of one tier.

    ``profiles`` has shape (n_states, n_modes, N_interior) and is normalized
    so that sum_m sum_i |psi_m(u_i)|^2 du = 1.
    """
    tier: str
    slices: np.ndarray
    eigenvalues: np.ndarray
    profiles: np.ndarray
    threshold: float
    residuals: np.ndarray

    @property
    def n_states(self) -> int:
        return self.eigenvalues.size

    @property
    def spacing(self) -> float:
        return float(self.slices[1] - self.slices[0])

    @property
    def channel_weights(self) -> np.ndarray:
        """int |psi_m|^2 du1 per state and mode, shape (n_states, n_modes)."""
        return np.sum(np.abs(self.profiles) ** 2, axis=-1) * self.spacing

    @property
    def bound(self) -> np.ndarray:
        """States below the lowest channel threshold at the guide ends."""
        return self.eigenvalues < self.threshold

    def norms(self) -> np.ndarray:
        return self.channel_weights.sum(axis=1)

    def summary(self) -> str:
        lines = [f"{self.tier}: threshold {self.threshold:.6f}"]
        for k, (e, b) in enumerate(zip(self.eigenvalues, self.bound)):
            lines.append(f"  E{k + 1} = {e:.8f}{'  (bound)' if b else ''}")
        return "\n".join(lines)


def channel_threshold(H: EffectiveHamiltonian) -> float:
    """Lowest diagonal potential entry on the two end slices."""
    ends = H.effective_potential()[[0, -1]]
    return float(np.min(ends))


def solve_spectrum(
    H: EffectiveHamiltonian,
    n_states: int,
    residual_tol: float = RESIDUAL_TOL,
    v0: np.ndarray | None = None,
) -> SpectralResult:
    """
    Lowest eigenpairs of the assembled operator.

    Small operators go through dense ``eigh``; larger ones through
    shift-invert Lanczos below the Gershgorin floor.

    Args:
        H: assembled effective Hamiltonian
        n_states: number of eigenpairs
        residual_tol: bound on |H psi - E psi| / max(1, |E|)
        v0: Lanczos starting vector

    Returns:
        SpectralResult with ascending eigenvalues

    Raises:
        ConvergenceFailure: if the iteration fails or residuals exceed the bound
    """
    size = H.dimension
    if n_states < 1 or n_states > size:
        raise ValueError(f"cannot compute {n_states} states of an operator of size {size}")
    matrix = H.assembled

    if size <= DENSE_LIMIT or n_states >= size - 1:
        values, vectors = scipy.linalg.eigh(matrix.toarray(), subset_by_index=[0, n_states - 1])
    else:
        sigma = gershgorin_floor(matrix) - 1.0
        try:
            values, vectors = eigsh(matrix, k=n_states, sigma=sigma, which="LM", v0=v0, tol=0.0)
        except (ArpackNoConvergence, ArpackError) as exc:
            raise ConvergenceFailure(f"longitudinal eigensolver failed: {exc}") from exc
    order = np.argsort(values)
    values, vectors = values[order], vectors[:, order]

    residuals = np.linalg.norm(matrix @ vectors - vectors * values, axis=0) / np.maximum(1.0, np.abs(values))
    if np.max(residuals) > residual_tol:
        raise ConvergenceFailure(f"longitudinal eigen-residual {np.max(residuals):.2e} exceeds {residual_tol:.1e}")

    n = H.n_modes
    interior = size // n
    profiles = vectors.T.reshape(n_states, interior, n).transpose(0, 2, 1) / np.sqrt(H.spacing)
    result = SpectralResult(
        tier=str(H.tier),
        slices=H.interior.copy(),
        eigenvalues=values,
        profiles=profiles,
        threshold=channel_threshold(H),
        residuals=residuals,
    )
    logger.info("%s: lowest eigenvalue %.8f (%d bound)", H.tier, values[0], int(np.sum(result.bound)))
    return result
