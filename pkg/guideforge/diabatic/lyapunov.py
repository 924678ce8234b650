"""
Lyapunov equation {D, S} = 2F for the diabatization generator.
"""

import numpy as np
import scipy.linalg

from ..errors import DimensionMismatch, NotPositiveDefinite


def solve_lyapunov(D: np.ndarray, F: np.ndarray) -> np.ndarray:
    """
    Solve D S + S D = 2 F by diagonalizing D.

    With D = U diag(d) U^H the rotated solution is S'_ij = 2 F'_ij / (d_i + d_j),
    which is unique whenever D is positive-definite.

    Args:
        D: Hermitian positive-definite matrix, or a stack (..., n, n)
        F: skew-Hermitian matrix of the same shape

    Returns:
        Skew-Hermitian S

    Raises:
        NotPositiveDefinite: if D has an eigenvalue <= 0
        DimensionMismatch: if the shapes differ

    Example:
        >>> solve_lyapunov(np.diag([1.0, 3.0]), f * J)  # -> (f / 2) * J
    """
    D, F = np.asarray(D), np.asarray(F)
    if D.shape != F.shape or D.shape[-1] != D.shape[-2]:
        raise DimensionMismatch(f"D {D.shape} and F {F.shape} must be matching square matrices")
    if D.ndim > 2:
        return np.stack([solve_lyapunov(d, f) for d, f in zip(D, F)])

    d, U = scipy.linalg.eigh(0.5 * (D + D.conj().T))
    if np.min(d) <= 0:
        raise NotPositiveDefinite(f"metric weight matrix has eigenvalue {np.min(d):.3e}")
    rotated = U.conj().T @ F @ U
    S = U @ (2.0 * rotated / (d[:, None] + d[None, :])) @ U.conj().T
    return 0.5 * (S - S.conj().T)


def lyapunov_residual(D: np.ndarray, F: np.ndarray, S: np.ndarray) -> float:
    """Frobenius norm of D S + S D - 2 F."""
    return float(np.linalg.norm(D @ S + S @ D - 2.0 * F))


def commutator_rate(Fp: np.ndarray, D: np.ndarray, slices: np.ndarray) -> np.ndarray:
    """u1 derivative of [F', D] by second-order differences across slices."""
    return np.gradient(Fp @ D - D @ Fp, slices, axis=0, edge_order=2)


def primed_kinetic(D: np.ndarray, F: np.ndarray, slices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    F' and C' of the merged kinetic form over all slices.

    F' solves F' D + D F' = 2F and C' = F^2 + 1/2 d[F',D] - F' D F'.
    """
    Fp = solve_lyapunov(D, F)
    Cp = F @ F + 0.5 * commutator_rate(Fp, D, slices) - Fp @ D @ Fp
    return Fp, 0.5 * (Cp + np.conj(np.swapaxes(Cp, -1, -2)))
