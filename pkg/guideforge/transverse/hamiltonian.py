"""
Transverse Hamiltonian H_perp = -1/2 Laplacian + V_perp on one slice.
"""

import logging
import warnings

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from ..errors import ConvergenceFailure, DegeneracyNotice, DimensionMismatch, InvalidTube
from ..geometry.curve import CurveSpec
from ..geometry.metric import frenet_projections
from .grid import TransverseGrid
from .potential import CrossSectionPotential

logger = logging.getLogger(__name__)

MODE_CAP = 16
RESIDUAL_TOL = 1e-9
DEGENERACY_TOL = 1e-8
# Problems up to this many unknowns go to the dense solver
DENSE_LIMIT = 600


# Central second-derivative weights: centre, then offsets 1, 2, ...
SECOND_DERIVATIVE = {
    2: (-2.0, 1.0),
    4: (-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0),
    6: (-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0),
}


def laplacian_1d(n: int, h: float, order: int = 2) -> sp.csr_matrix:
    """
    Second-derivative matrix on n interior points with walls at indices -1 and n.

    Stencil points beyond a wall are folded back by odd reflection, so the
    matrix stays symmetric and negative definite at every order.
    """
    if order not in SECOND_DERIVATIVE:
        raise ValueError(f"stencil order must be one of {sorted(SECOND_DERIVATIVE)}, got {order}")
    weights = SECOND_DERIVATIVE[order]
    reach = len(weights) - 1
    if n <= reach:
        raise ValueError(f"an order-{order} stencil needs more than {reach} points per axis")
    bands = [weights[0] * np.ones(n)]
    offsets = [0]
    for k in range(1, reach + 1):
        bands += [weights[k] * np.ones(n - k)] * 2
        offsets += [-k, k]
    L = sp.diags(bands, offsets, format="lil")
    for p in range(n):
        for k in range(2, reach + 1):
            if p - k <= -2:
                L[p, k - p - 2] -= weights[k]
            if p + k >= n + 1:
                L[p, 2 * n - p - k] -= weights[k]
    return L.tocsr() / h**2


def laplacian(grid: TransverseGrid, order: int = 2) -> sp.csr_matrix:
    """Dirichlet Laplacian of the given stencil order, u2 as the slow index."""
    lx = laplacian_1d(grid.nx, grid.hx, order)
    ly = laplacian_1d(grid.ny, grid.hy, order)
    return (sp.kron(lx, sp.identity(grid.ny)) + sp.kron(sp.identity(grid.nx), ly)).tocsr()


def check_tube(grid: TransverseGrid, curve: CurveSpec, theta: float, u1: float) -> None:
    """Raise InvalidTube if 1 - kappa nhat <= 0 anywhere on the grid."""
    X, Y = grid.mesh
    nhat, _ = frenet_projections(theta, X, Y)
    w = 1.0 - float(curve.kappa(u1)) * nhat
    if np.any(w <= 0):
        raise InvalidTube(
            f"{int(np.sum(w <= 0))} transverse grid points leave the tube at u1={u1:g} "
            f"(kappa={float(curve.kappa(u1)):g}); shrink the transverse extent"
        )


def active_points(grid: TransverseGrid, pot: CrossSectionPotential, u1: float) -> np.ndarray:
    """Boolean mask of unknowns that survive hard-wall elimination."""
    X, Y = grid.mesh
    mask = pot.box_mask(X, Y, u1)
    return np.ones(grid.size, dtype=bool) if mask is None else mask


def build_transverse_hamiltonian(
    grid: TransverseGrid,
    pot: CrossSectionPotential,
    u1: float,
    curve: CurveSpec | None = None,
    theta: float = 0.0,
    stencil_order: int = 2,
) -> sp.csr_matrix:
    """
    Assemble H_perp on the active grid points of one slice.

    Args:
        grid: transverse grid
        pot: cross-section potential
        u1: slice position
        curve: if given, tube validity is checked against it
        theta: Tang angle at u1
        stencil_order: order of the transverse Laplacian (2, 4 or 6)

    Returns:
        Exactly symmetric sparse matrix; rows of hard-wall points are eliminated

    Raises:
        InvalidTube: if a grid point violates 1 - kappa nhat > 0
    """
    if curve is not None:
        check_tube(grid, curve, theta, u1)
    X, Y = grid.mesh
    H = -0.5 * laplacian(grid, stencil_order) + sp.diags(pot.transverse(X, Y, u1))
    active = active_points(grid, pot, u1)
    if not np.all(active):
        idx = np.flatnonzero(active)
        H = H[idx][:, idx]
    H = H.tocsr()
    return ((H + H.T) * 0.5).tocsr()


def gershgorin_floor(H: sp.spmatrix) -> float:
    """Lower bound on the spectrum of a symmetric matrix."""
    diag = H.diagonal()
    offdiag = np.asarray(abs(H - sp.diags(diag)).sum(axis=1)).ravel()
    return float(np.min(diag - offdiag))


def _fix_sign(vectors: np.ndarray) -> np.ndarray:
    """Deterministic sign: positive sum, or positive largest entry for odd modes."""
    for row in vectors:
        total = row.sum()
        pivot = total if abs(total) > 1e-8 * np.abs(row).sum() else row[np.argmax(np.abs(row))]
        if pivot < 0:
            row *= -1.0
    return vectors


def solve_transverse_modes(
    H: sp.spmatrix,
    n_modes: int,
    mode_cap: int = MODE_CAP,
    residual_tol: float = RESIDUAL_TOL,
    degeneracy_tol: float = DEGENERACY_TOL,
    v0: np.ndarray | None = None,
    lower_bound: float | None = None,
) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    """
    Lowest eigenpairs of a transverse Hamiltonian.

    Args:
        H: sparse symmetric operator
        n_modes: number of eigenpairs
        mode_cap: configured upper bound on n_modes
        residual_tol: bound on |H phi - E phi| for unit phi, scaled by max(1, |E|)
        degeneracy_tol: adjacent energies closer than this are flagged
        v0: ARPACK starting vector (deterministic runs pass a seeded one)
        lower_bound: known floor of the spectrum, used as the shift-invert
            target; the Gershgorin floor otherwise

    Returns:
        (energies ascending, eigenvectors as rows with unit 2-norm, degenerate pairs)

    Raises:
        DimensionMismatch: if n_modes exceeds the cap or the operator size
        ConvergenceFailure: if the iteration fails or residuals are too large
    """
    if n_modes > mode_cap:
        raise DimensionMismatch(f"requested {n_modes} modes, cap is {mode_cap}")
    size = H.shape[0]
    if n_modes >= size:
        raise DimensionMismatch(f"requested {n_modes} modes from an operator of size {size}")

    if size <= DENSE_LIMIT:
        energies, vectors = scipy.linalg.eigh(H.toarray(), subset_by_index=[0, n_modes - 1])
    else:
        floor = gershgorin_floor(H) if lower_bound is None else lower_bound
        sigma = floor - 1.0
        try:
            energies, vectors = eigsh(H, k=n_modes, sigma=sigma, which="LM", v0=v0, tol=0.0)
        except (ArpackNoConvergence, ArpackError) as exc:
            raise ConvergenceFailure(f"transverse eigensolver failed: {exc}") from exc
    order = np.argsort(energies)
    energies, vectors = energies[order], vectors[:, order].T.copy()

    residual = np.linalg.norm(H @ vectors.T - vectors.T * energies, axis=0)
    worst = float(np.max(residual / np.maximum(1.0, np.abs(energies))))
    if worst > residual_tol:
        raise ConvergenceFailure(f"transverse eigen-residual {worst:.2e} exceeds {residual_tol:.1e}")

    pairs = [(m, m + 1) for m in range(n_modes - 1) if energies[m + 1] - energies[m] < degeneracy_tol]
    if pairs:
        warnings.warn(f"degenerate transverse pairs {pairs}", DegeneracyNotice, stacklevel=2)
        logger.debug("degenerate transverse pairs %s", pairs)
    return energies, _fix_sign(vectors), pairs
