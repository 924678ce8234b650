"""
Brute-force 3D oracle: the full adapted-coordinate equation for chi on a
(u1, u2, u3) box, with Dirichlet walls on every face.

The rescaled wavefunction chi carries the flat measure du1 du2 du3, so the
discrete eigenvectors normalize with the cell volume alone.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from .couplings.fields import slice_fields
from .errors import ConvergenceFailure, InvalidTube, MemoryCap, TubeViolation
from .geometry.curve import CurveSpec
from .geometry.frame import TangFrame
from .transverse.grid import TransverseGrid
from .transverse.hamiltonian import RESIDUAL_TOL, active_points, gershgorin_floor, laplacian, solve_transverse_modes
from .transverse.potential import CrossSectionPotential

logger = logging.getLogger(__name__)

MAX_POINTS = 2_000_000


@dataclass(frozen=True)
class Grid3D:
    """
    Interior points of [u1_min, u1_max] x [-lx, lx] x [-ly, ly].

    Flattened with u1 as the slowest index, then u2, then u3.
    """
    n1: int
    nx: int
    ny: int
    lx: float
    ly: float
    u1_min: float
    u1_max: float

    @classmethod
    def for_curve(cls, curve: CurveSpec, n1: int, nx: int, ny: int, lx: float, ly: float) -> "Grid3D":
        return cls(n1=n1, nx=nx, ny=ny, lx=lx, ly=ly, u1_min=curve.u1_min, u1_max=curve.u1_max)

    @cached_property
    def transverse(self) -> TransverseGrid:
        return TransverseGrid(nx=self.nx, ny=self.ny, lx=self.lx, ly=self.ly)

    @property
    def h1(self) -> float:
        return (self.u1_max - self.u1_min) / (self.n1 + 1)

    @property
    def u1(self) -> np.ndarray:
        """Interior u1 samples."""
        return self.u1_min + self.h1 * np.arange(1, self.n1 + 1)

    @property
    def faces(self) -> np.ndarray:
        """Interior samples plus the two Dirichlet faces."""
        return self.u1_min + self.h1 * np.arange(self.n1 + 2)

    @property
    def size(self) -> int:
        return self.n1 * self.nx * self.ny

    @property
    def cell_volume(self) -> float:
        return self.h1 * self.transverse.weight

    def check_memory(self, cap: int = MAX_POINTS) -> None:
        if self.size > cap:
            raise MemoryCap(f"3D grid has {self.size} points, cap is {cap}")


@dataclass
class ReferenceResult:
    """
    Eigenvalues and chi fields, the latter shaped (n_states, n1, nx, ny).

    ``threshold`` is the channel threshold of the same discretization: the
    lowest transverse level on the two end faces.
    """
    grid: Grid3D
    eigenvalues: np.ndarray
    chi: np.ndarray
    residuals: np.ndarray
    threshold: float = np.nan

    @property
    def bound(self) -> np.ndarray:
        return self.eigenvalues < self.threshold

    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.chi) ** 2, axis=(1, 2, 3)) * self.grid.cell_volume

    def summary(self) -> str:
        g = self.grid
        head = f"reference3d on {g.n1}x{g.nx}x{g.ny}: threshold {self.threshold:.6f}"
        lines = [head]
        for k, (e, b) in enumerate(zip(self.eigenvalues, self.bound)):
            lines.append(f"  E{k + 1} = {e:.8f}{'  (bound)' if b else ''}")
        return "\n".join(lines)


def _fields(grid: Grid3D, curve: CurveSpec, frame: TangFrame | None, u1: float):
    try:
        return slice_fields(grid.transverse, curve, frame, u1)
    except InvalidTube as exc:
        raise TubeViolation(str(exc)) from exc


def assemble_reference(
    curve: CurveSpec,
    frame: TangFrame | None,
    pot: CrossSectionPotential,
    grid: Grid3D,
) -> tuple[sp.csr_matrix, np.ndarray]:
    """
    Sparse 3D operator and the mask of unknowns kept after hard-wall elimination.

    -1/2 [d1 (D d1) + lap_perp + C] + V1 + V_perp, where C holds the
    kappa^2/4 D term and both scalar corrections. The longitudinal part is
    conservative with D averaged at midpoints, so the matrix is symmetric.
    """
    grid.check_memory()
    tg = grid.transverse
    X, Y = tg.mesh
    P = tg.size

    faces = grid.faces
    weight = np.array([_fields(grid, curve, frame, float(u)).D for u in faces])
    mid = 0.5 * (weight[1:] + weight[:-1])  # (n1 + 1, P)

    scalar = np.empty((grid.n1, P))
    for k, u in enumerate(grid.u1):
        fields = _fields(grid, curve, frame, float(u))
        scalar[k] = -0.5 * fields.C + pot.longitudinal(float(u)) + pot.transverse(X, Y, float(u))

    h2 = grid.h1**2
    main = (scalar + 0.5 * (mid[:-1] + mid[1:]) / h2).ravel()
    off = (-0.5 * mid[1:-1] / h2).ravel()
    longitudinal = sp.diags([off, main, off], [-P, 0, P], shape=(grid.size, grid.size), format="csr")
    transverse = sp.kron(sp.identity(grid.n1), -0.5 * laplacian(tg), format="csr")
    H = (longitudinal + transverse).tocsr()

    keep = np.concatenate([active_points(tg, pot, float(u)) for u in grid.u1])
    if not np.all(keep):
        idx = np.flatnonzero(keep)
        H = H[idx][:, idx].tocsr()
    H = ((H + H.T) * 0.5).tocsr()
    return H, keep


def reference_threshold(
    curve: CurveSpec,
    frame: TangFrame | None,
    pot: CrossSectionPotential,
    grid: Grid3D,
) -> float:
    """
    Lowest level of -1/2 lap_perp + V_perp + V1 - C/2 on the two end faces,
    on the transverse grid and stencil of the 3D operator.
    """
    tg = grid.transverse
    X, Y = tg.mesh
    levels = []
    for u in (grid.u1_min, grid.u1_max):
        fields = _fields(grid, curve, frame, float(u))
        diag = pot.transverse(X, Y, float(u)) + pot.longitudinal(float(u)) - 0.5 * fields.C
        H = -0.5 * laplacian(tg) + sp.diags(diag)
        active = active_points(tg, pot, float(u))
        if not np.all(active):
            idx = np.flatnonzero(active)
            H = H[idx][:, idx]
        H = ((H + H.T) * 0.5).tocsr()
        energies, _, _ = solve_transverse_modes(H, 1, lower_bound=float(np.min(diag[active])))
        levels.append(float(energies[0]))
    return min(levels)


def solve_reference(
    curve: CurveSpec,
    frame: TangFrame | None,
    pot: CrossSectionPotential,
    grid: Grid3D,
    n_states: int = 1,
    residual_tol: float = RESIDUAL_TOL,
    seed: int = 0,
) -> ReferenceResult:
    """
    Lowest eigenvalues of the full 3D problem.

    Raises:
        TubeViolation: if a grid point has 1 - kappa nhat <= 0
        MemoryCap: if the grid exceeds MAX_POINTS
        ConvergenceFailure: if the eigensolver fails
    """
    H, keep = assemble_reference(curve, frame, pot, grid)
    sigma = gershgorin_floor(H) - 1.0
    v0 = np.random.default_rng(seed).standard_normal(H.shape[0])
    try:
        values, vectors = eigsh(H, k=n_states, sigma=sigma, which="LM", v0=v0, tol=0.0)
    except (ArpackNoConvergence, ArpackError) as exc:
        raise ConvergenceFailure(f"3D eigensolver failed: {exc}") from exc
    order = np.argsort(values)
    values, vectors = values[order], vectors[:, order]

    residuals = np.linalg.norm(H @ vectors - vectors * values, axis=0) / np.maximum(1.0, np.abs(values))
    if np.max(residuals) > residual_tol:
        raise ConvergenceFailure(f"3D eigen-residual {np.max(residuals):.2e} exceeds {residual_tol:.1e}")

    full = np.zeros((grid.size, n_states))
    full[keep] = vectors
    chi = (full.T / np.sqrt(grid.cell_volume)).reshape(n_states, grid.n1, grid.nx, grid.ny)
    threshold = reference_threshold(curve, frame, pot, grid)
    logger.info(
        "reference3d %dx%dx%d: lowest eigenvalue %.8f, threshold %.8f",
        grid.n1, grid.nx, grid.ny, values[0], threshold,
    )
    return ReferenceResult(grid=grid, eigenvalues=values, chi=chi, residuals=residuals, threshold=threshold)
