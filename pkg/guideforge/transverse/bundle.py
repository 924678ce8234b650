"""
Mode bundles: transverse eigenpairs on every slice, gauge-aligned and
differentiated along u1.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.optimize import linear_sum_assignment

from ..errors import TrackingAmbiguity
from ..geometry.curve import CurveSpec
from ..geometry.frame import TangFrame
from .grid import TransverseGrid
from .hamiltonian import (
    DEGENERACY_TOL,
    MODE_CAP,
    RESIDUAL_TOL,
    active_points,
    build_transverse_hamiltonian,
    solve_transverse_modes,
)
from .potential import CrossSectionPotential

logger = logging.getLogger(__name__)

MIN_TRACKING_OVERLAP = 0.5
SPLINE_DEGREE = 5


@dataclass
class ModeBundle:
    """
    Transverse modes phi_m(.; u1) and energies E_m(u1) on a slice grid.

    Arrays are indexed [slice, mode, grid point]. Modes are real and
    L2-normalized with the grid weight.
    """
    grid: TransverseGrid
    slices: np.ndarray
    energies: np.ndarray
    modes: np.ndarray
    v1: np.ndarray
    dmodes: np.ndarray | None = None
    d2modes: np.ndarray | None = None
    overlap_log: np.ndarray | None = None
    degenerate_pairs: list[tuple[int, int, int]] = field(default_factory=list)
    stencil_order: int = 2

    @property
    def n_slices(self) -> int:
        return self.slices.size

    @property
    def n_modes(self) -> int:
        return self.energies.shape[1]

    @property
    def spacing(self) -> float:
        return float(self.slices[1] - self.slices[0])

    @property
    def is_differentiated(self) -> bool:
        return self.dmodes is not None

    def slice_index(self, u1: float) -> int:
        """Index of the slice at u1; u1 must be one of the slices."""
        i = int(np.argmin(np.abs(self.slices - u1)))
        if not np.isclose(self.slices[i], u1, rtol=0.0, atol=1e-9 * max(1.0, abs(u1))):
            raise ValueError(f"u1={u1:g} is not a slice of this bundle")
        return i

    def inner(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.grid.inner(a, b)

    def orthonormality_defect(self) -> float:
        gram = self.inner(self.modes, self.modes)
        return float(np.max(np.abs(gram - np.eye(self.n_modes))))


def solve_slice(
    grid: TransverseGrid,
    pot: CrossSectionPotential,
    u1: float,
    n_modes: int,
    curve: CurveSpec | None = None,
    theta: float = 0.0,
    seed: int = 0,
    mode_cap: int = MODE_CAP,
    residual_tol: float = RESIDUAL_TOL,
    degeneracy_tol: float = DEGENERACY_TOL,
    stencil_order: int = 2,
) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    """
    Eigenpairs of one slice as full-grid vectors normalized with the grid weight.
    """
    H = build_transverse_hamiltonian(grid, pot, u1, curve=curve, theta=theta, stencil_order=stencil_order)
    active = active_points(grid, pot, u1)
    X, Y = grid.mesh
    # the kinetic part is positive semidefinite at every stencil order
    floor = float(np.min(pot.transverse(X, Y, u1)[active]))
    v0 = np.random.default_rng(seed).standard_normal(H.shape[0])
    energies, vectors, pairs = solve_transverse_modes(
        H, n_modes, mode_cap=mode_cap, residual_tol=residual_tol,
        degeneracy_tol=degeneracy_tol, v0=v0, lower_bound=floor,
    )
    modes = np.zeros((n_modes, grid.size))
    modes[:, active] = vectors / np.sqrt(grid.weight)
    return energies, modes, pairs


def compute_mode_bundle(
    grid: TransverseGrid,
    pot: CrossSectionPotential,
    slices: np.ndarray,
    n_modes: int,
    curve: CurveSpec | None = None,
    frame: TangFrame | None = None,
    threads: int = 1,
    seed: int = 0,
    tracked: int | None = None,
    min_overlap: float = MIN_TRACKING_OVERLAP,
    stencil_order: int = 2,
    **solver_options,
) -> ModeBundle:
    """
    Solve every slice, then align and differentiate the bundle.

    Args:
        grid: transverse grid shared by all slices
        pot: cross-section potential
        slices: uniform u1 samples
        n_modes: modes per slice (subset plus buffer)
        curve, frame: geometry for tube validity checks
        threads: worker threads for the independent slice solves
        seed: seeds the eigensolver starting vectors
        tracked: leading modes whose tracking must stay unambiguous
        min_overlap: tracking threshold
        stencil_order: order of the transverse Laplacian
        **solver_options: forwarded to solve_transverse_modes

    Returns:
        Aligned and differentiated ModeBundle
    """
    slices = np.asarray(slices, dtype=float)

    def work(u1):
        theta = float(frame.theta_at(u1)) if frame is not None else 0.0
        return solve_slice(
            grid, pot, float(u1), n_modes, curve=curve, theta=theta, seed=seed,
            stencil_order=stencil_order, **solver_options,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, slices))
    else:
        results = [work(u1) for u1 in slices]

    bundle = ModeBundle(
        grid=grid,
        slices=slices,
        energies=np.array([r[0] for r in results]),
        modes=np.array([r[1] for r in results]),
        v1=np.array([pot.longitudinal(float(u1)) for u1 in slices]),
        degenerate_pairs=[(i, m, n) for i, r in enumerate(results) for (m, n) in r[2]],
        stencil_order=stencil_order,
    )
    logger.info("solved %d slices x %d modes on a %dx%d grid", slices.size, n_modes, grid.nx, grid.ny)
    bundle = align_and_differentiate(bundle, min_overlap=min_overlap, tracked=tracked)
    if not pot.has_hard_walls:
        check_energy_continuity(bundle, pot)
    return bundle


def _degenerate_blocks(energies: np.ndarray, tol: float) -> list[list[int]]:
    blocks, current = [], [0]
    for m in range(1, energies.size):
        if energies[m] - energies[m - 1] < tol:
            current.append(m)
        else:
            blocks.append(current)
            current = [m]
    blocks.append(current)
    return [b for b in blocks if len(b) > 1]


def _procrustes_block(prev: np.ndarray, cur: np.ndarray, block: list[int], grid: TransverseGrid) -> np.ndarray:
    """Rotate a degenerate block of ``cur`` to best match the previous slice."""
    weights = np.sum(np.abs(grid.inner(prev, cur[block])) ** 2, axis=1)
    partners = np.sort(np.argsort(weights)[-len(block):])
    u, _, vt = np.linalg.svd(grid.inner(prev[partners], cur[block]))
    cur = cur.copy()
    cur[block] = (u @ vt) @ cur[block]
    return cur


def mode_derivatives(modes: np.ndarray, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    """
    First and second u1 derivatives from a quintic interpolating spline.

    The spline runs through every slice with not-a-knot ends, so the
    derivatives are accurate to high order up to and including the end slices.
    """
    if modes.shape[0] < SPLINE_DEGREE + 1:
        raise ValueError(f"mode derivatives need at least {SPLINE_DEGREE + 1} slices")
    u = spacing * np.arange(modes.shape[0])
    spline = make_interp_spline(u, modes, k=SPLINE_DEGREE, axis=0)
    return spline.derivative(1)(u), spline.derivative(2)(u)


def align_and_differentiate(
    bundle: ModeBundle,
    min_overlap: float = MIN_TRACKING_OVERLAP,
    degeneracy_tol: float = DEGENERACY_TOL,
    tracked: int | None = None,
) -> ModeBundle:
    """
    Fix a smooth real gauge, track modes across slices and differentiate.

    Degenerate blocks are rotated by orthogonal Procrustes onto the
    previous slice, modes are permuted by maximal |overlap| and signs are
    chosen so adjacent overlaps are positive.

    Raises:
        TrackingAmbiguity: if a tracked mode's overlap drops below ``min_overlap``
    """
    slices = bundle.slices
    steps = np.diff(slices)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("slices must be uniformly spaced")
    tracked = bundle.n_modes if tracked is None else min(tracked, bundle.n_modes)

    modes = bundle.modes.copy()
    energies = bundle.energies.copy()
    overlaps = np.empty((slices.size - 1, bundle.n_modes, bundle.n_modes))
    grid = bundle.grid

    for i in range(1, slices.size):
        prev, cur = modes[i - 1], modes[i]
        for block in _degenerate_blocks(energies[i], degeneracy_tol):
            cur = _procrustes_block(prev, cur, block, grid)
        _, perm = linear_sum_assignment(-np.abs(grid.inner(prev, cur)))
        cur, energies[i] = cur[perm], energies[i][perm]
        signs = np.sign(np.diag(grid.inner(prev, cur)))
        signs[signs == 0] = 1.0
        cur = cur * signs[:, None]
        modes[i] = cur
        overlaps[i - 1] = grid.inner(prev, cur)

        best = np.diag(overlaps[i - 1])
        if np.min(best[:tracked]) < min_overlap:
            m = int(np.argmin(best[:tracked]))
            raise TrackingAmbiguity(
                f"mode {m} overlap {best[m]:.3f} between u1={slices[i - 1]:g} and {slices[i]:g}; "
                "refine the slice spacing"
            )
        if tracked < bundle.n_modes and np.min(best[tracked:]) < min_overlap:
            logger.debug("buffer mode left the computed window near u1=%g", slices[i])

    d1, d2 = mode_derivatives(modes, float(steps[0]))
    return replace(bundle, modes=modes, energies=energies, dmodes=d1, d2modes=d2, overlap_log=overlaps)


def check_energy_continuity(bundle: ModeBundle, pot: CrossSectionPotential, slack: float = 2.0) -> bool:
    """
    Warn when |E_m(u1 + du) - E_m(u1)| exceeds the bound max|dV/du1| * du.
    """
    X, Y = bundle.grid.mesh
    ok = True
    for i in range(bundle.n_slices - 1):
        u_mid = 0.5 * (bundle.slices[i] + bundle.slices[i + 1])
        bound = slack * float(np.max(np.abs(pot.transverse_dot(X, Y, u_mid)))) * bundle.spacing
        jump = float(np.max(np.abs(bundle.energies[i + 1] - bundle.energies[i])))
        if jump > bound + 1e-12:
            logger.warning("energy jump %.3e exceeds Lipschitz estimate %.3e near u1=%g", jump, bound, u_mid)
            ok = False
    return ok
