"""
Containers for coupling matrices, per slice and stacked over slices.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10

MATRIX_NAMES = ("V", "D", "C", "F", "G", "VBH")
PRIMED_NAMES = ("Fp", "Cp", "VpBH")
OPTIONAL_NAMES = PRIMED_NAMES + ("VBH0",)


def hermitian_part(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Hermitian projection of a (stack of) matrices and the removed defect."""
    sym = 0.5 * (matrix + np.conj(np.swapaxes(matrix, -1, -2)))
    return sym, float(np.max(np.abs(matrix - sym))) if matrix.size else 0.0


def skew_part(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    skew = 0.5 * (matrix - np.conj(np.swapaxes(matrix, -1, -2)))
    return skew, float(np.max(np.abs(matrix - skew))) if matrix.size else 0.0


@dataclass
class CouplingSlice:
    """Coupling matrices on one slice, restricted to a mode subset."""
    u1: float
    subset: tuple[int, ...]
    V: np.ndarray
    D: np.ndarray
    C: np.ndarray
    F: np.ndarray
    G: np.ndarray
    VBH: np.ndarray
    kappa: float = 0.0
    VBH0: np.ndarray | None = None
    ledger: dict[str, np.ndarray] = field(default_factory=dict)
    diagnostics: dict[str, float] = field(default_factory=dict)

    def dominant_correction(self) -> str | None:
        """Label of the largest non-leading series term, if a ledger was kept."""
        corrections = {k: float(np.max(np.abs(v))) for k, v in self.ledger.items() if not k.endswith(":0")}
        return max(corrections, key=corrections.get) if corrections else None


@dataclass
class CouplingSet:
    """
    Coupling matrices stacked over slices, arrays shaped (N, n, n).

    The primed matrices of the merged kinetic form are filled in by
    ``effective.merge_kinetic``. ``VBH0`` is the Born-Huang potential with
    the metric weight set to 1, used by the lowest-order single-mode tier.
    ``links`` (shape (N - 1, n, n)) are the unitaries that carry slice i+1
    to slice i in the covariant longitudinal stencil; when absent they are
    built from F' at assembly.
    """
    slices: np.ndarray
    subset: tuple[int, ...]
    V: np.ndarray
    D: np.ndarray
    C: np.ndarray
    F: np.ndarray
    G: np.ndarray
    VBH: np.ndarray
    kappa: np.ndarray
    Fp: np.ndarray | None = None
    Cp: np.ndarray | None = None
    VpBH: np.ndarray | None = None
    VBH0: np.ndarray | None = None
    links: np.ndarray | None = None

    @classmethod
    def from_slices(cls, parts: list[CouplingSlice]) -> "CouplingSet":
        if not parts:
            raise ValueError("no coupling slices given")
        lowest = [p.VBH0 for p in parts]
        return cls(
            slices=np.array([p.u1 for p in parts]),
            subset=parts[0].subset,
            kappa=np.array([p.kappa for p in parts]),
            VBH0=None if any(v is None for v in lowest) else np.array(lowest),
            **{name: np.array([getattr(p, name) for p in parts]) for name in MATRIX_NAMES},
        )

    @property
    def n_slices(self) -> int:
        return self.slices.size

    @property
    def n_modes(self) -> int:
        return self.D.shape[-1]

    @property
    def spacing(self) -> float:
        return float(self.slices[1] - self.slices[0])

    @property
    def has_primed(self) -> bool:
        return self.Fp is not None and self.VpBH is not None

    def slice(self, i: int) -> CouplingSlice:
        return CouplingSlice(
            u1=float(self.slices[i]), subset=self.subset, kappa=float(self.kappa[i]),
            VBH0=None if self.VBH0 is None else self.VBH0[i],
            **{name: getattr(self, name)[i] for name in MATRIX_NAMES},
        )

    def symmetry_defects(self) -> dict[str, float]:
        """Max deviation from Hermitian (skew-Hermitian for F, F') per matrix."""
        out = {}
        for name in MATRIX_NAMES + OPTIONAL_NAMES:
            a = getattr(self, name)
            if a is None:
                continue
            adj = np.conj(np.swapaxes(a, -1, -2))
            out[name] = float(np.max(np.abs(a + adj if name in ("F", "Fp") else a - adj)))
        return out

    def check_symmetries(self, tol: float = SYMMETRY_TOL) -> bool:
        defects = self.symmetry_defects()
        bad = {k: v for k, v in defects.items() if v > tol}
        if bad:
            logger.warning("coupling symmetry defects above %.0e: %s", tol, bad)
        return not bad
