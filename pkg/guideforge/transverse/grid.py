"""
Rectangular finite-difference grid for the transverse problem.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class TransverseGrid:
    """
    Interior points of the rectangle [-lx, lx] x [-ly, ly].

    Dirichlet walls sit on the rectangle edge, one spacing beyond the
    outermost interior point. Grid vectors are flattened with u2 as the
    slow index.
    """
    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError("transverse grid needs at least 3 points per axis")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("transverse half-widths must be positive")

    @property
    def hx(self) -> float:
        return 2 * self.lx / (self.nx + 1)

    @property
    def hy(self) -> float:
        return 2 * self.ly / (self.ny + 1)

    @property
    def weight(self) -> float:
        """Quadrature weight of one grid point."""
        return self.hx * self.hy

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @cached_property
    def x(self) -> np.ndarray:
        return -self.lx + self.hx * np.arange(1, self.nx + 1)

    @cached_property
    def y(self) -> np.ndarray:
        return -self.ly + self.hy * np.arange(1, self.ny + 1)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (u2, u3) coordinates of every grid point."""
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        return X.ravel(), Y.ravel()

    @property
    def max_radius(self) -> float:
        return float(np.hypot(self.x[-1], self.y[-1]))

    def inner(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """
        Weighted inner products <a_m|b_n> for stacks of real or complex grid vectors.

        Args:
            a: array (..., M, P) or (P,)
            b: array (..., N, P) or (P,)

        Returns:
            Array (..., M, N), or a scalar for single vectors
        """
        return np.matmul(np.conj(a), np.swapaxes(b, -1, -2) if np.ndim(b) > 1 else b) * self.weight

    def as_image(self, vector: np.ndarray) -> np.ndarray:
        return np.asarray(vector).reshape(self.shape)

    def refined(self, factor: int = 2) -> "TransverseGrid":
        """Same rectangle with spacing divided by ``factor``."""
        return TransverseGrid(
            nx=factor * (self.nx + 1) - 1,
            ny=factor * (self.ny + 1) - 1,
            lx=self.lx,
            ly=self.ly,
        )
