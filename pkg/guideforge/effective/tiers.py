"""
Approximation tiers of the effective longitudinal problem.
"""

from dataclasses import dataclass
from enum import Enum

from ..errors import DimensionMismatch


class TierTag(Enum):
    """Which effective Hamiltonian to assemble."""
    BORN_OPPENHEIMER = "born_oppenheimer"
    SINGLE_MODE_BH = "single_mode_bh"
    SUBSET_BH = "subset_bh"
    SUBSET_BH_MERGED = "subset_bh_merged"
    FULL_COUPLED = "full_coupled"

    @property
    def single_mode(self) -> bool:
        return self is TierTag.SINGLE_MODE_BH

    @property
    def needs_primed(self) -> bool:
        return self is TierTag.SUBSET_BH_MERGED


@dataclass(frozen=True)
class ApproximationTier:
    """A tier tag together with the (0-based) mode subset it acts on."""
    tag: TierTag
    subset: tuple[int, ...]

    def __post_init__(self):
        if isinstance(self.tag, str):
            object.__setattr__(self, "tag", TierTag(self.tag))
        object.__setattr__(self, "subset", tuple(int(m) for m in self.subset))
        if not self.subset:
            raise DimensionMismatch("a tier needs at least one mode")
        if self.tag.single_mode and len(self.subset) != 1:
            raise DimensionMismatch(f"{self.tag.value} acts on exactly one mode, got {list(self.subset)}")

    @property
    def name(self) -> str:
        return self.tag.value

    def __str__(self) -> str:
        return f"{self.tag.value}{list(self.subset)}"
