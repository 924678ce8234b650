"""
Exception hierarchy for GuideForge.

Config problems map to CLI exit code 2, numerical failures to exit code 3.
"""


class GuideforgeError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(GuideforgeError):
    """Scenario configuration is malformed or inconsistent."""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class SolverError(GuideforgeError):
    """A numerical stage of the pipeline failed."""


class NonFiniteTau(SolverError):
    pass


class FrameDriftError(SolverError):
    pass


class InvalidTube(SolverError):
    """A transverse grid point violates 1 - kappa * nhat > 0."""


class TubeViolation(InvalidTube):
    """Same condition, raised by the 3D reference grid."""


class ConvergenceFailure(SolverError):
    pass


class TrackingAmbiguity(SolverError):
    """Best adjacent-slice overlap fell below the tracking threshold."""


class SeriesDomainError(SolverError):
    pass


class MissingPrimedMatrices(SolverError):
    pass


class NotPositiveDefinite(SolverError):
    pass


class UnitarityDrift(SolverError):
    pass


class DimensionMismatch(SolverError):
    pass


class PresetMismatch(SolverError):
    pass


class MemoryCap(SolverError):
    pass


class TabulationError(SolverError):
    """Tabulated samples are too sparse for cubic interpolation."""


class ExportError(GuideforgeError):
    """Writing result files failed."""


class DegeneracyNotice(UserWarning):
    """Adjacent transverse energies closer than the degeneracy threshold."""
