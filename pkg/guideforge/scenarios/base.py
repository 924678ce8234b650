"""
Scenario configuration.

A scenario file is TOML with the sections [curve], [cross_section],
[modes], [solver] and [output]. Each section is a pydantic model; the
composed ScenarioConfig knows how to build the curve, the cross-section
potential and the grids it describes. Mode indices in files are 1-based.
"""

import hashlib
import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ConfigError
from ..geometry import curve as curves
from ..geometry.curve import CurveSpec
from ..transverse.grid import TransverseGrid
from ..transverse.potential import FAMILY_PARAMS, CrossSectionPotential, TabulatedProfile

TierName = Literal[
    "born_oppenheimer", "single_mode_bh", "subset_bh", "subset_bh_merged", "full_coupled", "reference3d"
]

OPTIONAL_PARAMS = ("tilt",)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CurveConfig(_Section):
    """[curve]: preset name and its parameters."""
    preset: Literal["straight", "circular_arc", "clothoid", "helix", "bump", "tabulated"] = "straight"
    length: float = Field(default=float(np.pi), gt=0)
    u1_min: float = 0.0
    radius: float | None = Field(default=None, gt=0)
    kappa: float | None = None
    tau: float | None = None
    rate: float | None = None
    kappa0: float | None = None
    start: float | None = None
    end: float | None = None
    width: float = Field(default=0.2, gt=0)
    table: str | None = None

    @model_validator(mode="after")
    def _required(self) -> "CurveConfig":
        needed = {
            "circular_arc": ("radius",),
            "clothoid": ("rate",),
            "helix": ("kappa", "tau"),
            "bump": ("kappa0", "start", "end"),
            "tabulated": ("table",),
        }.get(self.preset, ())
        missing = [k for k in needed if getattr(self, k) is None]
        if missing:
            raise ValueError(f"{self.preset} curve needs {', '.join(missing)}")
        return self

    def build(self, base_dir: Path | None = None) -> CurveSpec:
        if self.preset == "straight":
            return curves.straight(self.length, self.u1_min)
        if self.preset == "circular_arc":
            return curves.circular_arc(self.radius, self.length, self.u1_min)
        if self.preset == "clothoid":
            return curves.clothoid(self.rate, self.length, self.kappa0 or 0.0, self.u1_min)
        if self.preset == "helix":
            return curves.helix(self.kappa, self.tau, self.length, self.u1_min)
        if self.preset == "bump":
            return curves.bump(self.kappa0, self.length, self.start, self.end, self.width, self.u1_min)
        frame = _read_table(self.table, base_dir, "curve.table")
        for column in ("u1", "kappa", "tau"):
            if column not in frame:
                raise ConfigError(f"table has no column {column!r}", key="curve.table")
        return curves.tabulated(frame["u1"].to_numpy(), frame["kappa"].to_numpy(), frame["tau"].to_numpy())


class CrossSectionConfig(_Section):
    """
    [cross_section]: profile family, parameters, and optional twist or shift.

    Every parameter may vary linearly along the guide through ``slopes``,
    e.g. ``slopes = { omega = 0.1 }`` gives omega(u1) = omega + 0.1 u1.
    """
    family: Literal["harmonic_isotropic", "harmonic_anisotropic", "dirichlet_box", "double_well", "tabulated"] = (
        "harmonic_isotropic"
    )
    omega: float | None = Field(default=None, gt=0)
    omega2: float | None = Field(default=None, gt=0)
    omega3: float | None = Field(default=None, gt=0)
    half_width2: float | None = Field(default=None, gt=0)
    half_width3: float | None = Field(default=None, gt=0)
    barrier: float | None = Field(default=None, gt=0)
    separation: float | None = Field(default=None, gt=0)
    tilt: float = 0.0
    slopes: dict[str, float] = Field(default_factory=dict)
    twist_rate: float | None = None
    shift_amplitude: tuple[float, float] | None = None
    shift_frequency: float = 1.0
    v1: float = 0.0
    table: str | None = None

    @model_validator(mode="after")
    def _required(self) -> "CrossSectionConfig":
        missing = [k for k in FAMILY_PARAMS[self.family] if k not in OPTIONAL_PARAMS and getattr(self, k) is None]
        if missing:
            raise ValueError(f"{self.family} profile needs {', '.join(missing)}")
        if self.family == "tabulated" and self.table is None:
            raise ValueError("tabulated profile needs table")
        unknown = set(self.slopes) - set(FAMILY_PARAMS[self.family])
        if unknown:
            raise ValueError(f"slopes given for unknown parameters {sorted(unknown)}")
        return self

    def _param(self, name: str):
        value, slope = float(getattr(self, name)), float(self.slopes.get(name, 0.0))
        return value if slope == 0.0 else (lambda u, a=value, b=slope: a + b * u)

    def build(self, base_dir: Path | None = None) -> CrossSectionPotential:
        params = {k: self._param(k) for k in FAMILY_PARAMS[self.family]}
        extra: dict[str, Any] = {"v1": self.v1}
        if self.twist_rate is not None:
            rate = self.twist_rate
            extra["twist_alpha"] = lambda u: rate * u
            extra["twist_alpha_dot"] = rate
        if self.shift_amplitude is not None:
            amp, freq = np.asarray(self.shift_amplitude, dtype=float), self.shift_frequency
            extra["shift_d"] = lambda u: amp * np.sin(freq * u)
            extra["shift_d_dot"] = lambda u: amp * freq * np.cos(freq * u)
        if self.family == "tabulated":
            samples = _read_table(self.table, base_dir, "cross_section.table")
            missing = {"u2", "u3", "value"} - set(samples.columns)
            if missing:
                raise ConfigError(f"table has no columns {sorted(missing)}", key="cross_section.table")
            grid = samples.pivot_table(index="u2", columns="u3", values="value")
            extra["table"] = TabulatedProfile(
                u2=grid.index.to_numpy(float), u3=grid.columns.to_numpy(float), values=grid.to_numpy(float)
            )
        return CrossSectionPotential(self.family, params, **extra)


class ModesConfig(_Section):
    """[modes]: 1-based subset and total number of computed modes."""
    subset: list[int] = Field(default_factory=lambda: [1], min_length=1)
    total: int | None = Field(default=None, ge=1)
    tracked: int | None = Field(default=None, ge=1)

    @property
    def n_total(self) -> int:
        return self.total if self.total is not None else len(self.subset) + 4

    @property
    def indices(self) -> tuple[int, ...]:
        """0-based subset."""
        return tuple(m - 1 for m in self.subset)

    @model_validator(mode="after")
    def _subset(self) -> "ModesConfig":
        if len(set(self.subset)) != len(self.subset):
            raise ValueError("subset contains duplicates")
        if min(self.subset) < 1 or max(self.subset) > self.n_total:
            raise ValueError(f"subset must lie within 1..{self.n_total}")
        return self


class Reference3DConfig(_Section):
    n1: int = Field(default=64, ge=3)
    nx: int = Field(default=24, ge=3)
    ny: int = Field(default=24, ge=3)


class SolverConfig(_Section):
    """[solver]: grids, tiers and tolerances."""
    nx: int = Field(default=40, ge=3)
    ny: int = Field(default=40, ge=3)
    extent: tuple[float, float] = (5.0, 5.0)
    slices: int = Field(default=129, ge=6)
    stencil_order: Literal[2, 4, 6] = 2
    tiers: list[TierName] = Field(default_factory=lambda: ["subset_bh"], min_length=1)
    n_states: int = Field(default=3, ge=1)
    series_order: int = Field(default=2, ge=0, le=4)
    mode_cap: int = Field(default=16, ge=1)
    residual_tol: float = Field(default=1e-9, gt=0)
    degeneracy_tol: float = Field(default=1e-8, gt=0)
    hf_degeneracy_tol: float = Field(default=1e-6, gt=0)
    tracking_min_overlap: float = Field(default=0.5, gt=0, lt=1)
    diabatic: bool = False
    gauge_origin: float | None = None
    reference3d: Reference3DConfig = Field(default_factory=Reference3DConfig)
    threads: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _grid(self) -> "SolverConfig":
        if min(self.extent) <= 0:
            raise ValueError("extent half-widths must be positive")
        reach = self.stencil_order // 2
        if min(self.nx, self.ny) <= reach:
            raise ValueError(f"an order-{self.stencil_order} stencil needs more than {reach} points per axis")
        return self


class OutputConfig(_Section):
    directory: str = "results"
    formats: list[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"])
    verbosity: Literal["quiet", "info", "debug"] = "info"


class ScenarioConfig(_Section):
    """A complete scenario; build the numerical objects with the helper methods."""
    name: str = "scenario"
    preset: str | None = None
    curve: CurveConfig = Field(default_factory=CurveConfig)
    cross_section: CrossSectionConfig = Field(default_factory=lambda: CrossSectionConfig(omega=1.0))
    modes: ModesConfig = Field(default_factory=ModesConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _consistent(self) -> "ScenarioConfig":
        if self.modes.n_total > self.solver.mode_cap:
            raise ValueError(f"modes.total {self.modes.n_total} exceeds solver.mode_cap {self.solver.mode_cap}")
        if self.modes.n_total >= self.solver.nx * self.solver.ny:
            raise ValueError(
                f"modes.total {self.modes.n_total} needs a transverse grid of more than "
                f"{self.modes.n_total} points, solver.nx * solver.ny is {self.solver.nx * self.solver.ny}"
            )
        if self.solver.gauge_origin is not None and not (
            self.curve.u1_min <= self.solver.gauge_origin <= self.curve.u1_min + self.curve.length
        ):
            raise ValueError("solver.gauge_origin lies outside the curve")
        return self

    def build_curve(self, base_dir: Path | None = None) -> CurveSpec:
        return self.curve.build(base_dir)

    def build_potential(self, base_dir: Path | None = None) -> CrossSectionPotential:
        return self.cross_section.build(base_dir)

    def build_grid(self) -> TransverseGrid:
        lx, ly = self.solver.extent
        return TransverseGrid(nx=self.solver.nx, ny=self.solver.ny, lx=lx, ly=ly)

    def slices(self) -> np.ndarray:
        return np.linspace(self.curve.u1_min, self.curve.u1_min + self.curve.length, self.solver.slices)

    def fingerprint(self) -> str:
        """sha256 of the canonical JSON dump."""
        return hashlib.sha256(json.dumps(self.model_dump(mode="json"), sort_keys=True).encode()).hexdigest()

    def with_overrides(self, **solver) -> "ScenarioConfig":
        """Copy with some [solver] keys replaced (CLI flags), re-validated."""
        data = self.model_dump()
        data["solver"].update({k: v for k, v in solver.items() if v is not None})
        return validate_config(data)


# === LOADING ===

def _resolve(path: str, base_dir: Path | None) -> Path:
    p = Path(path)
    return p if p.is_absolute() or base_dir is None else base_dir / p


def _read_table(path: str, base_dir: Path | None, key: str) -> pd.DataFrame:
    try:
        return pd.read_csv(_resolve(path, base_dir), comment="#")
    except (OSError, pd.errors.ParserError) as exc:
        raise ConfigError(f"cannot read table {path}: {exc}", key=key) from exc


def _merge(base: dict, update: dict) -> dict:
    out = dict(base)
    for key, value in update.items():
        out[key] = _merge(out[key], value) if isinstance(value, dict) and isinstance(out.get(key), dict) else value
    return out


def validate_config(data: dict) -> ScenarioConfig:
    """
    Validate a raw mapping, expanding ``preset = "<name>"`` first.

    Raises:
        ConfigError: naming the dotted key of the first problem
    """
    if data.get("preset"):
        from .presets import get_preset

        base = get_preset(data["preset"]).model_dump(exclude_none=True)
        data = _merge(base, data)
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise ConfigError(first["msg"], key=key) from exc


def load_scenario(path: str | Path) -> ScenarioConfig:
    """
    Read and validate a scenario file.

    Raises:
        ConfigError: unreadable file, TOML syntax error or invalid values
    """
    path = Path(path)
    try:
        with path.open("rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from exc
    return validate_config(data)
