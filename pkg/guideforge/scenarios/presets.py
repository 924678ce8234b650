"""
Named scenarios.

Each factory returns a validated ScenarioConfig. A scenario file can start
from one of them with ``preset = "<name>"`` and override individual keys.
"""

from typing import Callable

import numpy as np

from ..errors import ConfigError
from .base import (
    CrossSectionConfig,
    CurveConfig,
    ModesConfig,
    OutputConfig,
    Reference3DConfig,
    ScenarioConfig,
    SolverConfig,
)


def straight_harmonic() -> ScenarioConfig:
    """Straight guide of length pi, isotropic omega = 1; lowest level 1.5 (transverse 1, longitudinal 1/2)."""
    return ScenarioConfig(
        name="straight_harmonic",
        curve=CurveConfig(preset="straight", length=np.pi),
        cross_section=CrossSectionConfig(family="harmonic_isotropic", omega=1.0),
        modes=ModesConfig(subset=[1], total=3),
        solver=SolverConfig(nx=64, ny=64, extent=(4.5, 4.5), slices=257, tiers=["subset_bh"], n_states=3),
    )


def bent_arc_thin() -> ScenarioConfig:
    """Thin guide on a planar arc, single-mode tier against the 3D grid."""
    return ScenarioConfig(
        name="bent_arc_thin",
        curve=CurveConfig(preset="circular_arc", radius=5.0, length=np.pi),
        cross_section=CrossSectionConfig(family="harmonic_isotropic", omega=10.0),
        modes=ModesConfig(subset=[1], total=3),
        solver=SolverConfig(
            nx=32, ny=32, extent=(1.6, 1.6), slices=129,
            tiers=["single_mode_bh", "reference3d"], n_states=2,
            reference3d=Reference3DConfig(n1=96, nx=28, ny=28),
        ),
    )


def arc_with_tails() -> ScenarioConfig:
    """Bent window between straight tails; binds a state below the channel threshold."""
    return ScenarioConfig(
        name="arc_with_tails",
        curve=CurveConfig(preset="bump", kappa0=0.8, length=16.0, start=6.0, end=10.0, width=0.5),
        cross_section=CrossSectionConfig(family="harmonic_isotropic", omega=16.0),
        modes=ModesConfig(subset=[1], total=4),
        solver=SolverConfig(
            nx=20, ny=20, extent=(1.0, 1.0), slices=257,
            tiers=["single_mode_bh", "subset_bh", "reference3d"], n_states=2,
            reference3d=Reference3DConfig(n1=64, nx=24, ny=24),
        ),
    )


def twisted_anisotropic() -> ScenarioConfig:
    """Anisotropic profile turning at rate 1/2; sixth-order stencil for the closed-form twist check."""
    return ScenarioConfig(
        name="twisted_anisotropic",
        curve=CurveConfig(preset="straight", length=2 * np.pi),
        cross_section=CrossSectionConfig(
            family="harmonic_anisotropic", omega2=1.0, omega3=2.0, twist_rate=0.5
        ),
        modes=ModesConfig(subset=[1], total=6),
        solver=SolverConfig(
            nx=80, ny=80, extent=(5.0, 5.0), slices=129, stencil_order=6,
            tiers=["single_mode_bh", "subset_bh"],
        ),
    )


def shifted_straight() -> ScenarioConfig:
    """Harmonic profile displaced sideways by d(u1) = (sin u1, 0)."""
    return ScenarioConfig(
        name="shifted_straight",
        curve=CurveConfig(preset="straight", length=2 * np.pi),
        cross_section=CrossSectionConfig(
            family="harmonic_isotropic", omega=1.0, shift_amplitude=(1.0, 0.0), shift_frequency=1.0
        ),
        modes=ModesConfig(subset=[1], total=6),
        solver=SolverConfig(
            nx=96, ny=24, extent=(6.5, 5.0), slices=257, stencil_order=6,
            tiers=["single_mode_bh", "subset_bh"],
        ),
    )


def avoided_crossing() -> ScenarioConfig:
    """
    Double well whose tilt changes sign at u1 = 0.

    The two lowest channels approach each other near the origin, so the
    two-mode subset carries a sharply peaked F_12 and is diabatized.
    """
    return ScenarioConfig(
        name="avoided_crossing",
        curve=CurveConfig(preset="straight", length=8.0, u1_min=-4.0),
        cross_section=CrossSectionConfig(
            family="double_well", barrier=3.0, separation=1.5, omega3=2.0, tilt=0.0, slopes={"tilt": 0.4}
        ),
        modes=ModesConfig(subset=[1, 2], total=6),
        solver=SolverConfig(
            nx=48, ny=24, extent=(4.0, 3.0), slices=161,
            tiers=["born_oppenheimer", "subset_bh"], n_states=4, diabatic=True, gauge_origin=-4.0,
        ),
    )


def helix_harmonic() -> ScenarioConfig:
    return ScenarioConfig(
        name="helix_harmonic",
        curve=CurveConfig(preset="helix", kappa=0.2, tau=0.3, length=np.pi),
        cross_section=CrossSectionConfig(family="harmonic_isotropic", omega=4.0),
        modes=ModesConfig(subset=[1, 2, 3], total=7),
        solver=SolverConfig(
            nx=28, ny=28, extent=(2.5, 2.5), slices=129, tiers=["subset_bh", "full_coupled"],
        ),
    )


def varying_bent() -> ScenarioConfig:
    """Clothoid with a slowly widening guide; exercises the merged kinetic form."""
    return ScenarioConfig(
        name="varying_bent",
        curve=CurveConfig(preset="clothoid", rate=0.05, kappa0=0.1, length=np.pi),
        cross_section=CrossSectionConfig(family="harmonic_isotropic", omega=3.0, slopes={"omega": 0.1}),
        modes=ModesConfig(subset=[1, 2], total=6),
        solver=SolverConfig(
            nx=28, ny=28, extent=(3.0, 3.0), slices=129,
            tiers=["subset_bh", "subset_bh_merged", "full_coupled"],
        ),
        output=OutputConfig(formats=["csv", "json"]),
    )


PRESETS: dict[str, Callable[[], ScenarioConfig]] = {
    "straight_harmonic": straight_harmonic,
    "bent_arc_thin": bent_arc_thin,
    "arc_with_tails": arc_with_tails,
    "twisted_anisotropic": twisted_anisotropic,
    "shifted_straight": shifted_straight,
    "avoided_crossing": avoided_crossing,
    "helix_harmonic": helix_harmonic,
    "varying_bent": varying_bent,
}


def get_preset(name: str) -> ScenarioConfig:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}", key="preset") from None
    return factory()


def list_presets() -> list[tuple[str, str]]:
    """(name, one-line description) pairs."""
    return [(name, (factory.__doc__ or name).strip().splitlines()[0]) for name, factory in PRESETS.items()]
