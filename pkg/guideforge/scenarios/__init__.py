"""
Scenario configuration and named presets.
"""

from .base import ScenarioConfig, load_scenario, validate_config
from .presets import PRESETS, get_preset, list_presets

__all__ = ["PRESETS", "ScenarioConfig", "get_preset", "list_presets", "load_scenario", "validate_config"]
