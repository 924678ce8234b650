"""
Scenario pipeline, tier comparison and result export.
"""

from .export import export_results, load_coupling_matrices, load_table
from .metrics import ComparisonReport, TierComparison, compare_tiers
from .runner import ScenarioResults, ScenarioRunner, run_scenario

__all__ = [
    "ComparisonReport",
    "ScenarioResults",
    "ScenarioRunner",
    "TierComparison",
    "compare_tiers",
    "export_results",
    "load_coupling_matrices",
    "load_table",
    "run_scenario",
]
