"""
Tier-versus-reference comparison.

Relative errors of each effective tier against the 3D grid, a check that
the errors shrink as the tiers get more complete, and bound-state flags
for every tier and for the 3D grid against its own threshold.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from rich.table import Table

from .runner import REFERENCE_TIER, ScenarioResults

logger = logging.getLogger(__name__)

# From crudest to most complete
TIER_ORDER = ("born_oppenheimer", "single_mode_bh", "subset_bh", "subset_bh_merged", "full_coupled")


@dataclass
class TierComparison:
    """One eigenvalue of one tier."""
    tier: str
    state: int
    energy: float
    threshold: float
    reference: float | None = None

    @property
    def bound(self) -> bool:
        return self.energy < self.threshold

    @property
    def relative_error(self) -> float | None:
        if self.reference is None:
            return None
        return abs(self.energy - self.reference) / max(abs(self.reference), 1e-300)

    def to_dict(self) -> dict:
        return {
            "tier": self.tier,
            "state": self.state,
            "energy": self.energy,
            "threshold": self.threshold,
            "bound": self.bound,
            "reference": self.reference,
            "relative_error": self.relative_error,
        }


@dataclass
class ComparisonReport:
    """All tier eigenvalues of a run, against the reference when one was computed."""
    scenario_name: str
    rows: list[TierComparison] = field(default_factory=list)

    @property
    def has_reference(self) -> bool:
        return any(r.reference is not None for r in self.rows)

    def errors(self, state: int = 1) -> dict[str, float]:
        """Relative error per tier for one (1-based) state."""
        return {
            r.tier: r.relative_error for r in self.rows
            if r.state == state and r.relative_error is not None
        }

    def ordering_holds(self, state: int = 1) -> bool | None:
        """
        Whether the ground-state error never grows along TIER_ORDER.

        None when fewer than two tiers have a reference to compare against.
        """
        errors = self.errors(state)
        ranked = [errors[t] for t in TIER_ORDER if t in errors]
        if len(ranked) < 2:
            return None
        return all(b <= a * (1 + 1e-9) for a, b in zip(ranked, ranked[1:]))

    def to_dict(self) -> dict:
        return {
            "scenario_name": self.scenario_name,
            "ordering_holds": self.ordering_holds(),
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_table(self) -> Table:
        table = Table(title=f"{self.scenario_name}: eigenvalues")
        table.add_column("Tier", style="cyan")
        table.add_column("State", justify="right")
        table.add_column("Energy", justify="right")
        table.add_column("Reference", justify="right")
        table.add_column("Rel. error", justify="right")
        table.add_column("Bound", justify="center")
        for r in self.rows:
            table.add_row(
                r.tier,
                str(r.state),
                f"{r.energy:.8f}",
                "-" if r.reference is None else f"{r.reference:.8f}",
                "-" if r.relative_error is None else f"{r.relative_error:.2e}",
                "[green]yes[/green]" if r.bound else "no",
            )
        return table

    def summary(self) -> str:
        lines = [f"=== {self.scenario_name} ==="]
        for r in self.rows:
            err = "" if r.relative_error is None else f"  rel.err {r.relative_error:.2e}"
            lines.append(f"  {r.tier:<18} E{r.state} = {r.energy:.8f}{err}{'  bound' if r.bound else ''}")
        ordering = self.ordering_holds()
        if ordering is not None:
            lines.append(f"  tier ordering {'holds' if ordering else 'VIOLATED'}")
        return "\n".join(lines)


def compare_tiers(results: ScenarioResults) -> ComparisonReport:
    """Build the comparison report of a finished run."""
    reference = results.reference.eigenvalues if results.reference is not None else None
    report = ComparisonReport(scenario_name=results.config.name)
    for tier, spectrum in results.spectra.items():
        for k, energy in enumerate(spectrum.eigenvalues):
            ref = float(reference[k]) if reference is not None and k < reference.size else None
            report.rows.append(TierComparison(
                tier=tier, state=k + 1, energy=float(energy), threshold=spectrum.threshold, reference=ref,
            ))
    if results.reference is not None:
        oracle = results.reference
        for k, energy in enumerate(oracle.eigenvalues):
            report.rows.append(TierComparison(
                tier=REFERENCE_TIER, state=k + 1, energy=float(energy), threshold=oracle.threshold,
            ))
    if report.ordering_holds() is False:
        logger.warning("ground-state error does not decrease along the tier hierarchy: %s", report.errors())
    if reference is not None:
        worst = max((r.relative_error for r in report.rows if r.relative_error is not None), default=np.nan)
        logger.info("largest relative error against reference3d: %.2e", worst)
    return report
