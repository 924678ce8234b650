"""
Scenario pipeline.

Runs geometry, transverse modes, couplings, the requested effective tiers
and their spectra, and optionally the 3D reference, the diabatic basis
and the series ledger, collecting everything into a ScenarioResults.
The tiers and the 3D reference are solved on a pool of solver.threads
workers once their couplings exist.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..couplings import (
    CouplingSet,
    build_moment_table,
    compute_couplings,
    coupling_matrices_series,
)
from ..diabatic import GaugeField, adiabatic_to_diabatic, gauge_transform, solve_lyapunov
from ..effective import (
    ApproximationTier,
    EffectiveHamiltonian,
    SingleModePotentials,
    TierTag,
    assemble_effective,
    merge_kinetic,
    single_mode_potentials,
)
from ..errors import SeriesDomainError
from ..geometry.curve import CurveSpec
from ..geometry.frame import TangFrame, frenet_frame_and_curve
from ..longitudinal import SpectralResult, solve_spectrum
from ..reference3d import Grid3D, ReferenceResult, solve_reference
from ..scenarios.base import ScenarioConfig
from ..transverse.bundle import ModeBundle, compute_mode_bundle
from ..transverse.potential import CrossSectionPotential

logger = logging.getLogger(__name__)

REFERENCE_TIER = "reference3d"
# Series-vs-exact G disagreement worth a log line
SERIES_G_NOTICE = 1e-3


@dataclass
class ScenarioResults:
    """Everything one scenario run produced."""
    config: ScenarioConfig
    curve: CurveSpec
    frame: TangFrame
    bundle: ModeBundle
    couplings: dict[tuple[int, ...], CouplingSet] = field(default_factory=dict)
    hamiltonians: dict[str, EffectiveHamiltonian] = field(default_factory=dict)
    spectra: dict[str, SpectralResult] = field(default_factory=dict)
    reference: ReferenceResult | None = None
    gauge: GaugeField | None = None
    diabatic: CouplingSet | None = None
    series: CouplingSet | None = None
    dominant_terms: list[str | None] = field(default_factory=list)
    single_mode: SingleModePotentials | None = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def main_couplings(self) -> CouplingSet:
        """Couplings over the configured subset."""
        return self.couplings[self.config.modes.indices]

    def to_dict(self) -> dict:
        out = {
            "name": self.config.name,
            "version": __version__,
            "config_sha256": self.config.fingerprint(),
            "subset": list(self.config.modes.subset),
            "spectra": {
                tier: {
                    "eigenvalues": s.eigenvalues.tolist(),
                    "threshold": s.threshold,
                    "bound": s.bound.tolist(),
                    "hermiticity_defect": self.hamiltonians[tier].hermiticity_defect(),
                }
                for tier, s in self.spectra.items()
            },
            "timings": self.timings,
        }
        if self.reference is not None:
            out["reference3d"] = {
                "eigenvalues": self.reference.eigenvalues.tolist(),
                "threshold": self.reference.threshold,
                "bound": self.reference.bound.tolist(),
            }
        if self.gauge is not None:
            out["diabatic"] = {
                "residual_F": float(np.max(np.abs(self.gauge.residual_F))),
                "unitarity_defect": self.gauge.unitarity_defect(),
                "closed_form_gap": self.gauge.closed_form_gap,
            }
        return out


class ScenarioRunner:
    """
    Run one scenario end to end.

    Usage:
        runner = ScenarioRunner(load_scenario("bent.toml"))
        results = runner.run()
        print(results.spectra["subset_bh"].summary())
    """

    def __init__(
        self,
        config: ScenarioConfig,
        base_dir: Path | None = None,
    ):
        """
        Args:
            config: validated scenario
            base_dir: directory that relative table paths are resolved against
        """
        self.config = config
        self.base_dir = base_dir
        self.solver = config.solver
        self._timings: dict[str, float] = {}
        self._timing_lock = threading.Lock()

    def _timed(self, stage: str, fn, *args, **kwargs):
        start = time.perf_counter()
        out = fn(*args, **kwargs)
        with self._timing_lock:
            self._timings[stage] = self._timings.get(stage, 0.0) + time.perf_counter() - start
        return out

    def run(self) -> ScenarioResults:
        """
        Execute every requested stage.

        Raises:
            SolverError: from any numerical stage
        """
        cfg = self.config
        slices = cfg.slices()
        curve = cfg.build_curve(self.base_dir)
        pot = cfg.build_potential(self.base_dir)
        logger.info("scenario %s: %s, %d slices", cfg.name, curve.summary(), slices.size)

        frame = self._timed("geometry", frenet_frame_and_curve, curve, slices)
        bundle = self._timed("transverse", self._bundle, pot, slices, curve, frame)
        results = ScenarioResults(config=cfg, curve=curve, frame=frame, bundle=bundle)

        # one coupling set per subset, shared by the tiers
        tiers = {name: self._tier(name) for name in self.solver.tiers if name != REFERENCE_TIER}
        inputs = {name: self._couplings(results, tier) for name, tier in tiers.items()}
        if cfg.modes.indices not in results.couplings:
            self._couplings(results, ApproximationTier(TierTag.SUBSET_BH, cfg.modes.indices))

        with ThreadPoolExecutor(max_workers=self.solver.threads) as pool:
            jobs = {name: pool.submit(self._solve_tier, inputs[name], tier) for name, tier in tiers.items()}
            reference = None
            if REFERENCE_TIER in self.solver.tiers:
                reference = pool.submit(self._timed, "reference3d", self._reference, curve, frame, pot)
            for name, job in jobs.items():
                results.hamiltonians[name], results.spectra[name] = job.result()
            if reference is not None:
                results.reference = reference.result()
        logger.debug("solved %d tiers on %d threads", len(jobs) + (reference is not None), self.solver.threads)

        if self.solver.diabatic and len(cfg.modes.subset) >= 2:
            self._timed("diabatic", self._diabatize, results)
        self._timed("series", self._series, results)
        results.single_mode = single_mode_potentials(bundle, curve, cfg.modes.indices[0], pot)

        results.timings = dict(self._timings)
        return results

    # === STAGES ===

    def _bundle(self, pot: CrossSectionPotential, slices, curve, frame) -> ModeBundle:
        s, modes = self.solver, self.config.modes
        return compute_mode_bundle(
            self.config.build_grid(), pot, slices, modes.n_total,
            curve=curve, frame=frame, threads=s.threads, seed=s.seed,
            tracked=modes.tracked or max(modes.indices) + 1,
            min_overlap=s.tracking_min_overlap,
            stencil_order=s.stencil_order, mode_cap=s.mode_cap,
            residual_tol=s.residual_tol, degeneracy_tol=s.degeneracy_tol,
        )

    def _tier(self, name: str) -> ApproximationTier:
        subset = self.config.modes.indices
        tag = TierTag(name)
        return ApproximationTier(tag, subset[:1] if tag.single_mode else subset)

    def _couplings(self, results: ScenarioResults, tier: ApproximationTier) -> CouplingSet:
        key = tier.subset
        if key not in results.couplings:
            results.couplings[key] = self._timed(
                "couplings", compute_couplings,
                results.bundle, results.frame, results.curve, key, threads=self.solver.threads,
            )
        couplings = results.couplings[key]
        if tier.tag.needs_primed and not couplings.has_primed:
            couplings = results.couplings[key] = self._timed("couplings", merge_kinetic, couplings)
        return couplings

    def _solve_tier(
        self, couplings: CouplingSet, tier: ApproximationTier
    ) -> tuple[EffectiveHamiltonian, SpectralResult]:
        H = self._timed("effective", assemble_effective, couplings, tier)
        return H, self._timed("longitudinal", self._spectrum, H)

    def _spectrum(self, H: EffectiveHamiltonian) -> SpectralResult:
        n_states = min(self.solver.n_states, H.dimension)
        v0 = np.random.default_rng(self.solver.seed).standard_normal(H.dimension)
        return solve_spectrum(H, n_states, residual_tol=self.solver.residual_tol, v0=v0)

    def _reference(self, curve, frame, pot) -> ReferenceResult:
        r = self.solver.reference3d
        lx, ly = self.solver.extent
        grid = Grid3D.for_curve(curve, r.n1, r.nx, r.ny, lx, ly)
        return solve_reference(
            curve, frame, pot, grid,
            n_states=self.solver.n_states, residual_tol=self.solver.residual_tol, seed=self.solver.seed,
        )

    def _diabatize(self, results: ScenarioResults) -> None:
        """Strictly diabatic basis over the subset, unit at the gauge origin."""
        couplings = results.main_couplings
        S = solve_lyapunov(couplings.D, couplings.F)
        gauge = adiabatic_to_diabatic(S, couplings.slices, F=couplings.F, D=couplings.D)
        origin = self.solver.gauge_origin
        if origin is not None:
            k = int(np.argmin(np.abs(couplings.slices - origin)))
            A0 = np.conj(gauge.A[k]).T
            gauge = adiabatic_to_diabatic(S, couplings.slices, A0=A0, F=couplings.F, D=couplings.D)
        results.gauge = gauge
        results.diabatic = gauge_transform(couplings, gauge)
        logger.info(
            "diabatic basis: residual |F~| %.2e, unitarity defect %.2e",
            float(np.max(np.abs(gauge.residual_F))), gauge.unitarity_defect(),
        )

    def _series(self, results: ScenarioResults) -> None:
        """Series couplings and the per-slice dominant-term ledger."""
        order = self.solver.series_order
        subset = self.config.modes.indices
        try:
            moments = build_moment_table(results.bundle, results.frame, order)
            parts = [
                coupling_matrices_series(results.bundle, moments, results.curve, order, float(u), subset=subset)
                for u in results.bundle.slices
            ]
        except SeriesDomainError as exc:
            logger.warning("series couplings skipped: %s", exc)
            return
        results.series = CouplingSet.from_slices(parts)
        results.dominant_terms = [p.dominant_correction() for p in parts]
        gap = float(np.max(np.abs(results.series.G - results.main_couplings.G)))
        if gap > SERIES_G_NOTICE:
            logger.info("order-%d series G differs from quadrature by %.2e", order, gap)


def run_scenario(config: ScenarioConfig, base_dir: Path | None = None) -> ScenarioResults:
    """Convenience wrapper around ScenarioRunner."""
    return ScenarioRunner(config, base_dir=base_dir).run()
