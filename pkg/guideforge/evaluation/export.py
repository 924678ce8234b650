"""
Result files.

Every CSV table starts with ``#`` provenance lines (package version,
config hash, tolerances) followed by the column header. Floats are written
with 17 significant digits so that re-imported tables reproduce the
in-memory values exactly.
"""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from .. import __version__
from ..couplings.types import MATRIX_NAMES, OPTIONAL_NAMES, CouplingSet
from ..errors import ExportError
from .metrics import compare_tiers
from .runner import REFERENCE_TIER, ScenarioResults

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
COUPLING_NAMES = MATRIX_NAMES + OPTIONAL_NAMES


def provenance(results: ScenarioResults) -> list[str]:
    s = results.config.solver
    return [
        f"guideforge {__version__}",
        f"scenario {results.config.name}",
        f"config_sha256 {results.config.fingerprint()}",
        f"residual_tol {s.residual_tol:g} degeneracy_tol {s.degeneracy_tol:g} "
        f"hf_degeneracy_tol {s.hf_degeneracy_tol:g} tracking_min_overlap {s.tracking_min_overlap:g}",
    ]


def write_table(frame: pd.DataFrame, path: Path, header: list[str]) -> Path:
    """Write ``frame`` below ``#``-prefixed header lines."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            for line in header:
                handle.write(f"# {line}\n")
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def load_table(path: str | Path) -> pd.DataFrame:
    """Read a table written by ``write_table``, skipping the provenance lines."""
    return pd.read_csv(path, comment="#")


# === TABLES ===

def coupling_table(couplings: CouplingSet) -> pd.DataFrame:
    """One row per slice and (m, n) pair of subset modes; m, n are 1-based."""
    N, n = couplings.n_slices, couplings.n_modes
    ii, mm, nn = np.meshgrid(np.arange(N), np.arange(n), np.arange(n), indexing="ij")
    subset = np.asarray(couplings.subset)
    columns = {
        "u1": couplings.slices[ii.ravel()],
        "m": subset[mm.ravel()] + 1,
        "n": subset[nn.ravel()] + 1,
    }
    for name in COUPLING_NAMES:
        values = getattr(couplings, name)
        if values is None:
            continue
        columns[name] = np.real(values).ravel()
        if np.iscomplexobj(values) and np.any(np.imag(values)):
            columns[f"{name}_imag"] = np.imag(values).ravel()
    return pd.DataFrame(columns)


def load_coupling_matrices(path: str | Path) -> dict[str, np.ndarray]:
    """Stack an exported coupling table back into (N, n, n) arrays."""
    table = load_table(path)
    slices = np.unique(table["u1"].to_numpy())
    n = int(np.sqrt(len(table) // slices.size))
    out = {"slices": slices}
    for name in COUPLING_NAMES:
        if name not in table:
            continue
        values = table[name].to_numpy()
        if f"{name}_imag" in table:
            values = values + 1j * table[f"{name}_imag"].to_numpy()
        out[name] = values.reshape(slices.size, n, n)
    return out


def potential_table(results: ScenarioResults) -> pd.DataFrame:
    """Diagonal effective potential of every tier, one row per slice and mode."""
    frames = []
    for tier, H in results.hamiltonians.items():
        potential = H.effective_potential()
        N, n = potential.shape
        frames.append(pd.DataFrame({
            "tier": tier,
            "u1": np.repeat(H.slices, n),
            "mode": np.tile(np.asarray(H.tier.subset) + 1, N),
            "potential": potential.ravel(),
        }))
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=["tier", "u1", "mode", "potential"])


def single_mode_table(results: ScenarioResults) -> pd.DataFrame:
    sm = results.single_mode
    columns = {
        "u1": sm.slices,
        "V_longitudinal": sm.V_longitudinal,
        "V_surface": sm.V_surface,
        "V_geo": sm.V_geo,
        "V_bh_diag": sm.V_bh_diag,
        "total": sm.total,
    }
    if sm.V_twist is not None:
        columns["V_twist"] = sm.V_twist
    if sm.V_shift is not None:
        columns["V_shift"] = sm.V_shift
    return pd.DataFrame(columns)


def spectrum_table(results: ScenarioResults) -> pd.DataFrame:
    """One row per eigenvalue with its tier tag."""
    rows = []
    for tier, s in results.spectra.items():
        for k in range(s.n_states):
            rows.append({
                "tier": tier, "state": k + 1, "energy": float(s.eigenvalues[k]),
                "threshold": s.threshold, "bound": bool(s.bound[k]), "residual": float(s.residuals[k]),
            })
    if results.reference is not None:
        ref = results.reference
        for k, energy in enumerate(ref.eigenvalues):
            rows.append({
                "tier": REFERENCE_TIER, "state": k + 1, "energy": float(energy),
                "threshold": ref.threshold, "bound": bool(ref.bound[k]), "residual": float(ref.residuals[k]),
            })
    return pd.DataFrame(rows, columns=["tier", "state", "energy", "threshold", "bound", "residual"])


def diabatic_table(results: ScenarioResults) -> pd.DataFrame:
    gauge = results.gauge
    columns = {
        "u1": gauge.slices,
        "residual_F": np.max(np.abs(gauge.residual_F), axis=(1, 2)),
        "polar_correction": np.concatenate([[0.0], gauge.polar_corrections]),
    }
    if gauge.gamma is not None:
        columns["gamma"] = gauge.gamma
    return pd.DataFrame(columns)


def ledger_table(results: ScenarioResults) -> pd.DataFrame:
    return pd.DataFrame({
        "u1": results.series.slices,
        "dominant_term": [t or "" for t in results.dominant_terms],
    })


def export_results(
    results: ScenarioResults,
    directory: str | Path | None = None,
    formats: list[str] | None = None,
) -> list[Path]:
    """
    Write all result tables and the run summary.

    Args:
        results: finished scenario run
        directory: output directory; defaults to the config's output.directory
        formats: any of "csv", "json"; defaults to the config's output.formats

    Returns:
        Paths written, in order

    Raises:
        ExportError: if a file cannot be written
    """
    out_dir = Path(directory or results.config.output.directory)
    formats = formats or list(results.config.output.formats)
    header = provenance(results)
    written: list[Path] = []

    if "csv" in formats:
        for key, couplings in results.couplings.items():
            suffix = "_".join(str(m + 1) for m in key)
            written.append(write_table(coupling_table(couplings), out_dir / f"couplings_{suffix}.csv", header))
        written.append(write_table(potential_table(results), out_dir / "potentials.csv", header))
        written.append(write_table(spectrum_table(results), out_dir / "spectra.csv", header))
        if results.single_mode is not None:
            written.append(write_table(single_mode_table(results), out_dir / "single_mode.csv", header))
        if results.gauge is not None:
            written.append(write_table(diabatic_table(results), out_dir / "diabatic.csv", header))
            written.append(write_table(coupling_table(results.diabatic), out_dir / "couplings_diabatic.csv", header))
        if results.series is not None:
            written.append(write_table(ledger_table(results), out_dir / "series_ledger.csv", header))

    if "json" in formats:
        summary = results.to_dict()
        summary["comparison"] = compare_tiers(results).to_dict()
        path = out_dir / "summary.json"
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(summary, indent=2, default=float))
        except OSError as exc:
            raise ExportError(f"cannot write {path}: {exc}") from exc
        written.append(path)

    logger.info("wrote %d files to %s", len(written), out_dir)
    return written
