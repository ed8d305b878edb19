"""File persistence: JSON documents and CSV tables, written atomically.

Floats are serialized with shortest-round-trip repr so files are exact and
byte-identical across runs.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .crystal import CrystalLattice
from .dynamics import SpectrumTrace, Trajectory
from .modes import ModeHistogram, ModeSpectrum
from .thermometry import FitMetadata, FitResult, ObservedSpectrum
from .trap import TrapParams


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# lattice


def lattice_to_json(lattice: CrystalLattice) -> str:
    return _dump_json(
        {
            "params": lattice.params.to_hz_dict(),
            "n_ions": lattice.n_ions,
            "positions_m": lattice.positions.tolist(),
            "converged": lattice.converged,
            "residual_force_max_N": lattice.residual_force_max,
            "planar": lattice.planar,
            "energy_J": lattice.energy,
            "seed": lattice.seed,
        }
    )


def lattice_from_json(text: str) -> CrystalLattice:
    doc = json.loads(text)
    p = doc["params"]
    params = TrapParams.from_hz(
        axial_hz=p["axial_com_hz"],
        cyclotron_hz=p["cyclotron_hz"],
        rotation_hz=p["rotation_hz"],
        delta_wall=p.get("wall_delta", 0.0),
        mass=p["mass_kg"],
        charge=p["charge_c"],
    )
    return CrystalLattice(
        params=params,
        positions=np.asarray(doc["positions_m"], dtype=float),
        converged=doc["converged"],
        residual_force_max=doc["residual_force_max_N"],
        planar=doc["planar"],
        energy=doc.get("energy_J", float("nan")),
        seed=doc.get("seed"),
    )


def save_lattice(lattice: CrystalLattice, path: str | Path) -> None:
    atomic_write_text(path, lattice_to_json(lattice))


def load_lattice(path: str | Path) -> CrystalLattice:
    return lattice_from_json(Path(path).read_text(encoding="utf-8"))


def lattice_to_csv(lattice: CrystalLattice) -> str:
    return _csv(["x_m", "y_m", "z_m"], lattice.positions)


# ---------------------------------------------------------------------------
# mode spectrum and histogram


def spectrum_to_json(spectrum: ModeSpectrum) -> str:
    return _dump_json(
        {
            "frequencies_hz": spectrum.frequencies_hz.tolist(),
            "eigenvalues_rad2_per_s2": spectrum.eigenvalues.tolist(),
            "eigenvectors_row_major": spectrum.b.tolist(),
            "mass_kg": spectrum.mass,
            "unstable_modes": list(spectrum.unstable_modes),
            "degenerate_clusters": spectrum.degenerate_clusters.tolist(),
            "source_lattice_hash": spectrum.source_lattice_hash,
        }
    )


def spectrum_from_json(text: str) -> ModeSpectrum:
    doc = json.loads(text)
    eigenvalues = np.asarray(doc["eigenvalues_rad2_per_s2"], dtype=float)
    return ModeSpectrum(
        omega=np.asarray(doc["frequencies_hz"], dtype=float) * 2.0 * np.pi,
        b=np.asarray(doc["eigenvectors_row_major"], dtype=float),
        mass=doc["mass_kg"],
        eigenvalues=eigenvalues,
        unstable_modes=tuple(doc.get("unstable_modes", ())),
        degenerate_clusters=np.asarray(doc.get("degenerate_clusters", []), dtype=int),
        source_lattice_hash=doc.get("source_lattice_hash"),
    )


def save_spectrum(spectrum: ModeSpectrum, path: str | Path) -> None:
    atomic_write_text(path, spectrum_to_json(spectrum))


def load_spectrum(path: str | Path) -> ModeSpectrum:
    return spectrum_from_json(Path(path).read_text(encoding="utf-8"))


def histogram_to_csv(histogram: ModeHistogram) -> str:
    rows = zip(histogram.bin_centers_hz, histogram.counts)
    return _csv(["bin_center_hz", "count"], rows)


def save_histogram(histogram: ModeHistogram, path: str | Path) -> None:
    atomic_write_text(path, histogram_to_csv(histogram))


# ---------------------------------------------------------------------------
# traces, trajectories, fits


def trace_to_csv(trace: SpectrumTrace) -> str:
    if trace.p_up_per_ion is None:
        header = ["mu_over_2pi_hz", "p_up_mean"]
        rows = zip(trace.mu_over_2pi, trace.p_up_mean)
    else:
        n = trace.p_up_per_ion.shape[0]
        header = ["mu_over_2pi_hz", "p_up_mean"] + [f"p_up_ion_{j}" for j in range(n)]
        rows = (
            [mu, pm, *col]
            for mu, pm, col in zip(trace.mu_over_2pi, trace.p_up_mean, trace.p_up_per_ion.T)
        )
    return _csv(header, rows)


def save_trace(trace: SpectrumTrace, path: str | Path) -> None:
    atomic_write_text(path, trace_to_csv(trace))


def load_trace(path: str | Path) -> SpectrumTrace:
    mu, p_up, per_ion = [], [], []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    if header[:2] != ["mu_over_2pi_hz", "p_up_mean"]:
        raise ValueError(f"{path}: not a spectrum trace file")
    for line in lines[1:]:
        if not line.strip():
            continue
        cells = [float(c) for c in line.split(",")]
        mu.append(cells[0])
        p_up.append(cells[1])
        if len(cells) > 2:
            per_ion.append(cells[2:])
    return SpectrumTrace(
        mu_over_2pi=np.asarray(mu),
        p_up_mean=np.asarray(p_up),
        p_up_per_ion=np.asarray(per_ion).T if per_ion else None,
    )


def trajectory_to_csv(trajectory: Trajectory) -> str:
    rows = zip(trajectory.times, trajectory.alpha.real, trajectory.alpha.imag)
    return _csv(["t_s", "re_alpha", "im_alpha"], rows)


def save_trajectory(trajectory: Trajectory, path: str | Path) -> None:
    atomic_write_text(path, trajectory_to_csv(trajectory))


def fit_result_to_json(result: FitResult) -> str:
    return _dump_json(
        {
            "nbar": result.nbar,
            "nbar_err": result.nbar_err,
            "temperature_k": result.temperature,
            "temperature_err_k": result.temperature_err,
            "gamma_used_per_s": result.gamma_used,
            "chi2_reduced": result.chi2_reduced,
            "status": result.status,
            "systematic_note": result.systematic_note,
        }
    )


def save_fit_result(result: FitResult, path: str | Path) -> None:
    atomic_write_text(path, fit_result_to_json(result))


# ---------------------------------------------------------------------------
# observed spectra (measurement ingest)


def observed_to_csv(data: ObservedSpectrum) -> str:
    return _csv(["mu_hz", "p_up", "sigma"], zip(data.mu_hz, data.p_up, data.sigma))


def save_observed(data: ObservedSpectrum, path: str | Path) -> None:
    atomic_write_text(path, observed_to_csv(data))


def load_observed(path: str | Path, metadata_path: str | Path | None = None) -> ObservedSpectrum:
    """Read (mu_hz, p_up, sigma) rows; metadata comes from a JSON sidecar.

    The sidecar defaults to <path>.meta.json and is optional.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split(",")[:3] != ["mu_hz", "p_up", "sigma"]:
        raise ValueError(f"{path}: expected header mu_hz,p_up,sigma")
    table = [[float(c) for c in line.split(",")] for line in lines[1:] if line.strip()]
    arr = np.asarray(table, dtype=float).reshape(-1, 3)

    if metadata_path is None:
        candidate = Path(str(path) + ".meta.json")
        metadata_path = candidate if candidate.exists() else None
    meta = FitMetadata()
    if metadata_path is not None:
        doc = json.loads(Path(metadata_path).read_text(encoding="utf-8"))
        theta_deg = doc.get("theta_r_deg")
        meta = FitMetadata(
            n_ions=doc.get("n_ions"),
            n_ions_err=doc.get("n_ions_err"),
            theta_r=None if theta_deg is None else float(np.radians(theta_deg)),
            theta_r_rel_err=doc.get("theta_r_rel_err"),
        )
    return ObservedSpectrum(mu_hz=arr[:, 0], p_up=arr[:, 1], sigma=arr[:, 2], metadata=meta)
