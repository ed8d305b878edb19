"""Run configuration: one JSON document describing a whole pipeline run.

Boundary units are ordinary frequencies (Hz), angles in degrees, lengths in
meters; everything is converted to internal SI/angular units when the typed
objects are built. The normalized source dict is kept verbatim so that
load(save(config)) reproduces the same configuration bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import BE9_ION_MASS, ELEMENTARY_CHARGE
from .dynamics import ThermalState
from .errors import ConfigError, DrumheadError
from .modes import ModeSpectrum
from .odf import BeamGeometry, DriveConfig, Ramsey, SpinEcho, force_from_intensity
from .trap import TWO_PI, TrapParams


def _expect(raw: dict, where: str, key: str, kinds, required: bool = True, default=None):
    if key not in raw:
        if required:
            raise ConfigError(f"{where}.{key}", "missing required field")
        return default
    value = raw[key]
    if kinds is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}.{key}", f"expected a boolean, got {value!r}")
        return value
    if kinds is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}.{key}", f"expected a number, got {value!r}")
        return float(value)
    if kinds is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}.{key}", f"expected an integer, got {value!r}")
        return value
    if kinds is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}.{key}", f"expected a string, got {value!r}")
        return value
    if kinds is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{where}.{key}", f"expected an object, got {value!r}")
        return value
    if kinds is list:
        if not isinstance(value, list):
            raise ConfigError(f"{where}.{key}", f"expected a list, got {value!r}")
        return value
    raise AssertionError(f"unknown kind {kinds}")


def _reject_unknown(raw: dict, where: str, allowed: set[str]) -> None:
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"{where}.{sorted(unknown)[0]}", "unknown field")


@dataclass(frozen=True)
class SweepGrid:
    start_hz: float
    stop_hz: float
    step_hz: float

    def __post_init__(self):
        if self.step_hz <= 0.0:
            raise ConfigError("sweep.step_hz", "step must be positive")
        if self.stop_hz <= self.start_hz:
            raise ConfigError("sweep.stop_hz", "stop must exceed start")

    def points_hz(self) -> np.ndarray:
        n = int(math.floor((self.stop_hz - self.start_hz) / self.step_hz + 1e-9)) + 1
        return self.start_hz + self.step_hz * np.arange(n)

    def points_rad_s(self) -> np.ndarray:
        return self.points_hz() * TWO_PI


@dataclass(frozen=True)
class ThermalSpec:
    """Declarative occupation assignment, realized once a spectrum exists."""

    kind: str
    nbar_per_mode: tuple | None = None
    nbar_uniform: float | None = None
    temperature_k: float | None = None
    nbar_com: float | None = None
    bath_temperature_k: float | None = None

    def realize(self, spectrum: ModeSpectrum) -> ThermalState:
        if self.kind == "per_mode":
            values = np.asarray(self.nbar_per_mode, dtype=float)
            if len(values) != spectrum.n_modes:
                raise DrumheadError(
                    f"thermal.nbar_per_mode has {len(values)} entries, spectrum has "
                    f"{spectrum.n_modes} modes"
                )
            return ThermalState(values)
        if self.kind == "uniform_nbar":
            return ThermalState.uniform(spectrum.n_modes, self.nbar_uniform)
        if self.kind == "temperature":
            return ThermalState.from_temperature(spectrum, self.temperature_k)
        if self.kind == "com_plus_bath":
            return ThermalState.com_plus_bath(spectrum, self.nbar_com, self.bath_temperature_k)
        raise AssertionError(self.kind)


@dataclass(frozen=True)
class Seeds:
    lattice: int = 0
    noise: int = 0


@dataclass
class RunConfig:
    trap: TrapParams
    n_ions: int
    beam: BeamGeometry | None
    drive: DriveConfig | None
    thermal: ThermalSpec | None
    sweep: SweepGrid | None
    seeds: Seeds
    raw: dict

    def to_dict(self) -> dict:
        return self.raw

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.raw == other.raw


def _parse_trap(raw: dict) -> TrapParams:
    _reject_unknown(
        raw, "trap",
        {"axial_com_hz", "cyclotron_hz", "rotation_hz", "wall_delta", "mass_kg", "charge_c"},
    )
    try:
        return TrapParams.from_hz(
            axial_hz=_expect(raw, "trap", "axial_com_hz", float),
            cyclotron_hz=_expect(raw, "trap", "cyclotron_hz", float),
            rotation_hz=_expect(raw, "trap", "rotation_hz", float),
            delta_wall=_expect(raw, "trap", "wall_delta", float, required=False, default=0.0),
            mass=_expect(raw, "trap", "mass_kg", float, required=False, default=BE9_ION_MASS),
            charge=_expect(raw, "trap", "charge_c", float, required=False, default=ELEMENTARY_CHARGE),
        )
    except ConfigError:
        raise
    except DrumheadError as exc:
        raise ConfigError("trap", str(exc)) from exc


def _parse_beam(raw: dict) -> BeamGeometry:
    _reject_unknown(
        raw, "beam",
        {"wavelength_m", "crossing_angle_deg", "waist_z_m", "waist_x_m", "misalignment_deg"},
    )
    try:
        return BeamGeometry(
            wavelength=_expect(raw, "beam", "wavelength_m", float),
            theta_r=math.radians(_expect(raw, "beam", "crossing_angle_deg", float)),
            waist_z=_expect(raw, "beam", "waist_z_m", float, required=False, default=100e-6),
            waist_x=_expect(raw, "beam", "waist_x_m", float, required=False, default=1e-3),
            misalignment_err=math.radians(
                _expect(raw, "beam", "misalignment_deg", float, required=False, default=0.0)
            ),
        )
    except ValueError as exc:
        raise ConfigError("beam", str(exc)) from exc


def _parse_sequence(raw: dict) -> Ramsey | SpinEcho:
    _reject_unknown(raw, "drive.sequence", {"type", "tau_s", "t_pi_s"})
    kind = _expect(raw, "drive.sequence", "type", str)
    tau = _expect(raw, "drive.sequence", "tau_s", float)
    try:
        if kind == "spin_echo":
            t_pi = _expect(raw, "drive.sequence", "t_pi_s", float, required=False, default=0.0)
            return SpinEcho(tau=tau, t_pi=t_pi)
        if kind == "ramsey":
            return Ramsey(tau=tau)
    except ValueError as exc:
        raise ConfigError("drive.sequence", str(exc)) from exc
    raise ConfigError("drive.sequence.type", f"expected 'spin_echo' or 'ramsey', got {kind!r}")


def _parse_drive(raw: dict) -> DriveConfig:
    _reject_unknown(
        raw, "drive",
        {"force_n", "force_n_per_ion", "intensity_w_cm2", "mu_r_hz", "gamma_per_s", "sequence"},
    )
    sources = [k for k in ("force_n", "force_n_per_ion", "intensity_w_cm2") if k in raw]
    if len(sources) != 1:
        raise ConfigError("drive", "give exactly one of force_n, force_n_per_ion, intensity_w_cm2")
    if sources[0] == "force_n":
        forces = _expect(raw, "drive", "force_n", float)
    elif sources[0] == "intensity_w_cm2":
        forces = force_from_intensity(_expect(raw, "drive", "intensity_w_cm2", float))
    else:
        forces = np.asarray(_expect(raw, "drive", "force_n_per_ion", list), dtype=float)
    mu_hz = _expect(raw, "drive", "mu_r_hz", float, required=False)
    try:
        return DriveConfig(
            forces=forces,
            mu_r=None if mu_hz is None else mu_hz * TWO_PI,
            gamma=_expect(raw, "drive", "gamma_per_s", float),
            sequence=_parse_sequence(_expect(raw, "drive", "sequence", dict)),
        )
    except ValueError as exc:
        raise ConfigError("drive", str(exc)) from exc


def _parse_thermal(raw: dict) -> ThermalSpec:
    _reject_unknown(
        raw, "thermal",
        {"nbar_per_mode", "nbar_uniform", "temperature_k", "nbar_com", "bath_temperature_k"},
    )
    if "nbar_per_mode" in raw:
        values = _expect(raw, "thermal", "nbar_per_mode", list)
        return ThermalSpec(kind="per_mode", nbar_per_mode=tuple(float(v) for v in values))
    if "nbar_uniform" in raw:
        return ThermalSpec(kind="uniform_nbar", nbar_uniform=_expect(raw, "thermal", "nbar_uniform", float))
    if "temperature_k" in raw:
        return ThermalSpec(kind="temperature", temperature_k=_expect(raw, "thermal", "temperature_k", float))
    if "nbar_com" in raw:
        return ThermalSpec(
            kind="com_plus_bath",
            nbar_com=_expect(raw, "thermal", "nbar_com", float),
            bath_temperature_k=_expect(raw, "thermal", "bath_temperature_k", float),
        )
    raise ConfigError("thermal", "no occupation specification recognized")


def from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("$", "top level must be an object")
    _reject_unknown(raw, "$", {"trap", "n_ions", "beam", "drive", "thermal", "sweep", "seeds"})
    trap = _parse_trap(_expect(raw, "$", "trap", dict))
    n_ions = _expect(raw, "$", "n_ions", int)
    if n_ions < 1:
        raise ConfigError("n_ions", "must be >= 1")

    beam = drive = thermal = sweep = None
    if "beam" in raw:
        beam = _parse_beam(_expect(raw, "$", "beam", dict))
    if "drive" in raw:
        drive = _parse_drive(_expect(raw, "$", "drive", dict))
        if isinstance(drive.forces, np.ndarray) and len(drive.forces) != n_ions:
            raise ConfigError("drive.force_n_per_ion", f"length must equal n_ions = {n_ions}")
    if "thermal" in raw:
        thermal = _parse_thermal(_expect(raw, "$", "thermal", dict))
    if "sweep" in raw:
        sraw = _expect(raw, "$", "sweep", dict)
        _reject_unknown(sraw, "sweep", {"start_hz", "stop_hz", "step_hz"})
        sweep = SweepGrid(
            start_hz=_expect(sraw, "sweep", "start_hz", float),
            stop_hz=_expect(sraw, "sweep", "stop_hz", float),
            step_hz=_expect(sraw, "sweep", "step_hz", float),
        )
    seeds = Seeds()
    if "seeds" in raw:
        sraw = _expect(raw, "$", "seeds", dict)
        _reject_unknown(sraw, "seeds", {"lattice", "noise"})
        seeds = Seeds(
            lattice=_expect(sraw, "seeds", "lattice", int, required=False, default=0),
            noise=_expect(sraw, "seeds", "noise", int, required=False, default=0),
        )
    return RunConfig(
        trap=trap, n_ions=n_ions, beam=beam, drive=drive,
        thermal=thermal, sweep=sweep, seeds=seeds, raw=raw,
    )


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$ (line {exc.lineno}, col {exc.colno})", exc.msg) from exc
    return from_dict(raw)


def save_config(config: RunConfig, path: str | Path) -> None:
    from .io_formats import atomic_write_text

    atomic_write_text(path, json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
