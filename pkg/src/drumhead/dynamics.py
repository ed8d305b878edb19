"""Spin-dependent displacements, decoherence lineshapes, and spectra.

A sigma_z-dependent lattice force F_j cos(mu t + phi) drives each transverse
mode m into a spin-conditioned coherent displacement

    alpha_jm(t, phi) = (F_j b_jm z_0m / hbar) * G_m(t, phi),
    G_m(t, phi) = (i/2) [ e^{i phi} E(omega_m + mu, t) + e^{-i phi} E(omega_m - mu, t) ],
    E(x, t) = integral_0^t e^{i x t'} dt' = t (e^{i x t} - 1)/(i x t),

with z_0m = sqrt(hbar / 2 M omega_m). E is entire in x, so exact resonance
mu = omega_m needs no special casing beyond a short Taylor series of
(e^{iu}-1)/(iu) for small |u|; the usual textbook form with the
1/(mu^2 - omega_m^2) pole is algebraically identical away from resonance.

A spin echo applies the drive in two arms of length tau separated by a pi
pulse of length t_pi; the second arm enters with an accumulated drive-vs-mode
phase phi_m = (tau + t_pi)(mu - omega_m) and opposite spin sign, giving
alpha^SE = alpha(tau, 0) - alpha(tau, phi_m).

Tracing out the motion of a thermal crystal turns the residual entanglement
into a bright-state probability

    P_up^(j) = 1/2 [1 - e^{-Gamma T} exp(-2 sum_m |alpha_jm|^2 (2 nbar_m + 1))],

with T the total drive-on time (2 tau for the echo, tau for Ramsey).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .constants import HBAR, K_B
from .errors import DrumheadError
from .modes import ModeSpectrum
from .odf import DriveConfig, Ramsey, SpinEcho
from .trap import TWO_PI

_SERIES_CUTOFF = 1e-2


def _cisr(u: np.ndarray) -> np.ndarray:
    """(e^{iu} - 1)/(iu), entire in u; Taylor-summed for small |u|."""
    u = np.asarray(u, dtype=float)
    out = np.empty(u.shape, dtype=complex)
    small = np.abs(u) < _SERIES_CUTOFF
    iu = 1j * u[small]
    term = np.ones_like(iu)
    acc = np.ones_like(iu)
    for k in range(1, 8):
        term = term * iu / (k + 1.0)
        acc += term
    out[small] = acc
    ub = u[~small]
    out[~small] = (np.exp(1j * ub) - 1.0) / (1j * ub)
    return out


def _phasor_integral(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """E(x, t) = integral_0^t e^{i x t'} dt'."""
    x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
    return t * _cisr(x * t)


def _arm_factor(omega, mu, t, phi):
    """G(t, phi) such that alpha = (F b z0 / hbar) G for drive cos(mu t' + phi)."""
    ep = _phasor_integral(omega + mu, t)
    em = _phasor_integral(omega - mu, t)
    return 0.5j * (np.exp(1j * np.asarray(phi)) * ep + np.exp(-1j * np.asarray(phi)) * em)


def _echo_factor(omega, mu, sequence: SpinEcho):
    phi = (sequence.tau + sequence.t_pi) * (mu - omega)
    return _arm_factor(omega, mu, sequence.tau, 0.0) - _arm_factor(omega, mu, sequence.tau, phi)


# ---------------------------------------------------------------------------
# thermal occupations


@dataclass(frozen=True)
class ThermalState:
    """Mean occupation nbar_m of each mode, ordered like the spectrum."""

    nbar: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.nbar, dtype=float)
        if np.any(arr < 0.0):
            raise ValueError("occupations must be >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "nbar", arr)

    @classmethod
    def uniform(cls, n_modes: int, nbar: float) -> "ThermalState":
        return cls(np.full(n_modes, float(nbar)))

    @classmethod
    def from_temperature(cls, spectrum: ModeSpectrum, kelvin: float) -> "ThermalState":
        """Single temperature for every mode, nbar_m = k_B T / (hbar omega_m)."""
        if not spectrum.stable:
            raise DrumheadError("cannot assign a temperature to an unstable spectrum")
        return cls(K_B * kelvin / (HBAR * spectrum.omega))

    @classmethod
    def com_plus_bath(
        cls, spectrum: ModeSpectrum, nbar_com: float, bath_temperature: float
    ) -> "ThermalState":
        """COM occupation set directly; every other mode thermal at one temperature."""
        if not spectrum.stable:
            raise DrumheadError("cannot assign a temperature to an unstable spectrum")
        nbar = K_B * bath_temperature / (HBAR * spectrum.omega)
        nbar[0] = nbar_com
        return cls(nbar)


# ---------------------------------------------------------------------------
# displacement fields


@dataclass(frozen=True)
class DisplacementField:
    """alpha[j, m]: spin-conditioned displacement of mode m tied to ion j."""

    alpha: np.ndarray
    mu_r: float
    kind: str  # "single_arm" or "spin_echo"

    def __post_init__(self):
        arr = np.asarray(self.alpha, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "alpha", arr)


def _require_mu(drive: DriveConfig) -> float:
    if drive.mu_r is None:
        raise ValueError("drive.mu_r is unset; use drive.with_mu(...) or a sweep")
    return float(drive.mu_r)


def _coefficients(drive: DriveConfig, spectrum: ModeSpectrum) -> np.ndarray:
    """(N_ion, M) prefactors F_j b_jm z_0m / hbar."""
    if not spectrum.stable:
        raise DrumheadError("cannot drive an unstable mode spectrum")
    forces = drive.force_array(spectrum.b.shape[0])
    z0 = spectrum.ground_state_lengths()
    return (forces[:, None] / HBAR) * spectrum.b * z0[None, :]


def alpha_single_arm(
    drive: DriveConfig, spectrum: ModeSpectrum, tau: float, phi: float = 0.0
) -> DisplacementField:
    """Displacements after one drive arm of duration tau with phase offset phi."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    mu = _require_mu(drive)
    g = _arm_factor(spectrum.omega, mu, tau, phi)
    return DisplacementField(alpha=_coefficients(drive, spectrum) * g[None, :], mu_r=mu, kind="single_arm")


def alpha_spin_echo(drive: DriveConfig, spectrum: ModeSpectrum) -> DisplacementField:
    """Net displacements after the full spin-echo sequence."""
    if not isinstance(drive.sequence, SpinEcho):
        raise ValueError("alpha_spin_echo requires a SpinEcho sequence")
    mu = _require_mu(drive)
    g = _echo_factor(spectrum.omega, mu, drive.sequence)
    return DisplacementField(alpha=_coefficients(drive, spectrum) * g[None, :], mu_r=mu, kind="spin_echo")


# ---------------------------------------------------------------------------
# bright-state probability


@dataclass(frozen=True)
class BrightProbability:
    per_ion: np.ndarray
    mean: float


def background_probability(gamma: float, total_odf_time: float) -> float:
    """Flat spontaneous-emission background 1/2 (1 - e^{-Gamma T})."""
    return 0.5 * -math.expm1(-gamma * total_odf_time)


def bright_probability(
    field: DisplacementField,
    thermal: ThermalState,
    gamma: float,
    total_odf_time: float,
) -> BrightProbability:
    """Per-ion and mean probability of ending in the bright state."""
    weights = 2.0 * thermal.nbar + 1.0
    if len(weights) != field.alpha.shape[1]:
        raise ValueError("thermal state and displacement field disagree on mode count")
    exponent = 2.0 * (np.abs(field.alpha) ** 2 @ weights)
    per_ion = 0.5 * (1.0 - math.exp(-gamma * total_odf_time) * np.exp(-exponent))
    return BrightProbability(per_ion=per_ion, mean=float(np.mean(per_ion)))


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class SpectrumTrace:
    """Bright-state probability vs drive beat frequency (Hz at the boundary)."""

    mu_over_2pi: np.ndarray
    p_up_mean: np.ndarray
    p_up_per_ion: np.ndarray | None = None


def _sequence_factors(spectrum: ModeSpectrum, drive: DriveConfig, mu_grid: np.ndarray) -> np.ndarray:
    om = spectrum.omega[:, None]
    mu = mu_grid[None, :]
    seq = drive.sequence
    if isinstance(seq, SpinEcho):
        return _echo_factor(om, mu, seq)
    return _arm_factor(om, mu, seq.tau, 0.0)


def sweep_spectrum(
    drive: DriveConfig,
    spectrum: ModeSpectrum,
    thermal: ThermalState,
    mu_grid: np.ndarray,
    per_ion: bool = False,
    threads: int | None = None,
) -> SpectrumTrace:
    """Evaluate the lineshape on an ascending grid of beat frequencies (rad/s).

    The grid is embarrassingly parallel; `threads` only chunks the work, the
    output ordering is fixed by the grid.
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    if mu_grid.ndim != 1 or len(mu_grid) == 0:
        raise ValueError("mu_grid must be a non-empty 1D array")
    if np.any(np.diff(mu_grid) < 0.0):
        raise ValueError("mu_grid must be sorted ascending")
    if not spectrum.stable:
        raise DrumheadError("cannot drive an unstable mode spectrum")

    n_ions = spectrum.b.shape[0]
    forces = drive.force_array(n_ions)
    z0 = spectrum.ground_state_lengths()
    weights = 2.0 * thermal.nbar + 1.0
    if len(weights) != spectrum.n_modes:
        raise ValueError("thermal state and spectrum disagree on mode count")
    b_sq = spectrum.b**2
    gamma_factor = math.exp(-drive.gamma * drive.sequence.total_odf_time)

    def evaluate(chunk: np.ndarray) -> np.ndarray:
        g = _sequence_factors(spectrum, drive, chunk)          # (M, G)
        w = (z0[:, None] * np.abs(g)) ** 2 * weights[:, None]  # (M, G)
        exponent = 2.0 * (forces[:, None] / HBAR) ** 2 * (b_sq @ w)
        return 0.5 * (1.0 - gamma_factor * np.exp(-exponent))  # (N, G)

    if threads and threads > 1 and len(mu_grid) > 1:
        chunks = np.array_split(mu_grid, min(threads, len(mu_grid)))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(evaluate, chunks))
        per = np.concatenate(parts, axis=1)
    else:
        per = evaluate(mu_grid)

    return SpectrumTrace(
        mu_over_2pi=mu_grid / TWO_PI,
        p_up_mean=per.mean(axis=0),
        p_up_per_ion=per if per_ion else None,
    )


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class Trajectory:
    """Sampled phase-space path alpha(t) of one (ion, mode) pair."""

    times: np.ndarray
    alpha: np.ndarray
    arm_boundary: int | None  # sample index where the second echo arm starts


def phase_space_trajectory(
    drive: DriveConfig,
    spectrum: ModeSpectrum,
    mode_index: int,
    n_samples: int = 256,
    ion_index: int | None = None,
) -> Trajectory:
    """Sample alpha_jm(t) through the pulse sequence, for plotting."""
    if not 0 <= mode_index < spectrum.n_modes:
        raise ValueError("mode_index out of range")
    mu = _require_mu(drive)
    omega = float(spectrum.omega[mode_index])
    if ion_index is None:
        ion_index = int(np.argmax(np.abs(spectrum.b[:, mode_index])))
    coef = _coefficients(drive, spectrum)[ion_index, mode_index]
    seq = drive.sequence
    t = np.linspace(0.0, seq.tau, n_samples)
    first = coef * _arm_factor(omega, mu, t, 0.0)
    if isinstance(seq, Ramsey):
        return Trajectory(times=t, alpha=first, arm_boundary=None)
    phi = (seq.tau + seq.t_pi) * (mu - omega)
    second = first[-1] - coef * _arm_factor(omega, mu, t, phi)
    times = np.concatenate([t, seq.tau + seq.t_pi + t])
    return Trajectory(times=times, alpha=np.concatenate([first, second]), arm_boundary=n_samples)


@dataclass(frozen=True)
class MeanExcursion:
    meters: float
    convention: str


_EXCURSION_CONVENTION = (
    "rms over the equal-superposition spin ensemble and over ions: "
    "2 z0m sqrt(sum_j |alpha_jm|^2 / N)"
)


def mean_excursion(
    field: DisplacementField, spectrum: ModeSpectrum, mode_index: int
) -> MeanExcursion:
    """Typical real-space excursion (m) of mode `mode_index` for this field.

    For one spin configuration {s_j} the mode displacement is
    sum_j s_j alpha_jm; averaging |.|^2 over the 2^N equal-weight
    configurations gives sum_j |alpha_jm|^2, and ion i moves by
    2 b_im z0m |.|. The rms over ions (sum_i b_im^2 = 1) yields the
    convention recorded in the result.
    """
    if not 0 <= mode_index < spectrum.n_modes:
        raise ValueError("mode_index out of range")
    z0 = float(spectrum.ground_state_lengths()[mode_index])
    n = field.alpha.shape[0]
    amplitude = math.sqrt(float(np.sum(np.abs(field.alpha[:, mode_index]) ** 2)) / n)
    return MeanExcursion(meters=2.0 * z0 * amplitude, convention=_EXCURSION_CONVENTION)


# ---------------------------------------------------------------------------
# spin-spin coupling and its validity guardrail


def _sinc(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < _SERIES_CUTOFF
    us = u[small]
    out[small] = 1.0 - us**2 / 6.0 + us**4 / 120.0
    ub = u[~small]
    out[~small] = np.sin(ub) / ub
    return out


def _sinc_minus_one_over(u: np.ndarray) -> np.ndarray:
    """(sinc(u) - 1)/u, stable through u = 0."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < _SERIES_CUTOFF
    us = u[small]
    out[small] = -us / 6.0 + us**3 / 120.0 - us**5 / 5040.0
    ub = u[~small]
    out[~small] = (np.sin(ub) / ub - 1.0) / ub
    return out


def _one_minus_cos_over(u: np.ndarray) -> np.ndarray:
    """(1 - cos(u))/u, stable through u = 0."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < _SERIES_CUTOFF
    us = u[small]
    out[small] = us / 2.0 - us**3 / 24.0 + us**5 / 720.0
    ub = u[~small]
    out[~small] = (1.0 - np.cos(ub)) / ub
    return out


def spin_spin_coupling(drive: DriveConfig, spectrum: ModeSpectrum, t: float) -> np.ndarray:
    """Pairwise coupling J_jk(t) (rad/s) accumulated by the drive up to time t.

    Per mode the contribution is

        [ omega sin(delta t)/delta + omega sin(a t)/a
          - omega sin(2 mu t)/(2 mu) - omega t ] / (mu^2 - omega^2)

    with delta = mu - omega and a = mu + omega. Both the delta -> 0 pole and
    its cancellation against the secular term are handled analytically, so
    exact resonance is finite.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    mu = _require_mu(drive)
    if mu <= 0.0:
        raise ValueError("spin_spin_coupling needs a positive beat frequency")
    omega = spectrum.omega
    delta = mu - omega
    a = mu + omega
    bb = 2.0 * mu
    u = delta * t
    at = a * t
    # brace/delta, written to stay finite as delta -> 0 (see module tests)
    brace_over_delta = omega * t**2 * _sinc_minus_one_over(u) + omega * (
        a * t * np.sin(at) * _one_minus_cos_over(u) + np.sin(at) - a * t * np.cos(at) * _sinc(u)
    ) / (a * bb)
    mode_terms = brace_over_delta / a  # brace / (mu^2 - omega^2)

    forces = drive.force_array(spectrum.b.shape[0])
    z0 = spectrum.ground_state_lengths()
    weighted = spectrum.b * (z0**2 * mode_terms)[None, :]
    return (np.outer(forces, forces) / (2.0 * HBAR**2)) * (weighted @ spectrum.b.T)


@dataclass(frozen=True)
class ValidityRatio:
    ratio: float
    spin_motion_dominant: bool


def validity_ratio(force: float, z0_com: float, nbar_com: float, t: float) -> ValidityRatio:
    """Estimated spin-spin vs spin-motion signal ratio near the COM mode.

    ratio = (F^2 / 4 hbar^2) z0^2 t^2 / (2 nbar + 1); above 0.1 the
    neglected collective spin-spin terms start to matter.
    """
    if force < 0.0 or z0_com <= 0.0 or nbar_com < 0.0 or t < 0.0:
        raise ValueError("inputs must be non-negative (z0 positive)")
    ratio = (force**2 / (4.0 * HBAR**2)) * z0_com**2 * t**2 / (2.0 * nbar_com + 1.0)
    return ValidityRatio(ratio=ratio, spin_motion_dominant=ratio <= 0.1)
