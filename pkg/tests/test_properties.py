"""Property-based invariants over randomized inputs."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from drumhead import (
    BE9_ION_MASS,
    DriveConfig,
    HBAR,
    NoRadialConfinementError,
    Ramsey,
    SpinEcho,
    StarkCoefficients,
    StiffnessMatrix,
    ThermalState,
    acss_null_angle,
    alpha_single_arm,
    alpha_spin_echo,
    bright_probability,
    diagonalize,
    effective_wavevector,
    mode_histogram,
    occupation_to_temperature,
    qubit_stark_shift,
    radial_confinement,
    temperature_to_occupation,
    total_potential,
)
from drumhead.dynamics import _cisr
from drumhead.modes import ModeSpectrum
from conftest import paper_trap

TWO_PI = 2 * math.pi


@given(
    axial=st.floats(1e5, 5e6),
    cyclotron=st.floats(1e6, 5e7),
    fraction=st.floats(1e-4, 1.0 - 1e-4),
)
@settings(max_examples=60, deadline=None)
def test_radial_confinement_positive_or_raises(axial, cyclotron, fraction):
    omega_1 = TWO_PI * axial
    omega_c = TWO_PI * cyclotron
    omega_r = fraction * omega_c
    try:
        value = radial_confinement(omega_1, omega_c, omega_r)
    except NoRadialConfinementError:
        assert omega_r * (omega_c - omega_r) / omega_1**2 - 0.5 <= 0.0
    else:
        assert value > 0.0
        # never exceeds the midpoint maximum
        assert value <= omega_c**2 / (4 * omega_1**2) - 0.5 + 1e-12


@given(angle=st.floats(0.0, 2 * math.pi), seed=st.integers(0, 2**16))
@settings(max_examples=25, deadline=None)
def test_potential_rotation_invariant_without_wall(angle, seed):
    params = paper_trap()
    rng = np.random.default_rng(seed)
    pos = rng.uniform(-1e-4, 1e-4, (6, 3))
    assume(_min_pair_distance(pos) > 1e-6)
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    e0 = total_potential(pos, params)
    e1 = total_potential(pos @ rot.T, params)
    assert abs(e1 - e0) <= 1e-12 * abs(e0)


def _min_pair_distance(pos):
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(d, np.inf)
    return d.min()


@given(seed=st.integers(0, 2**16), n=st.integers(2, 9))
@settings(max_examples=25, deadline=None)
def test_stiffness_row_sums_at_arbitrary_planar_positions(seed, n):
    # the row-sum identity is analytic: it holds at any planar configuration,
    # not just equilibria
    from drumhead import COULOMB_K

    params = paper_trap()
    rng = np.random.default_rng(seed)
    pos = np.zeros((n, 3))
    pos[:, :2] = rng.uniform(-2e-4, 2e-4, (n, 2))
    assume(_min_pair_distance(pos) > 5e-6)
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = (diff**2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    coupling = (COULOMB_K * params.charge**2 / params.mass) * d2**-1.5
    entries = coupling.copy()
    np.fill_diagonal(entries, params.omega_1**2 - coupling.sum(axis=1))
    target = params.omega_1**2
    assert np.max(np.abs(entries.sum(axis=1) - target)) <= 1e-9 * target
    spectrum = diagonalize(StiffnessMatrix(entries=entries, omega_1=params.omega_1, mass=params.mass))
    uniform = np.full(n, 1.0 / math.sqrt(n))
    assert np.min(np.abs(spectrum.b.T @ uniform)) >= 0.0  # completeness sanity
    assert spectrum.eigenvalues[0] == pytest.approx(target, rel=1e-9)


def _cisr_oracle(u):
    # cancellation-free: e^{iu} - 1 = -2 sin^2(u/2) + i sin(u)
    return (-2.0 * np.sin(u / 2.0) ** 2 + 1j * np.sin(u)) / (1j * u)


@given(u=st.floats(-50.0, 50.0))
@settings(max_examples=200, deadline=None)
def test_cisr_matches_direct_formula(u):
    assume(abs(u) > 1e-13)
    ours = complex(_cisr(np.array([u]))[0])
    assert abs(ours - _cisr_oracle(u)) <= 1e-14 * max(1.0, abs(_cisr_oracle(u)))


def test_cisr_series_boundary_continuous():
    # the series/direct switch at |u| = 1e-2 must be seamless
    for u in (0.99e-2, 1.01e-2, -0.99e-2, -1.01e-2):
        assert abs(complex(_cisr(np.array([u]))[0]) - _cisr_oracle(u)) < 1e-14


@given(
    da=st.floats(1e3, 1e7),
    db=st.floats(1e3, 1e7),
    base=st.floats(-1e6, 1e6),
)
@settings(max_examples=60, deadline=None)
def test_null_angle_zeroes_shift(da, db, base):
    coeffs = StarkCoefficients(a_up=base + da, a_dn=base, b_up=base - db, b_dn=base)
    phi = acss_null_angle(coeffs)
    assert 0.0 < phi < math.pi / 2
    assert abs(qubit_stark_shift(coeffs, phi)) <= 1e-12 * max(da, db)


@given(
    wavelength=st.floats(2e-7, 2e-6),
    theta_a=st.floats(1e-3, math.pi - 1e-3),
    theta_b=st.floats(1e-3, math.pi - 1e-3),
)
@settings(max_examples=60, deadline=None)
def test_wavevector_monotone(wavelength, theta_a, theta_b):
    assume(abs(theta_a - theta_b) > 1e-9)
    lo, hi = sorted((theta_a, theta_b))
    assert effective_wavevector(wavelength, lo) < effective_wavevector(wavelength, hi)


@given(nbar=st.floats(0.0, 1e4), freq=st.floats(1e4, 1e7))
@settings(max_examples=60, deadline=None)
def test_occupation_temperature_inverse(nbar, freq):
    omega = TWO_PI * freq
    assert temperature_to_occupation(
        occupation_to_temperature(nbar, omega), omega
    ) == pytest.approx(nbar, rel=1e-12, abs=1e-12)


@given(
    scale=st.floats(0.1, 4.0),
    detune_cycles=st.floats(-3.0, 3.0),
    tau=st.floats(5e-5, 8e-4),
)
@settings(max_examples=40, deadline=None)
def test_alpha_linear_in_force(scale, detune_cycles, tau):
    spectrum = _two_mode_spectrum()
    mu = float(spectrum.omega[0]) + detune_cycles * TWO_PI / tau
    assume(mu > 0)
    base = DriveConfig(forces=1e-23, mu_r=mu, gamma=0.0, sequence=Ramsey(tau=tau))
    scaled = DriveConfig(forces=scale * 1e-23, mu_r=mu, gamma=0.0, sequence=Ramsey(tau=tau))
    a_base = alpha_single_arm(base, spectrum, tau).alpha
    a_scaled = alpha_single_arm(scaled, spectrum, tau).alpha
    assert np.allclose(a_scaled, scale * a_base, rtol=1e-12, atol=0.0)


def _two_mode_spectrum():
    omegas = TWO_PI * np.array([795e3, 760e3])
    b = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)
    return ModeSpectrum(omega=omegas, b=b, mass=BE9_ION_MASS, eigenvalues=omegas**2)


@given(
    nbar_a=st.floats(0.0, 500.0),
    nbar_b=st.floats(0.0, 500.0),
    gamma=st.floats(0.0, 2e3),
)
@settings(max_examples=60, deadline=None)
def test_bright_probability_bounds_and_monotonicity(nbar_a, nbar_b, gamma):
    spectrum = _two_mode_spectrum()
    tau = 4e-4
    drive = DriveConfig(
        forces=1.5e-23, mu_r=float(spectrum.omega[0]) + TWO_PI * 2.5e3 / 1.0, gamma=gamma,
        sequence=SpinEcho(tau=tau, t_pi=5e-5),
    )
    field = alpha_spin_echo(drive, spectrum)
    lo, hi = sorted((nbar_a, nbar_b))
    p_lo = bright_probability(field, ThermalState.uniform(2, lo), gamma, 2 * tau)
    p_hi = bright_probability(field, ThermalState.uniform(2, hi), gamma, 2 * tau)
    for p in (p_lo, p_hi):
        assert np.all(p.per_ion >= 0.0) and np.all(p.per_ion <= 0.5 + 1e-12)
    assert p_hi.mean >= p_lo.mean - 1e-15


@given(loops=st.integers(1, 4), tau=st.floats(2e-4, 1e-3), t_pi=st.floats(0.0, 1e-4))
@settings(max_examples=40, deadline=None)
def test_echo_null_at_integer_loops(loops, tau, t_pi):
    # |alpha_SE| at integer delta tau / 2pi is tiny compared to the sweep peak
    spectrum = _two_mode_spectrum()
    omega = float(spectrum.omega[0])
    drive = DriveConfig(forces=1.5e-23, mu_r=None, gamma=0.0, sequence=SpinEcho(tau=tau, t_pi=t_pi))
    null_mu = omega + loops * TWO_PI / tau
    at_null = np.abs(alpha_spin_echo(drive.with_mu(null_mu), spectrum).alpha[0, 0])
    peak = max(
        np.abs(alpha_spin_echo(drive.with_mu(omega + f * TWO_PI / tau), spectrum).alpha[0, 0])
        for f in np.linspace(0.1, loops + 0.5, 60)
    )
    assert at_null <= 0.02 * peak


@given(
    freqs=st.lists(st.floats(1e4, 1e6), min_size=1, max_size=40),
    width=st.floats(1e2, 5e4),
)
@settings(max_examples=60, deadline=None)
def test_histogram_counts_sum(freqs, width):
    omegas = TWO_PI * np.sort(np.array(freqs))[::-1]
    n = len(omegas)
    spectrum = ModeSpectrum(omega=omegas, b=np.eye(n), mass=BE9_ION_MASS, eigenvalues=omegas**2)
    hist = mode_histogram(spectrum, width)
    assert hist.counts.sum() == n
    assert np.all(hist.counts >= 0)
