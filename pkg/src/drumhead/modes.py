"""Transverse (out-of-plane) normal modes of a planar crystal.

The mass-normalized stiffness matrix over the z coordinates of a planar
equilibrium has entries

    K_jj = w1^2 - sum_{k != j} (k_e q^2 / M) / d_jk^3
    K_jk = (k_e q^2 / M) / d_jk^3          (j != k)

so every row sums to w1^2 exactly and the uniform vector is always an
eigenvector at the bare axial frequency: the center-of-mass mode. All other
eigenvalues sit below it; a negative eigenvalue means the single plane is
mechanically unstable at these parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import COULOMB_K, HBAR
from .crystal import CrystalLattice
from .errors import NonPlanarLatticeError
from .trap import TWO_PI, TrapParams

_DEGENERACY_RTOL = 1e-10
_SIGNIFICANT = 1e-8


@dataclass(frozen=True)
class StiffnessMatrix:
    """Symmetric (N, N) matrix of squared angular frequencies, (rad/s)^2."""

    entries: np.ndarray
    omega_1: float
    mass: float
    source_lattice_hash: str | None = None

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n_ions(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ModeSpectrum:
    """Eigenfrequencies (descending; index 0 = COM) and orthonormal eigenvectors.

    b[:, m] is the displacement pattern of mode m, normalized so both
    sum_j b_jm^2 = 1 and sum_m b_jm^2 = 1. `eigenvalues` keeps the raw
    (possibly negative) squared frequencies; `unstable_modes` lists indices
    with eigenvalue < 0, for which omega is reported as 0.
    """

    omega: np.ndarray
    b: np.ndarray
    mass: float
    eigenvalues: np.ndarray
    unstable_modes: tuple[int, ...] = ()
    degenerate_clusters: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    source_lattice_hash: str | None = None

    def __post_init__(self):
        for name in ("omega", "b", "eigenvalues", "degenerate_clusters"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_modes(self) -> int:
        return len(self.omega)

    @property
    def stable(self) -> bool:
        return not self.unstable_modes

    @property
    def frequencies_hz(self) -> np.ndarray:
        return self.omega / TWO_PI

    def ground_state_lengths(self) -> np.ndarray:
        """z_0m = sqrt(hbar / (2 M omega_m)) per mode (meters)."""
        with np.errstate(divide="ignore"):
            return np.where(self.omega > 0.0, np.sqrt(HBAR / (2.0 * self.mass * self.omega)), np.inf)


def transverse_stiffness(lattice: CrystalLattice, params: TrapParams | None = None) -> StiffnessMatrix:
    """Analytic z-block stiffness at a converged planar equilibrium."""
    if params is None:
        params = lattice.params
    if not lattice.planar:
        raise NonPlanarLatticeError("transverse modes require a single-plane crystal")
    if not lattice.converged:
        raise NonPlanarLatticeError("lattice is not converged; stiffness would be unreliable")
    pos = lattice.positions
    n = len(pos)
    if n == 1:
        return StiffnessMatrix(
            entries=np.array([[params.omega_1**2]]),
            omega_1=params.omega_1,
            mass=params.mass,
            source_lattice_hash=lattice.content_hash(),
        )
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = np.einsum("jkc,jkc->jk", diff, diff)
    np.fill_diagonal(d2, np.inf)
    coupling = (COULOMB_K * params.charge**2 / params.mass) * d2**-1.5
    entries = coupling.copy()
    np.fill_diagonal(entries, params.omega_1**2 - coupling.sum(axis=1))
    return StiffnessMatrix(
        entries=entries,
        omega_1=params.omega_1,
        mass=params.mass,
        source_lattice_hash=lattice.content_hash(),
    )


def diagonalize(stiffness: StiffnessMatrix) -> ModeSpectrum:
    """Eigenmodes of a stiffness matrix, sorted by descending frequency.

    Sign convention: the largest-magnitude component of each eigenvector is
    positive. Numerically degenerate clusters (relative eigenvalue gap below
    1e-10) share a cluster label and are ordered internally by their rounded
    component vectors, so outputs are reproducible and diffable.
    """
    k = np.asarray(stiffness.entries, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError("stiffness must be a square matrix")
    sym_dev = np.max(np.abs(k - k.T)) / max(np.max(np.abs(k)), 1e-300)
    if sym_dev > 1e-10:
        raise ValueError(f"stiffness is not symmetric (relative deviation {sym_dev:.2e})")
    evals, evecs = np.linalg.eigh(0.5 * (k + k.T))
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]

    # sign convention
    for m in range(evecs.shape[1]):
        col = evecs[:, m]
        if col[np.argmax(np.abs(col))] < 0.0:
            evecs[:, m] = -col

    # degeneracy clusters and deterministic intra-cluster order
    n = len(evals)
    clusters = np.zeros(n, dtype=int)
    scale = max(np.max(np.abs(evals)), 1e-300)
    for m in range(1, n):
        same = abs(evals[m] - evals[m - 1]) <= _DEGENERACY_RTOL * scale
        clusters[m] = clusters[m - 1] if same else clusters[m - 1] + 1
    for label in np.unique(clusters):
        members = np.flatnonzero(clusters == label)
        if len(members) > 1:
            keys = [tuple(np.round(evecs[:, m], 10)) for m in members]
            order = sorted(range(len(members)), key=keys.__getitem__)
            evecs[:, members] = evecs[:, members][:, order]

    unstable = tuple(int(m) for m in np.flatnonzero(evals < 0.0))
    omega = np.sqrt(np.clip(evals, 0.0, None))
    return ModeSpectrum(
        omega=omega,
        b=evecs,
        mass=stiffness.mass,
        eigenvalues=evals,
        unstable_modes=unstable,
        degenerate_clusters=clusters,
        source_lattice_hash=stiffness.source_lattice_hash,
    )


@dataclass(frozen=True)
class ModeHistogram:
    """Counts of mode frequencies in [i*w, (i+1)*w) bins anchored at 0 Hz."""

    bin_edges_hz: np.ndarray
    counts: np.ndarray

    @property
    def bin_centers_hz(self) -> np.ndarray:
        return 0.5 * (self.bin_edges_hz[:-1] + self.bin_edges_hz[1:])


def mode_histogram(spectrum: ModeSpectrum, bin_width_hz: float) -> ModeHistogram:
    """Bin the mode density on a fixed grid anchored at 0 Hz."""
    if bin_width_hz <= 0.0:
        raise ValueError("bin width must be positive")
    freqs = spectrum.frequencies_hz
    idx = np.floor(freqs / bin_width_hz).astype(int)
    lo, hi = int(idx.min()), int(idx.max())
    counts = np.bincount(idx - lo, minlength=hi - lo + 1)
    edges = (np.arange(lo, hi + 2)) * bin_width_hz
    return ModeHistogram(bin_edges_hz=edges, counts=counts)


def com_mode_deviation(stiffness: StiffnessMatrix) -> float:
    """Relative residual of the uniform vector as a stiffness eigenvector."""
    n = stiffness.n_ions
    uniform = np.full(n, 1.0 / np.sqrt(n))
    target = stiffness.omega_1**2
    return float(np.max(np.abs(stiffness.entries @ uniform - target * uniform)) / target)
