"""Zero-temperature equilibrium configurations of a planar ion crystal.

The crystal is the minimum of the rotating-frame potential

    V = sum_j 1/2 M w1^2 (z_j^2 + beta r_j^2)
      + sum_j 1/2 M w1^2 delta_wall (x_j^2 - y_j^2)
      + sum_{j<k} k_e q^2 / d_jk

Minimization runs in dimensionless units (length l0 = (k_e q^2 / M w1^2)^(1/3),
energy M w1^2 l0^2) so the descent tolerances are scale-free: a coarse
L-BFGS-B stage followed by a damped Newton polish on the analytic Hessian,
which brings the residual force down to ~1e-13 in scaled units (orders of
magnitude below any SI tolerance of interest here).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .constants import COULOMB_K
from .errors import CoincidentIonsError, EquilibriumNotConverged
from .trap import TrapParams, beta

# Scaled-unit convergence targets. 1e-9 is the bar for the `converged` flag;
# the polish usually reaches ~1e-13 (float64 floor for pairwise sums).
_SCALED_GTOL = 1e-9
_POLISH_TARGET = 5e-14

PLANARITY_TOL = 1e-6  # max |z| below this fraction of the mean spacing => planar


def length_scale(params: TrapParams) -> float:
    """Natural length l0 = (k_e q^2 / (M w1^2))^(1/3) of the trap-Coulomb balance."""
    return (COULOMB_K * params.charge**2 / (params.mass * params.omega_1**2)) ** (1.0 / 3.0)


@dataclass(frozen=True)
class CrystalLattice:
    """A relaxed ion configuration in the rotating frame.

    positions           (N, 3) array, meters
    converged           residual force and energy-change tolerances were met
    residual_force_max  max |gradient| component at the solution, newtons
    planar              max |z_j| < PLANARITY_TOL * mean in-plane spacing
    energy              total potential energy, joules
    energy_trace        energies of accepted minimizer steps (monotone audit trail)
    """

    params: TrapParams
    positions: np.ndarray
    converged: bool
    residual_force_max: float
    planar: bool
    energy: float
    seed: int | None = None
    energy_trace: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "converged", bool(self.converged))
        object.__setattr__(self, "planar", bool(self.planar))
        object.__setattr__(self, "residual_force_max", float(self.residual_force_max))
        object.__setattr__(self, "energy", float(self.energy))

    @property
    def n_ions(self) -> int:
        return len(self.positions)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.positions).tobytes())
        h.update(repr(sorted(self.params.to_hz_dict().items())).encode())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class LatticeStats:
    mean_spacing: float | None  # mean nearest-neighbor distance, m (None for N=1)
    diameter: float             # max pairwise distance, m


# ---------------------------------------------------------------------------
# scaled-unit energy / gradient / Hessian


def _pair_geometry(pos: np.ndarray):
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = np.einsum("jkc,jkc->jk", diff, diff)
    np.fill_diagonal(d2, np.inf)
    return diff, d2


def _energy_gradient_scaled(coords: np.ndarray, b: float, dw: float):
    pos = coords.reshape(-1, 3)
    diff, d2 = _pair_geometry(pos)
    inv_d = 1.0 / np.sqrt(d2)
    x, y, z = pos[:, 0], pos[:, 1], pos[:, 2]
    energy = 0.5 * (
        np.dot(z, z) + b * (np.dot(x, x) + np.dot(y, y)) + dw * (np.dot(x, x) - np.dot(y, y))
    ) + 0.5 * np.sum(inv_d)
    grad = np.empty_like(pos)
    grad[:, 0] = (b + dw) * x
    grad[:, 1] = (b - dw) * y
    grad[:, 2] = z
    inv_d3 = inv_d / d2
    grad -= np.einsum("jk,jkc->jc", inv_d3, diff)
    return energy, grad.ravel()


def _hessian_scaled(coords: np.ndarray, b: float, dw: float) -> np.ndarray:
    pos = coords.reshape(-1, 3)
    n = len(pos)
    diff, d2 = _pair_geometry(pos)
    inv_d3 = d2**-1.5
    inv_d5 = inv_d3 / d2
    eye3 = np.eye(3)
    cross = np.einsum("jk,uv->jukv", inv_d3, eye3)
    cross -= 3.0 * np.einsum("jk,jku,jkv->jukv", inv_d5, diff, diff)
    idx = np.arange(n)
    cross[idx, :, idx, :] = -cross.sum(axis=2) + np.diag([b + dw, b - dw, 1.0])[None, :, :]
    return cross.reshape(3 * n, 3 * n)


# ---------------------------------------------------------------------------
# SI-facing energy surface


def total_potential(positions: np.ndarray, params: TrapParams) -> float:
    """Total rotating-frame potential energy (J) of an arbitrary configuration.

    Raises CoincidentIonsError when any two ions share a position.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    if len(pos) > 1:
        _, d2 = _pair_geometry(pos)
        if np.min(d2) == 0.0:
            raise CoincidentIonsError("two ions coincide; Coulomb energy diverges")
    l0 = length_scale(params)
    e0 = params.mass * params.omega_1**2 * l0**2
    e, _ = _energy_gradient_scaled((pos / l0).ravel(), beta(params), params.delta_wall)
    return e * e0


def potential_gradient(positions: np.ndarray, params: TrapParams) -> np.ndarray:
    """Gradient of total_potential, shape (N, 3), newtons."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    l0 = length_scale(params)
    f0 = params.mass * params.omega_1**2 * l0
    _, g = _energy_gradient_scaled((pos / l0).ravel(), beta(params), params.delta_wall)
    return g.reshape(-1, 3) * f0


def potential_hessian(positions: np.ndarray, params: TrapParams) -> np.ndarray:
    """Second-derivative matrix of total_potential, shape (3N, 3N), J/m^2.

    Coordinate order is (ion0 x, ion0 y, ion0 z, ion1 x, ...).
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    l0 = length_scale(params)
    k0 = params.mass * params.omega_1**2
    return _hessian_scaled((pos / l0).ravel(), beta(params), params.delta_wall) * k0


# ---------------------------------------------------------------------------
# seeding


def hex_disk_seed(n_ions: int, spacing: float) -> np.ndarray:
    """Triangular-lattice disk patch of n_ions sites (z = 0), deterministic."""
    if n_ions == 1:
        return np.zeros((1, 3))
    m = int(math.ceil(math.sqrt(n_ions))) + 2
    i, j = np.meshgrid(np.arange(-m, m + 1), np.arange(-m, m + 1), indexing="ij")
    x = spacing * (i + 0.5 * j).ravel()
    y = spacing * (math.sqrt(3.0) / 2.0) * j.ravel()
    r = np.hypot(x, y)
    order = np.lexsort((np.arctan2(y, x), np.round(r / spacing * 1e9)))
    pts = np.zeros((n_ions, 3))
    pts[:, 0] = x[order][:n_ions]
    pts[:, 1] = y[order][:n_ions]
    return pts


def _seed_scaled(n_ions: int, b: float, rng: np.random.Generator) -> np.ndarray:
    # Continuum radius of a cold disk in a quadratic well, R^3 = 3*pi*N/(2*beta)
    # in l0 units; hex patch of that radius fixes the seed spacing.
    radius = (3.0 * math.pi * n_ions / (2.0 * b)) ** (1.0 / 3.0)
    spacing = radius * math.sqrt(2.0 * math.pi / (math.sqrt(3.0) * n_ions))
    pts = hex_disk_seed(n_ions, spacing)
    # deterministic jitter breaks lattice symmetry and seeds out-of-plane buckling
    pts += 1e-3 * spacing * rng.standard_normal(pts.shape)
    return pts


# ---------------------------------------------------------------------------
# solver


def solve_equilibrium(
    params: TrapParams,
    n_ions: int,
    seed_config: np.ndarray | None = None,
    seed: int = 0,
    force_tol: float = 1e-14,
    energy_rtol: float = 1e-12,
    max_minimize_steps: int = 100_000,
    max_polish_steps: int = 80,
) -> CrystalLattice:
    """Relax n_ions to a local minimum of the rotating-frame potential.

    seed_config (meters) overrides the built-in jittered hex-disk seed; `seed`
    feeds the jitter RNG so runs are reproducible and callers can restart from
    a different basin. force_tol is an SI bound (N) on the residual gradient;
    the internal scale-free bound (1e-9 in natural units) is almost always the
    stricter of the two and typically lands near 1e-13.

    Raises EquilibriumNotConverged (carrying the best-so-far lattice in
    `.best`) when the iteration budget runs out.
    """
    if n_ions < 1:
        raise ValueError("n_ions must be >= 1")
    b = beta(params)
    dw = params.delta_wall
    l0 = length_scale(params)
    f0 = params.mass * params.omega_1**2 * l0
    e0 = params.mass * params.omega_1**2 * l0**2

    if n_ions == 1:
        return CrystalLattice(
            params=params,
            positions=np.zeros((1, 3)),
            converged=True,
            residual_force_max=0.0,
            planar=True,
            energy=0.0,
            seed=seed,
            energy_trace=np.zeros(1),
        )

    rng = np.random.default_rng(seed)
    if seed_config is not None:
        x0 = (np.asarray(seed_config, dtype=float).reshape(-1, 3) / l0).ravel()
        if x0.size != 3 * n_ions:
            raise ValueError("seed_config must have shape (n_ions, 3)")
    else:
        x0 = _seed_scaled(n_ions, b, rng).ravel()

    trace: list[float] = []
    last_eval: dict = {}

    def objective(coords):
        e, g = _energy_gradient_scaled(coords, b, dw)
        last_eval["x"] = coords.copy()
        last_eval["e"] = e
        return e, g

    def record(xk):
        if last_eval and np.array_equal(last_eval["x"], xk):
            e = last_eval["e"]
        else:
            e, _ = _energy_gradient_scaled(xk, b, dw)
        trace.append(e)

    result = minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={
            "maxiter": max_minimize_steps,
            "maxfun": 4 * max_minimize_steps,
            "gtol": 1e-12,
            "ftol": 1e-17,
            "maxcor": 25,
        },
    )
    x = result.x
    energy, grad = _energy_gradient_scaled(x, b, dw)
    if not trace or energy < trace[-1]:
        trace.append(energy)

    # Modified-Newton polish: invert the Hessian spectrum with |eigenvalue|
    # floored, so soft modes (shell rearrangements) and the rotational zero
    # mode at delta_wall = 0 give bounded descent steps instead of blowing up
    # a plain solve. The rotation direction is projected out explicitly since
    # moving along it is pure noise.
    def rotation_direction(coords):
        pos = coords.reshape(-1, 3)
        vec = np.column_stack([-pos[:, 1], pos[:, 0], np.zeros(len(pos))]).ravel()
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0.0 else None

    gmax = np.max(np.abs(grad))
    stalled = 0
    slow = 0
    for _ in range(max_polish_steps):
        # Magic-number crystals have quartically flat intershell-libration
        # valleys; once the gradient is below the convergence bar and barely
        # improving, grinding further buys nothing.
        if gmax <= _POLISH_TARGET or (gmax <= _SCALED_GTOL and slow >= 3):
            break
        hess = _hessian_scaled(x, b, dw)
        evals_h, evecs_h = np.linalg.eigh(hess)
        # The floor keeps quasi-flat directions (where the local quadratic
        # model is meaningless) from dominating the step.
        floor = max(1e-6 * float(np.max(np.abs(evals_h))), 1e-12)
        inv_spectrum = 1.0 / np.maximum(np.abs(evals_h), floor)
        step = -evecs_h @ (inv_spectrum * (evecs_h.T @ grad))
        if dw == 0.0:
            rot = rotation_direction(x)
            if rot is not None:
                step -= (step @ rot) * rot
        step_max = np.max(np.abs(step))
        if step_max > 0.5:
            step *= 0.5 / step_max
        scale = 1.0
        accepted = False
        prev_gmax = gmax
        for _ in range(30):
            x_try = x + scale * step
            e_try, g_try = _energy_gradient_scaled(x_try, b, dw)
            g_try_max = np.max(np.abs(g_try))
            if e_try <= energy or (math.isclose(e_try, energy, rel_tol=1e-14) and g_try_max < gmax):
                accepted = e_try < energy or g_try_max < gmax
                if accepted:
                    x, energy, grad, gmax = x_try, e_try, g_try, g_try_max
                    trace.append(energy)
                break
            scale *= 0.5
        if accepted:
            stalled = 0
            slow = slow + 1 if gmax > 0.3 * prev_gmax else 0
        else:
            stalled += 1
            if stalled >= 3:
                break

    residual_si = gmax * f0
    # Remaining decrease predicted by the local quadratic model: the honest
    # "relative energy change of one more step".
    hess = _hessian_scaled(x, b, dw)
    step, *_ = np.linalg.lstsq(hess, -grad, rcond=None)
    rel_de = abs(0.5 * float(grad @ step)) / max(abs(energy), 1e-300)
    converged = residual_si <= force_tol and gmax <= _SCALED_GTOL and rel_de <= energy_rtol

    positions = x.reshape(-1, 3) * l0
    lattice = CrystalLattice(
        params=params,
        positions=positions,
        converged=converged,
        residual_force_max=residual_si,
        planar=_is_planar(positions),
        energy=energy * e0,
        seed=seed,
        energy_trace=np.asarray(trace) * e0,
    )
    if not converged:
        raise EquilibriumNotConverged(
            f"residual force {residual_si:.3e} N after budget "
            f"(scaled gradient {gmax:.3e})",
            best=lattice,
        )
    return lattice


def _is_planar(positions: np.ndarray) -> bool:
    if len(positions) == 1:
        return True
    spacing = _mean_nn_spacing(positions[:, :2])
    return bool(np.max(np.abs(positions[:, 2])) < PLANARITY_TOL * spacing)


def _mean_nn_spacing(points: np.ndarray) -> float:
    diff = points[:, None, :] - points[None, :, :]
    d = np.sqrt(np.einsum("jkc,jkc->jk", diff, diff))
    np.fill_diagonal(d, np.inf)
    return float(np.mean(np.min(d, axis=1)))


def lattice_stats(lattice: CrystalLattice) -> LatticeStats:
    """Mean nearest-neighbor spacing and crystal diameter (meters)."""
    pos = lattice.positions
    if len(pos) == 1:
        return LatticeStats(mean_spacing=None, diameter=0.0)
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.sqrt(np.einsum("jkc,jkc->jk", diff, diff))
    diameter = float(np.max(d))
    np.fill_diagonal(d, np.inf)
    return LatticeStats(
        mean_spacing=float(np.mean(np.min(d, axis=1))),
        diameter=diameter,
    )
