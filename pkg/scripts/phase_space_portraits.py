#!/usr/bin/env python3
"""Phase-space portraits of the COM mode through a spin-echo sequence.

Samples the spin-conditioned displacement alpha(t) at a few detunings:
on resonance (straight out and back), half a loop, and one full loop
(closed circle). Writes one trajectory CSV per detuning.
"""

import argparse
from pathlib import Path

import numpy as np

import drumhead as dh
from drumhead import io_formats as iof

TAU = 500e-6


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("out/phase_space"))
    parser.add_argument("--n-ions", type=int, default=19)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    params = dh.TrapParams.from_hz(795e3, 7.6e6, 44.7e3)
    lattice = dh.solve_equilibrium(params, args.n_ions, seed=0)
    spectrum = dh.diagonalize(dh.transverse_stiffness(lattice))

    for loops in (0.0, 0.5, 1.0):
        mu = float(spectrum.omega[0]) + loops * 2 * np.pi / TAU
        drive = dh.DriveConfig(forces=1.5e-23, mu_r=mu, gamma=0.0,
                               sequence=dh.SpinEcho(tau=TAU, t_pi=0.0))
        trajectory = dh.phase_space_trajectory(drive, spectrum, 0, n_samples=600)
        path = args.out / f"trajectory_loops_{loops:g}.csv"
        iof.save_trajectory(trajectory, path)
        end = abs(trajectory.alpha[-1])
        peak = float(np.abs(trajectory.alpha).max())
        print(f"loops={loops:g}: peak |alpha| = {peak:.3e}, end/peak = {end / peak if peak else 0:.3f}")


if __name__ == "__main__":
    main()
