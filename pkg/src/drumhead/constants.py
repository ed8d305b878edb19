"""Physical constants and default ion properties (SI units)."""

import scipy.constants as _const

HBAR = _const.hbar
K_B = _const.k
COULOMB_K = 1.0 / (4.0 * _const.pi * _const.epsilon_0)
ELEMENTARY_CHARGE = _const.e
ATOMIC_MASS = _const.atomic_mass

# 9Be+ ion: neutral 9Be minus one electron mass.
BE9_ION_MASS = (9.0121831 - _const.m_e / ATOMIC_MASS) * ATOMIC_MASS
