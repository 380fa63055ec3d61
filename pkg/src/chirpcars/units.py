"""Unit conventions and physical constants.

Internally everything is dimensionless: frequencies, Rabi couplings, detunings
and relaxation rates in units of the vibrational splitting omega_21, times in
1/omega_21, chirp rates in omega_21**2, spectral chirps in 1/omega_21**2, and
hbar = 1.  The only anchor to SI is ``OMEGA_REF_HZ`` (the methanol symmetric
C-H stretch, 2837 cm^-1 = 85.05 THz), treated as a plain frequency so that
54.8 fs maps to 4.661 time units.  Conversions happen exclusively at the
configuration boundary (``--si``); the physics modules never see SI values.
"""

from __future__ import annotations

__all__ = [
    "OMEGA_REF_HZ",
    "AVOGADRO",
    "VACUUM_PERMEABILITY",
    "SPEED_OF_LIGHT",
    "HBAR_SI",
    "DEBYE",
    "MOLAR_VOLUME_IDEAL_GAS",
    "freq_thz",
    "time_fs",
    "time_ps",
    "chirp_thz_per_ps",
    "spectral_chirp_fs2",
    "to_thz",
    "to_fs",
    "ideal_gas_number_density",
]

#: Reference vibrational frequency omega_21 in Hz (methanol, 2837 cm^-1).
OMEGA_REF_HZ = 85.05e12

# 2018 CODATA values, SI.
AVOGADRO = 6.02214076e23            # 1/mol
VACUUM_PERMEABILITY = 1.25663706212e-6  # N/A^2
SPEED_OF_LIGHT = 299792458.0        # m/s
HBAR_SI = 1.054571817e-34           # J*s
DEBYE = 3.33564e-30                 # C*m

#: Molar volume of an ideal gas at 273.15 K and 1 atm, m^3/mol.
MOLAR_VOLUME_IDEAL_GAS = 22.413969545e-3


def freq_thz(value_thz: float) -> float:
    """Frequency or rate given in THz, expressed in omega_21 units."""
    return value_thz * 1e12 / OMEGA_REF_HZ


def time_fs(value_fs: float) -> float:
    """Time given in femtoseconds, expressed in 1/omega_21 units."""
    return value_fs * 1e-15 * OMEGA_REF_HZ


def time_ps(value_ps: float) -> float:
    """Time given in picoseconds, expressed in 1/omega_21 units."""
    return value_ps * 1e-12 * OMEGA_REF_HZ


def chirp_thz_per_ps(value: float) -> float:
    """Temporal chirp rate given in THz/ps, expressed in omega_21**2 units."""
    return value * 1e24 / OMEGA_REF_HZ**2


def spectral_chirp_fs2(value_fs2: float) -> float:
    """Spectral chirp given in fs**2, expressed in 1/omega_21**2 units."""
    return value_fs2 * (1e-15 * OMEGA_REF_HZ) ** 2


def to_thz(value: float) -> float:
    """Internal frequency/rate back to THz (output side of ``--si``)."""
    return value * OMEGA_REF_HZ / 1e12


def to_fs(value: float) -> float:
    """Internal time back to femtoseconds (output side of ``--si``)."""
    return value / OMEGA_REF_HZ / 1e-15


def ideal_gas_number_density(molar_volume: float = MOLAR_VOLUME_IDEAL_GAS) -> float:
    """Molecule number density n = N_A / V0 in 1/m^3."""
    if molar_volume <= 0.0:
        raise ValueError("molar volume must be positive")
    return AVOGADRO / molar_volume
