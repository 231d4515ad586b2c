"""
Physical constants, unit conversions and atomic reference data.

Energies are in eV throughout. Wavenumbers are in nm^-1 and are related to
energies through ``HBAR_C``; in natural units (hbar = c = 1) an energy and a
wavenumber are the same quantity, so the conversion is a plain division.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# CODATA 2018
ALPHA = 7.2973525693e-3
HBAR_C = 197.3269804  # eV nm
K_B = 8.617333262e-5  # eV / K
R_GAS = 8.314462618  # J / (mol K)


@dataclass(frozen=True)
class PhysicalConstants:
    alpha: float = ALPHA
    hbar_c: float = HBAR_C
    k_B: float = K_B
    R_gas: float = R_GAS


CONSTANTS = PhysicalConstants()


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


@dataclass(frozen=True)
class AtomicState:
    l: int
    m_l: int = 0

    def __post_init__(self):
        if self.l < 0 or abs(self.m_l) > self.l:
            raise DomainError(f"invalid orbital state l={self.l}, m_l={self.m_l}")


@dataclass(frozen=True)
class AtomRecord:
    symbol: str
    ionization_energy_vacuum: float  # eV

    def __post_init__(self):
        if not self.ionization_energy_vacuum > 0:
            raise DomainError(f"{self.symbol}: ionization energy must be positive")


@dataclass(frozen=True)
class Direction:
    """Electron momentum direction; ``theta`` is measured from the stack axis."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta={self.theta} outside [0, pi]")


# First ionization energies of hydrogen and the alkali metals (eV).
ALKALI_IONIZATION = (
    AtomRecord("H", 13.60),
    AtomRecord("Li", 5.39),
    AtomRecord("Na", 5.14),
    AtomRecord("K", 4.34),
    AtomRecord("Rb", 4.18),
    AtomRecord("Cs", 3.90),
    AtomRecord("Fr", 4.07),
)


def energy_to_wavenumber(energy):
    """Convert an energy in eV to a wavenumber in nm^-1."""
    e = np.asarray(energy, dtype=float)
    if np.any(e < 0):
        raise DomainError("energy must be non-negative")
    k = e / HBAR_C
    return float(k) if k.ndim == 0 else k


def wavenumber_to_energy(k):
    """Inverse of :func:`energy_to_wavenumber`."""
    kk = np.asarray(k, dtype=float)
    if np.any(kk < 0):
        raise DomainError("wavenumber must be non-negative")
    e = kk * HBAR_C
    return float(e) if e.ndim == 0 else e


def vacuum_mass_correction(k0):
    """Cutoff-regularised vacuum electromagnetic mass, ``4 alpha k0 / (3 pi)``.

    ``k0`` is given in energy units (eV); the result is in the same unit.
    """
    if k0 < 0:
        raise DomainError("cutoff must be non-negative")
    return 4.0 * ALPHA / (3.0 * math.pi) * k0


def cos2_expectation(state: AtomicState) -> float:
    """Expectation of cos^2(theta) in the spherical harmonic Y_{l, m_l}.

    Uses the closed form of the second associated-Legendre moment,
    1/3 + 2/3 * (l(l+1) - 3 m^2) / ((2l - 1)(2l + 3)).
    """
    l, m = state.l, state.m_l
    return 1.0 / 3.0 + (2.0 / 3.0) * (l * (l + 1) - 3 * m * m) / ((2 * l - 1) * (2 * l + 3))


def load_atom_data(path) -> list[AtomRecord]:
    """Read a ``symbol,ionization_eV`` CSV into atom records."""
    path = Path(path)
    records = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["symbol", "ionization_eV"]:
            raise ValueError(f"{path}: expected header 'symbol,ionization_eV'")
        for lineno, row in enumerate(reader, start=2):
            try:
                records.append(AtomRecord(row["symbol"].strip(), float(row["ionization_eV"])))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return records


def atoms_by_symbol(symbols, table=ALKALI_IONIZATION) -> list[AtomRecord]:
    lookup = {a.symbol: a for a in table}
    missing = [s for s in symbols if s not in lookup]
    if missing:
        raise KeyError(f"no ionization data for {', '.join(missing)}")
    return [lookup[s] for s in symbols]
