"""
Ionization-energy corrections from the mass-correction coefficients.

The ionization energy is the least energy needed to free the valence
electron, so the correction is the smallest mass shift over directions minus
the shift averaged over the bound state's angular distribution:

    delta_E = min_theta (A + cos^2 theta B) - (A + <cos^2> B).

A cancels; for s states <cos^2> = 1/3 and delta_E = min(0, B) - B/3.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from .bands import LayerStack
from .mass import (PREFACTOR, MassCorrection, QuadratureConfig, RegularizationConfig,
                   ab_coefficients)
from .units import HBAR_C, K_B, AtomicState, AtomRecord, DomainError, cos2_expectation


@dataclass(frozen=True)
class IonizationResult:
    delta_E_ion: float  # eV
    delta_m_min: float
    delta_m_expect: float
    B_sign: str
    route: str


@dataclass(frozen=True)
class RateFactorInput:
    delta_Ea: float  # eV
    T: float  # K

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError("temperature must be positive")


@dataclass(frozen=True)
class RateFactor:
    value: float  # inf when it overflows a double
    log10: float


def _sign(B, tol):
    if abs(B) <= tol:
        return "zero-within-tol"
    return "negative" if B < 0 else "positive"


def delta_m_min(mc: MassCorrection) -> float:
    """Smallest mass correction over directions, A + min(0, B)."""
    return mc.A + min(0.0, mc.B)


def ionization_correction_general(mc: MassCorrection, state: AtomicState = AtomicState(0, 0),
                                  tol: float = 0.0) -> IonizationResult:
    dmin = delta_m_min(mc)
    c2 = cos2_expectation(state)
    expect = mc.A + c2 * mc.B
    # A cancels analytically; drop it before subtracting so the result is
    # independent of A in floating point too
    delta = min(0.0, mc.B) - c2 * mc.B
    return IonizationResult(delta, dmin, expect, _sign(mc.B, tol), "general")


def ionization_correction_closed_form(stack: LayerStack, quad: QuadratureConfig | None = None,
                                      reg: RegularizationConfig | None = None,
                                      mc: MassCorrection | None = None) -> IonizationResult:
    """s-state correction evaluated directly as (2/3) times the anisotropic
    integral; valid when that integral is negative.

    The integrand carries no vacuum subtraction, so the result does not
    depend on the matching scheme. ``mc`` may be passed to reuse an
    already-evaluated set of band integrals.
    """
    if mc is None:
        mc = ab_coefficients(stack, quad, reg)
    raw = mc.diagnostics["raw"]
    # -(2 alpha / 3 pi) * sum over modes of |c|^2 / omega^2 times the angular
    # weight: 1 for TE (azimuthal field), (K^2 - 2 k_rho^2)/k^2 for TM
    te = math.fsum(v[0] for _, v in sorted(raw.te.items()))
    tm = math.fsum(v[2] for _, v in sorted(raw.tm.items()))
    delta = -(2.0 / 3.0) * PREFACTOR * HBAR_C * (te - tm)
    if delta > 0:
        warnings.warn("anisotropic integral is positive; the closed form assumes it is negative", stacklevel=2)
    b = mc.B
    return IonizationResult(delta, mc.A + min(0.0, b), mc.A + b / 3.0, _sign(b, 0.0), "closed_form")


@dataclass(frozen=True)
class TableRow:
    symbol: str
    I_vac: float
    delta: float
    I_pc: float
    flag: str


def pc_ionization_table(atoms, delta_E_ion: float) -> list[TableRow]:
    """Shift the vacuum ionization energies by ``delta_E_ion``."""
    if not math.isfinite(delta_E_ion):
        raise DomainError("delta_E_ion must be finite")
    rows = []
    for atom in atoms:
        if not isinstance(atom, AtomRecord):
            atom = AtomRecord(*atom)
        i_pc = atom.ionization_energy_vacuum + delta_E_ion
        rows.append(TableRow(atom.symbol, atom.ionization_energy_vacuum, delta_E_ion, i_pc,
                             "unbound" if i_pc <= 0 else ""))
    return rows


def table_to_csv(rows, path=None, digits: int = 4) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["symbol", "I_vac_eV", "delta_eV", "I_pc_eV", "flag"])
    for r in rows:
        w.writerow([r.symbol, f"{r.I_vac:.{digits}f}", f"{r.delta:.{digits}f}", f"{r.I_pc:.{digits}f}", r.flag])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def arrhenius_factor(inp: RateFactorInput) -> RateFactor:
    """Rate multiplier exp(-delta_Ea / (k_B T)) and its base-10 logarithm."""
    x = -inp.delta_Ea / (K_B * inp.T)
    log10 = x / math.log(10.0)
    value = math.exp(x) if x < 709.0 else math.inf
    return RateFactor(value, log10)
