"""
Refractive-index models for the high-index layer.

Only the real part of the index is modelled. Every model exposes
``model.index(omega)`` (vectorised, omega in eV); :func:`refractive_index`
is the checked scalar/array entry point.

Models with a high-frequency blend return exactly 1.0 for
``omega >= blend_end``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .units import DomainError

DEFAULT_BLEND = (10.65, 40.0)


def _unity_blend(omega, n_start, start, end):
    # monotone cubic from n_start at `start` down to 1 at `end`
    t = np.clip((omega - start) / (end - start), 0.0, 1.0)
    w = 1.0 - t * t * (3.0 - 2.0 * t)
    return np.where(omega >= end, 1.0, 1.0 + (n_start - 1.0) * w)


class DispersionModel:
    """Base class; subclasses implement ``index``."""

    blend_end: float | None = None

    def index(self, omega):
        raise NotImplementedError

    def kinks(self) -> tuple:
        """Frequencies where n(omega) has a slope discontinuity."""
        return ()

    def max_index(self, omega_max: float, samples: int = 2048) -> float:
        grid = np.linspace(omega_max / samples, omega_max, samples)
        return float(np.max(self.index(grid)))


@dataclass(frozen=True)
class Constant(DispersionModel):
    n: float

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("refractive index must be >= 1")

    def index(self, omega):
        return np.full(np.shape(omega), float(self.n))

    def max_index(self, omega_max, samples=0):
        return float(self.n)


@dataclass(frozen=True)
class SellmeierTail(DispersionModel):
    """n = 1 + C1/omega^2 + C2/omega^4 (C1 in eV^2, C2 in eV^4)."""

    C1: float
    C2: float = 0.0

    def index(self, omega):
        w2 = np.asarray(omega, dtype=float) ** 2
        return 1.0 + self.C1 / w2 + self.C2 / (w2 * w2)


@dataclass(frozen=True, eq=False)
class Tabulated(DispersionModel):
    """Linear interpolation of (omega, n) samples.

    Below the first sample the first value is used (with a warning); above the
    last sample the index is blended to unity, reaching 1 at ``blend_end``.
    """

    omega: np.ndarray
    n: np.ndarray
    blend_end: float = DEFAULT_BLEND[1]
    name: str = "table"
    _warned: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        nn = np.asarray(self.n, dtype=float)
        if om.ndim != 1 or om.shape != nn.shape or om.size < 1:
            raise ValueError("need matching 1-D omega and n samples")
        if np.any(np.diff(om) <= 0):
            raise ValueError("omega samples must be strictly increasing")
        if np.any(om <= 0):
            raise ValueError("omega samples must be positive")
        if np.any(nn < 1):
            raise ValueError("tabulated index must be >= 1")
        if self.blend_end <= om[-1]:
            raise ValueError("blend_end must lie above the last sample")
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "n", nn)

    def index(self, omega):
        w = np.asarray(omega, dtype=float)
        if not self._warned and np.any(w < self.omega[0]):
            warnings.warn(
                f"{self.name}: query below first sample {self.omega[0]} eV, clamped",
                stacklevel=2,
            )
            self._warned.append(True)
        inside = np.interp(w, self.omega, self.n)
        above = w > self.omega[-1]
        if not np.any(above):
            return inside
        tail = _unity_blend(w, self.n[-1], self.omega[-1], self.blend_end)
        return np.where(above, tail, inside)

    def kinks(self):
        return tuple(float(x) for x in self.omega) + (float(self.blend_end),)


@dataclass(frozen=True, eq=False)
class MetamaterialEffective(DispersionModel):
    """Nanoparticle-superlattice effective index sqrt((a/g) eps_d(omega)).

    ``a`` is the array period and ``g`` the interparticle gap (nm). Above
    ``blend_start`` the index is blended monotonically to 1 at ``blend_end``.
    """

    a: float
    g: float
    dielectric: DispersionModel
    blend_start: float = DEFAULT_BLEND[0]
    blend_end: float = DEFAULT_BLEND[1]

    def __post_init__(self):
        if self.a <= 0 or self.g <= 0:
            raise DomainError("period and gap must be positive")
        if self.a < self.g:
            raise DomainError("gap larger than period gives an index below the dielectric's")
        if not 0 < self.blend_start < self.blend_end:
            raise DomainError("need 0 < blend_start < blend_end")

    @property
    def scale(self) -> float:
        return math.sqrt(self.a / self.g)

    def index(self, omega):
        w = np.asarray(omega, dtype=float)
        base = self.scale * self.dielectric.index(np.minimum(w, self.blend_start))
        below = w < self.blend_start
        if np.all(below):
            return base
        n_start = self.scale * float(self.dielectric.index(np.array(self.blend_start)))
        tail = _unity_blend(w, n_start, self.blend_start, self.blend_end)
        return np.where(below, base, tail)

    def kinks(self):
        inner = tuple(x for x in self.dielectric.kinks() if x < self.blend_start)
        return inner + (float(self.blend_start), float(self.blend_end))


@dataclass(frozen=True)
class AveragedIndex:
    n_bar: float
    omega_range: tuple
    note: str = ""


def refractive_index(model: DispersionModel, omega):
    """Refractive index of ``model`` at ``omega`` (eV, > 0)."""
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("omega must be positive")
    n = model.index(w)
    return float(n) if np.ndim(n) == 0 else n


def average_index(model: DispersionModel, omega_lo: float, omega_hi: float,
                  points: int = 1024, note: str = "") -> AveragedIndex:
    """Arithmetic mean of n(omega) on a uniform grid over [omega_lo, omega_hi]."""
    if not 0 < omega_lo < omega_hi:
        raise DomainError("need 0 < omega_lo < omega_hi")
    grid = np.linspace(omega_lo, omega_hi, max(points, 512))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        n_bar = float(np.mean(model.index(grid)))
    return AveragedIndex(n_bar, (omega_lo, omega_hi), note)


def load_dispersion_table(path, blend_end: float = DEFAULT_BLEND[1]) -> Tabulated:
    """Read an ``omega_eV,n`` CSV (``#`` comment lines allowed)."""
    path = Path(path)
    omega, n = [], []
    header_seen = False
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if not header_seen:
                if [c.strip() for c in row] != ["omega_eV", "n"]:
                    raise ValueError(f"{path}:{lineno}: expected header 'omega_eV,n'")
                header_seen = True
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns, got {len(row)}")
            try:
                w, v = float(row[0]), float(row[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
            if omega and w <= omega[-1]:
                raise ValueError(f"{path}:{lineno}: omega {w} not above previous {omega[-1]}")
            omega.append(w)
            n.append(v)
    if not omega:
        raise ValueError(f"{path}: no samples")
    return Tabulated(np.array(omega), np.array(n), blend_end=blend_end, name=path.name)


def write_dispersion_table(path, model: Tabulated) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_eV", "n"])
        for om, nn in zip(model.omega, model.n):
            w.writerow([repr(float(om)), repr(float(nn))])


def fit_sellmeier_tail(model: DispersionModel, omega_lo: float, omega_hi: float,
                       points: int = 256) -> SellmeierTail:
    """Least-squares fit of n - 1 = C1/w^2 + C2/w^4 over [omega_lo, omega_hi]."""
    w = np.linspace(omega_lo, omega_hi, points)
    y = model.index(w) - 1.0
    design = np.column_stack([w ** -2, w ** -4])
    (c1, c2), *_ = np.linalg.lstsq(design, y, rcond=None)
    return SellmeierTail(float(c1), float(c2))


# Real part of the index of an amorphous HfO2 film, smoothed; illustrative
# values following the usual shape (about 1.9 in the near IR, a peak near 3
# above the 5.8 eV gap). Not measured data.
HFO2_LIKE = (
    (0.50, 1.88), (1.00, 1.89), (1.50, 1.90), (2.00, 1.92), (2.50, 1.94),
    (3.00, 1.97), (3.50, 2.00), (4.00, 2.04), (4.50, 2.09), (5.00, 2.16),
    (5.50, 2.27), (5.80, 2.40), (6.00, 2.55), (6.50, 2.80), (7.00, 2.92),
    (7.50, 2.90), (8.00, 2.78), (8.50, 2.62), (9.00, 2.48), (9.50, 2.36),
    (10.00, 2.26), (10.65, 2.17),
)


def hfo2_like(blend_end: float = DEFAULT_BLEND[1]) -> Tabulated:
    om, nn = zip(*HFO2_LIKE)
    return Tabulated(np.array(om), np.array(nn), blend_end=blend_end, name="HfO2-like")


def gold_hfo2_metamaterial(g: float, a: float = 30.0, blend=DEFAULT_BLEND) -> MetamaterialEffective:
    """Au nanoparticle superlattice with HfO2-like gap filling."""
    return MetamaterialEffective(a, g, hfo2_like(), blend_start=blend[0], blend_end=blend[1])
