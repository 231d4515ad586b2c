"""
Bloch bands of a two-layer periodic stack (high-index layer + void).

The dispersion relation is written through the half-trace of the unit-cell
transfer matrix, evaluated in real arithmetic for propagating and evanescent
layers alike. At fixed in-plane wavenumber the half-trace ``h(omega)`` does
not depend on the Bloch wavenumber, so one frequency scan per ``k_rho``
serves every ``k_z``: the scan splits ``(0, omega_max]`` into pieces on which
``h`` is monotone, and each piece holds at most one root of
``h(omega) = cos(k_z * period)``.

Wavenumbers are in nm^-1, lengths in nm, frequencies in eV.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dispersion import Constant, DispersionModel, average_index
from .units import HBAR_C, DomainError

_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))


class Polarization(enum.IntEnum):
    TE = 1
    TM = 2


class BandSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class LayerStack:
    d_h: float
    d_l: float
    model_h: DispersionModel

    def __post_init__(self):
        if not (self.d_h > 0 and self.d_l > 0):
            raise DomainError("layer thicknesses must be positive")

    @property
    def period(self) -> float:
        return self.d_h + self.d_l

    @property
    def b_z(self) -> float:
        return 2.0 * math.pi / self.period

    @property
    def zone_edge(self) -> float:
        return math.pi / self.period


def empty_lattice(period: float = 100.0, fraction: float = 0.5) -> LayerStack:
    return LayerStack(fraction * period, (1 - fraction) * period, Constant(1.0))


@dataclass(frozen=True)
class BandPoint:
    k_rho: float
    k_z: float
    band: int
    pol: Polarization
    omega: float


def layer_axial_wavenumber(n_i, k0, k_rho):
    """Axial wavenumber sqrt(k0^2 n^2 - k_rho^2) in a homogeneous layer.

    ``k0`` is the vacuum wavenumber omega/c in the same units as ``k_rho``.
    Evanescent layers give a purely imaginary value with positive imaginary
    part; the branch point returns 0.
    """
    q2 = np.asarray(k0, dtype=float) ** 2 * np.asarray(n_i, dtype=float) ** 2 - np.asarray(k_rho, dtype=float) ** 2
    q = np.where(q2 >= 0, np.sqrt(np.abs(q2)) + 0j, 1j * np.sqrt(np.abs(q2)))
    return complex(q) if q.ndim == 0 else q


def _layer_cs(q2, d):
    """cos(qd), sin(qd)/q and q sin(qd) for real q^2 of either sign."""
    q = np.sqrt(np.abs(q2))
    x = q * d
    prop = q2 >= 0
    c = np.where(prop, np.cos(x), np.cosh(x))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(prop, np.sin(x), np.sinh(x)) / x
    s = d * np.where(x > 1e-8, ratio, 1.0)
    return c, s, q2 * s


def _pol_weights(pol, n_h):
    if pol == Polarization.TE:
        return np.ones_like(n_h), np.ones_like(n_h)
    return 1.0 / n_h ** 2, np.ones_like(n_h)


def cell_matrix(stack: LayerStack, pol, omega, k_rho):
    """Unit-cell transfer matrix acting on (psi, p psi').

    ``psi`` is E_y (TE) or H_y (TM); ``p`` is 1 (TE) or 1/eps (TM). The
    matrix maps the state at z = 0 to z = period, through the high-index
    layer first. Returns the four real entries as arrays.
    """
    omega = np.asarray(omega, dtype=float)
    k0 = omega / HBAR_C
    n_h = stack.model_h.index(omega)
    p_h, p_l = _pol_weights(pol, n_h)
    c_h, s_h, t_h = _layer_cs(k0 ** 2 * n_h ** 2 - k_rho ** 2, stack.d_h)
    c_l, s_l, t_l = _layer_cs(k0 ** 2 - k_rho ** 2, stack.d_l)
    m11 = c_l * c_h - s_l * t_h * p_h / p_l
    m12 = c_l * s_h / p_h + s_l * c_h / p_l
    m21 = -p_l * t_l * c_h - c_l * p_h * t_h
    m22 = c_l * c_h - t_l * s_h * p_l / p_h
    return m11, m12, m21, m22


def half_trace(stack: LayerStack, pol, omega, k_rho):
    """Right-hand side of the Bloch dispersion relation, cos(k_z period) = h."""
    omega = np.asarray(omega, dtype=float)
    k0 = omega / HBAR_C
    n_h = stack.model_h.index(omega)
    p_h, p_l = _pol_weights(pol, n_h)
    c_h, s_h, t_h = _layer_cs(k0 ** 2 * n_h ** 2 - k_rho ** 2, stack.d_h)
    c_l, s_l, t_l = _layer_cs(k0 ** 2 - k_rho ** 2, stack.d_l)
    return c_h * c_l - 0.5 * (s_l * t_h * p_h / p_l + t_l * s_h * p_l / p_h)


def dispersion_residual(stack: LayerStack, pol, omega, k_rho, k_z):
    """cos(k_z period) minus the half-trace; zero on a Bloch band."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("omega must be positive")
    r = np.cos(np.asarray(k_z) * stack.period) - half_trace(stack, Polarization(pol), omega, k_rho)
    return float(r) if np.ndim(r) == 0 else r


def default_step(stack: LayerStack, omega_max: float, fraction: float = 0.125) -> float:
    """Scan step: ``fraction`` of (pi/period)/n_bar, in eV."""
    n_bar = average_index(stack.model_h, omega_max * 1e-3, omega_max).n_bar
    return HBAR_C * stack.zone_edge * fraction / n_bar


def _golden_extrema(f, lo, hi, sign, iters=48):
    # vectorised golden-section search for the minimum of sign * f on [lo, hi]
    a, b = lo.copy(), hi.copy()
    c = a + _GOLDEN * (b - a)
    d = b - _GOLDEN * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = np.where(left, a + _GOLDEN * (b - a), d)
        new_d = np.where(left, c, b - _GOLDEN * (b - a))
        fnew = sign * f(np.where(left, new_c, new_d))
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
        c, d = new_c, new_d
        if np.all(b - a <= 1e-15 * np.abs(b)):
            break
    x = 0.5 * (a + b)
    return x


class BandScan:
    """Monotone pieces of h(omega) on (0, omega_max] at fixed k_rho and pol."""

    def __init__(self, stack: LayerStack, pol, k_rho: float, omega_max: float,
                 step: float | None = None, max_retries: int = 4):
        if not omega_max > 0:
            raise DomainError("omega_max must be positive")
        self.stack = stack
        self.pol = Polarization(pol)
        self.k_rho = float(k_rho)
        self.omega_max = float(omega_max)
        step = default_step(stack, omega_max) if step is None else step
        previous = current = self._segments(step)
        for _ in range(max_retries):
            step *= 0.5
            current = self._segments(step)
            if len(current[0]) == len(previous[0]):
                break
            previous = current
        else:
            raise BandSolverError(f"band count did not stabilise at k_rho={k_rho} (step {step:.3g} eV)")
        self.step = step
        self.lo, self.hi, self.h_lo, self.h_hi = current

    def h(self, omega):
        return half_trace(self.stack, self.pol, omega, self.k_rho)

    def _segments(self, step):
        npts = max(int(math.ceil(self.omega_max / step)), 256)
        grid = np.linspace(self.omega_max / npts * 1e-6, self.omega_max, npts + 1)
        hv = self.h(grid)
        dh = np.diff(hv)
        turn = np.nonzero(dh[:-1] * dh[1:] < 0)[0] + 1
        breaks = [grid[0]]
        if turn.size:
            sign = np.where(dh[turn - 1] > 0, -1.0, 1.0)  # maxima -> minimise -h
            ext = _golden_extrema(self.h, grid[turn - 1], grid[turn + 1], sign)
            breaks.extend(ext.tolist())
        breaks.append(self.omega_max)
        breaks = np.array(breaks)
        hb = self.h(breaks)
        lo, hi = breaks[:-1], breaks[1:]
        h_lo, h_hi = hb[:-1], hb[1:]
        allowed = (np.minimum(h_lo, h_hi) <= 1.0) & (np.maximum(h_lo, h_hi) >= -1.0) & (hi > lo)
        return lo[allowed], hi[allowed], h_lo[allowed], h_hi[allowed]

    @property
    def n_bands(self) -> int:
        """Bands reaching below omega_max (the last one possibly partially)."""
        return len(self.lo)

    def band_ranges(self):
        """Per band: (omega_lo, omega_hi, increasing_in_kz, kz_cut).

        ``kz_cut`` is the Bloch wavenumber in [0, pi/period] at which the band
        reaches omega_max, or None if the whole band lies below omega_max.
        """
        out = []
        for a, b, ha, hb in zip(self.lo, self.hi, self.h_lo, self.h_hi):
            increasing = hb < ha  # h falls as omega rises -> omega grows with |k_z|
            cut = None
            if b == self.omega_max and -1.0 < hb < 1.0:
                cut = math.acos(hb) / self.stack.period
            out.append((a, b, increasing, cut))
        return out

    def roots_at(self, k_z, band, max_iter=200):
        """Frequency of band index ``band`` (0-based, per entry) at each k_z."""
        k_z = np.asarray(k_z, dtype=float)
        band = np.asarray(band)
        target = np.cos(k_z * self.stack.period)
        a, b = self.lo[band].copy(), self.hi[band].copy()
        fa = self.h_lo[band] - target
        fb = self.h_hi[band] - target
        ok = fa * fb <= 0
        fa = np.where(ok, fa, 1.0)
        for _ in range(max_iter):
            m = 0.5 * (a + b)
            fm = self.h(m) - target
            left = fa * fm <= 0
            b = np.where(left, m, b)
            a = np.where(left, a, m)
            fa = np.where(left, fa, fm)
            if np.all((b - a) <= 4 * np.finfo(float).eps * b):
                break
        return np.where(ok, 0.5 * (a + b), np.nan)

    def roots(self, k_z, tol=1e-12, max_iter=200):
        """Frequencies (n_kz, n_bands); NaN where a band exceeds omega_max."""
        k_z = np.atleast_1d(np.asarray(k_z, dtype=float))
        target = np.cos(k_z * self.stack.period)[:, None]
        a = np.broadcast_to(self.lo, (k_z.size, self.n_bands)).copy()
        b = np.broadcast_to(self.hi, (k_z.size, self.n_bands)).copy()
        fa = self.h_lo[None, :] - target
        fb = self.h_hi[None, :] - target
        ok = fa * fb <= 0
        fa = np.where(ok, fa, 1.0)
        for _ in range(max_iter):
            m = 0.5 * (a + b)
            fm = self.h(m) - target
            left = fa * fm <= 0
            b = np.where(left, m, b)
            a = np.where(left, a, m)
            fa = np.where(left, fa, fm)
            if np.all((b - a) <= 4 * np.finfo(float).eps * b):
                break
        w = 0.5 * (a + b)
        return np.where(ok, w, np.nan)


def solve_bands(stack: LayerStack, pol, k_rho: float, k_z: float, omega_max: float,
                step: float | None = None) -> list[BandPoint]:
    """All Bloch frequencies in (0, omega_max] at (k_rho, k_z), ascending.

    ``band`` counts from the bottom of the spectrum, so at k_rho = k_z = 0 the
    first returned point is band 2 (band 1 sits at omega = 0).
    """
    if abs(k_z) > stack.zone_edge * (1 + 1e-12):
        raise DomainError("k_z outside the first Brillouin zone")
    scan = BandScan(stack, pol, k_rho, omega_max, step=step)
    w = scan.roots([k_z])[0]
    # band labels follow the scan segments, so a band whose root falls
    # outside (0, omega_max] leaves a gap in the numbering
    return [BandPoint(float(k_rho), float(k_z), i + 1, Polarization(pol), float(x))
            for i, x in enumerate(w) if np.isfinite(x)]


@dataclass
class BandSurface:
    """Row-major table of band points over a (k_rho, k_z) grid."""

    points: list

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k_rho_invnm", "k_z_invnm", "pol", "band", "omega_eV"])
        for p in self.points:
            w.writerow([repr(p.k_rho), repr(p.k_z), p.pol.name, p.band, repr(p.omega)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def band_surface(stack: LayerStack, pol, k_rho_grid, k_z_grid, omega_max: float,
                 threads: int = 1) -> BandSurface:
    k_rho_grid = np.atleast_1d(np.asarray(k_rho_grid, dtype=float))
    k_z_grid = np.atleast_1d(np.asarray(k_z_grid, dtype=float))
    if k_rho_grid.size == 0 or k_z_grid.size == 0:
        raise DomainError("empty grid")
    if np.any(np.abs(k_z_grid) > stack.zone_edge * (1 + 1e-12)):
        raise DomainError("k_z outside the first Brillouin zone")
    pol = Polarization(pol)

    def row(kr):
        scan = BandScan(stack, pol, kr, omega_max)
        w = scan.roots(k_z_grid)
        out = []
        for kz, ws in zip(k_z_grid, w):
            out.extend(BandPoint(float(kr), float(kz), i + 1, pol, float(x)) for i, x in enumerate(ws) if np.isfinite(x))
        return out

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            rows = list(ex.map(row, k_rho_grid))
    else:
        rows = [row(kr) for kr in k_rho_grid]
    return BandSurface([p for r in rows for p in r])
