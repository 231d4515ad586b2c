"""
Anisotropic photonic-crystal correction to the electron electromagnetic mass.

The correction has the form delta_m(theta) = A + cos^2(theta) B, theta being
the angle between the electron momentum and the stack axis. A and B are
integrals over the in-plane wavenumber k_rho and the Bloch wavenumber k_z,
summed over bands below ``omega_max`` and over reciprocal vectors G, of the
plane-wave weights |E(G)|^2 / omega^2 times azimuthally reduced angular
factors. The vacuum self-energy is subtracted from A only; its anisotropic
part vanishes on any rotationally symmetric cutoff.

Quadrature layout
-----------------
* outer k_rho integral: Gauss-Legendre panels whose ends sit where a band
  edge crosses ``omega_max`` (the inner integral has a square-root kink
  there), each panel mapped through a smoothstep so that endpoint kinks
  become smooth;
* inner k_z integral: per band, Gauss-Legendre on [0, pi/period] or on the
  part of it below ``omega_max``; the band that touches k = 0 uses a
  k_z = k_rho sinh(t) map that removes the 1/|k|^2 point singularity;
* the integrand is even in k_z, so only k_z >= 0 is sampled.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .bands import BandScan, LayerStack, Polarization, half_trace
from .fields import ModeSet, default_cutoff
from .units import ALPHA, HBAR_C, Direction, DomainError, vacuum_mass_correction

PREFACTOR = ALPHA / math.pi


class QuadratureError(RuntimeError):
    """Refinement did not reach the requested tolerance."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class QuadratureConfig:
    k_rho_max: float | None = None  # nm^-1; None -> just past the last guided mode
    n_rho: int = 8  # nodes per k_rho panel
    n_z: int = 8  # nodes per band in k_z
    refinement: int = 3  # max panel halvings
    tol_rel: float = 2e-3
    floor: float = 1e-6  # eV
    g_extra: int = 24  # reciprocal vectors beyond the field's own content
    threads: int = 1
    kink_panels: bool = True  # panel edges where n(omega) kinks meet a band edge

    def __post_init__(self):
        if self.k_rho_max is not None and not self.k_rho_max > 0:
            raise DomainError("k_rho_max must be positive")
        if not (self.tol_rel > 0 and self.floor > 0):
            raise DomainError("tolerances must be positive")
        if self.n_rho < 2 or self.n_z < 2:
            raise DomainError("need at least two nodes per panel")


@dataclass(frozen=True)
class RegularizationConfig:
    omega_max: float = 10.65  # eV
    matching: str = "mode"  # "mode" | "freq"
    k0: float | None = None  # eV, auxiliary cutoff for the tail estimate

    def __post_init__(self):
        if not self.omega_max > 0:
            raise DomainError("omega_max must be positive")
        if self.matching not in ("mode", "freq"):
            raise DomainError("matching must be 'mode' or 'freq'")


@dataclass
class TailEstimate:
    C1: float
    magnitude: float
    k0: float
    order_c1_over_k0: float
    order_bz2_over_k0: float


@dataclass
class MassCorrection:
    A: float
    B: float
    diagnostics: dict = field(default_factory=dict)

    def delta_m(self, direction: Direction) -> float:
        return delta_m(direction, self)

    def report(self) -> dict:
        d = self.diagnostics
        return {
            "A_eV": self.A,
            "B_eV": self.B,
            "tol_achieved": d.get("tol_achieved"),
            "bands_included": d.get("bands_included"),
            "M": d.get("M"),
            "vacuum_term_eV": d.get("vacuum_term"),
            "tail_estimate_eV": d.get("tail_estimate"),
            "scheme": d.get("scheme"),
        }

    def to_json(self) -> str:
        return json.dumps(self.report(), indent=2, sort_keys=True)


def delta_m(direction: Direction, mc: MassCorrection) -> float:
    """A + cos^2(theta) B; independent of the azimuth."""
    c = math.cos(direction.theta)
    return mc.A + c * c * mc.B


# --- angular reduction ---------------------------------------------------

def polarization_vectors(k_rho, k_gz, phi):
    """Unit vectors (azimuthal, in-plane) transverse to k_G = (k_rho cos phi,
    k_rho sin phi, k_gz). The azimuthal one is the direction of E for TE
    modes, the in-plane one for TM modes."""
    k = math.hypot(k_rho, k_gz)
    phi = np.asarray(phi, dtype=float)
    az = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)])
    ip = np.stack([k_gz * np.cos(phi), k_gz * np.sin(phi), -k_rho * np.ones_like(phi)]) / k
    return az, ip


def azimuthal_factor_inplane(k_rho, k_gz, theta):
    """(1/pi) integral over phi of |I_p . e_inplane|^2."""
    k2 = k_rho ** 2 + k_gz ** 2
    return (k_gz ** 2 * math.sin(theta) ** 2 + 2 * k_rho ** 2 * math.cos(theta) ** 2) / k2


def azimuthal_factor_azimuthal(theta):
    """(1/pi) integral over phi of |I_p . e_azimuthal|^2."""
    return math.sin(theta) ** 2


@dataclass
class ReductionReport:
    ok: bool
    max_error: float
    failures: list


def azimuthal_reduction_check(samples, n_phi: int = 64, tol: float = 1e-10) -> ReductionReport:
    """Compare the closed-form azimuthal factors against direct phi quadrature.

    ``samples`` is an iterable of (k_rho, k_gz, theta, Phi). For each point
    the integrand |I_p . e(phi)|^2 is a trigonometric polynomial of degree 2
    in phi, so an n_phi-point periodic trapezoid rule is exact. Also checks
    that the azimuthal x in-plane cross term integrates to zero.
    """
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    worst, failures = 0.0, []
    for k_rho, k_gz, theta, Phi in samples:
        ip_dir = np.array([math.sin(theta) * math.cos(Phi), math.sin(theta) * math.sin(Phi), math.cos(theta)])
        az, inp = polarization_vectors(k_rho, k_gz, phi)
        f_az = ip_dir @ az
        f_ip = ip_dir @ inp
        num_az = 2 * np.mean(f_az ** 2)  # (1/pi) * (2 pi) * mean
        num_ip = 2 * np.mean(f_ip ** 2)
        cross = 2 * np.mean(f_az * f_ip)
        errs = (
            abs(num_az - azimuthal_factor_azimuthal(theta)),
            abs(num_ip - azimuthal_factor_inplane(k_rho, k_gz, theta)),
            abs(cross),
        )
        worst = max(worst, *errs)
        if max(errs) > tol:
            failures.append(((k_rho, k_gz, theta, Phi), errs))
    return ReductionReport(not failures, worst, failures)


# --- quadrature helpers --------------------------------------------------

@lru_cache(maxsize=64)
def _gauss_cached(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _gauss(n):
    u, w = _gauss_cached(n)
    return u.copy(), w.copy()


def _smoothstep_panel(a, b, n):
    u, w = _gauss(n)
    s = u * u * (3 - 2 * u)
    ds = 6 * u * (1 - u)
    return a + (b - a) * s, (b - a) * ds * w


def _linear_panel(a, b, n):
    u, w = _gauss(n)
    return a + (b - a) * u, (b - a) * w


def _sinh_panel(k_rho, a, b, n):
    # k_z = k_rho sinh(t) on [a, b]; clusters nodes near k_z = 0 at scale k_rho
    if k_rho <= 0:
        return _linear_panel(a, b, n)
    ta, tb = math.asinh(a / k_rho), math.asinh(b / k_rho)
    t, w = _linear_panel(ta, tb, n)
    return k_rho * np.sinh(t), k_rho * np.cosh(t) * w


def extended_zone_k(band, k_z, period):
    """|k_z + G| in the extended zone for the n-th band (1-based), k_z >= 0."""
    b = 2 * math.pi / period
    band = np.asarray(band)
    half = band // 2
    return np.where(band % 2 == 1, half * b + k_z, half * b - k_z)


def guided_limit(stack: LayerStack, omega_max: float, samples: int = 4096) -> float:
    """Largest k_rho (nm^-1) at which a mode can sit at or below omega_max."""
    w = np.linspace(omega_max / samples, omega_max, samples)
    return float(np.max(w * stack.model_h.index(w))) / HBAR_C


def band_crossings(stack: LayerStack, pol, omega_max: float, k_rho_max: float, samples: int = 4000):
    """k_rho values where a band edge passes through omega_max (h = +-1)."""
    kr = np.linspace(0.0, k_rho_max, samples + 1)
    h = half_trace(stack, pol, np.full(kr.shape, omega_max), kr)
    out = []
    for level in (1.0, -1.0):
        f = h - level
        idx = np.nonzero(f[:-1] * f[1:] < 0)[0]
        for i in idx:
            g = lambda x: float(half_trace(stack, pol, np.array(omega_max), x)) - level
            out.append(brentq(g, kr[i], kr[i + 1], xtol=1e-15, rtol=1e-14))
        out.extend(kr[np.nonzero(f == 0)[0]].tolist())
    return sorted(set(x for x in out if 0 < x < k_rho_max))


# --- main integrand ------------------------------------------------------

@dataclass
class _NodeResult:
    # per band: [te/tm total, axial, aniso, vacuum, longitudinal, count]
    sums: dict


def _node(stack, pol, k_rho, weight, omega_max, n_z, g_extra):
    """Contribution of one k_rho node, integrated over k_z and summed over bands."""
    scan = BandScan(stack, pol, k_rho, omega_max)
    ranges = scan.band_ranges()
    kinks = np.array([w for w in stack.model_h.kinks() if 0 < w < omega_max])
    h_kinks = scan.h(kinks) if kinks.size else kinks
    kz_all, wz_all, band_all, col_all = [], [], [], []
    edge = stack.zone_edge
    for j, (w_lo, w_hi, increasing, cut) in enumerate(ranges):
        if cut is None:
            lo, hi = 0.0, edge
        elif increasing:
            lo, hi = 0.0, cut
        else:
            lo, hi = cut, edge
        if hi <= lo:
            continue
        # slope jumps of n(omega) inside the band become panel edges in k_z
        inside = (kinks > w_lo) & (kinks < w_hi)
        cuts = np.arccos(np.clip(h_kinks[inside], -1.0, 1.0)) / stack.period
        edges = np.unique(np.concatenate([[lo, hi], cuts[(cuts > lo) & (cuts < hi)]]))
        for a, b in zip(edges[:-1], edges[1:]):
            if j == 0 and a == 0.0:
                kz, wz = _sinh_panel(k_rho, a, b, 2 * n_z)
            else:
                kz, wz = _linear_panel(a, b, n_z)
            kz_all.append(kz)
            wz_all.append(wz)
            band_all.append(np.full(kz.shape, j + 1))
            col_all.append(np.full(kz.shape, j))
    if not kz_all:
        return {}
    kz = np.concatenate(kz_all)
    wz = np.concatenate(wz_all)
    band = np.concatenate(band_all)
    col = np.concatenate(col_all)
    omega = scan.roots_at(kz, col)
    keep = np.isfinite(omega)
    kz, wz, band, omega = kz[keep], wz[keep], band[keep], omega[keep]
    if kz.size == 0:
        return {}
    M = default_cutoff(stack, k_rho, omega_max, g_extra)
    modes = ModeSet(stack, pol, k_rho, omega, kz)
    total, axial, aniso, longitudinal = modes.polarization_sums(M)
    k0 = omega / HBAR_C
    # factor 2: the integrand is even in k_z
    wt = 2.0 * weight * k_rho * wz / k0 ** 2
    kext = extended_zone_k(band, kz, stack.period)
    assert np.all(k_rho ** 2 + kext ** 2 > 0), "quadrature node at k = 0"
    vac = 2.0 * weight * k_rho * wz / (3.0 * (k_rho ** 2 + kext ** 2))
    out = {}
    for j in np.unique(band):
        sel = band == j
        out[int(j)] = np.array([
            np.sum(wt[sel] * total[sel]),
            np.sum(wt[sel] * axial[sel]),
            np.sum(wt[sel] * aniso[sel]),
            np.sum(vac[sel]),
            np.sum(wt[sel] * longitudinal[sel]),
            float(M),
        ])
    return out


def _rho_nodes(stack, pol, omega_max, quad: QuadratureConfig, level: int):
    kmax = quad.k_rho_max if quad.k_rho_max is not None else guided_limit(stack, omega_max) * (1 + 1e-9)
    breaks = [0.0] + band_crossings(stack, pol, omega_max, kmax) + [kmax]
    if quad.kink_panels:
        for w in stack.model_h.kinks():
            if 0 < w < omega_max:
                breaks += band_crossings(stack, pol, w, kmax)
    # the void turns evanescent at the light line; keep it as a panel edge too
    light = omega_max / HBAR_C
    if 0 < light < kmax:
        breaks.append(light)
    breaks = sorted(set(breaks))
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        # narrow panels between close breakpoints need fewer nodes
        n = min(quad.n_rho, max(3, math.ceil(quad.n_rho * 16 * (b - a) / kmax)))
        edges = np.linspace(a, b, 2 ** level + 1)
        for x, y in zip(edges[:-1], edges[1:]):
            k, w = _smoothstep_panel(x, y, n)
            nodes.append(k)
            weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights), len(breaks) - 1


def _polarization_integrals(stack, pol, omega_max, quad, level):
    """Return per-band arrays [total, axial, aniso, vacuum, longitudinal, M] in
    nm^-1 units (before the alpha/pi and hbar*c factors)."""
    kr, wr, panels = _rho_nodes(stack, pol, omega_max, quad, level)
    args = [(stack, pol, float(k), float(w), omega_max, quad.n_z, quad.g_extra) for k, w in zip(kr, wr)]
    if quad.threads and quad.threads > 1:
        with ThreadPoolExecutor(quad.threads) as ex:
            results = list(ex.map(lambda a: _node(*a), args))
    else:
        results = [_node(*a) for a in args]
    bands = sorted({b for r in results for b in r})
    per_band = {}
    for b in bands:
        cols = [r[b] for r in results if b in r]
        # fixed-order compensated sums over nodes
        per_band[b] = np.array([math.fsum(c[i] for c in cols) for i in range(5)] + [max(c[5] for c in cols)])
    return per_band, panels


@dataclass(frozen=True)
class _Raw:
    te: dict
    tm: dict


def _combine(raw: _Raw, reg: RegularizationConfig):
    scale = PREFACTOR * HBAR_C

    def tot(d, i):
        return math.fsum(v[i] for _, v in sorted(d.items()))

    te_total, te_axial, te_aniso = (tot(raw.te, i) for i in range(3))
    tm_total, tm_axial, tm_aniso = (tot(raw.tm, i) for i in range(3))
    # TE field lies along the azimuthal vector (factor sin^2 theta); TM field
    # along the in-plane vector (factor (k_Gz^2 sin^2 + 2 k_rho^2 cos^2)/k^2)
    a_pc = scale * (te_total + tm_axial)
    b = scale * (tm_aniso - te_total)
    if reg.matching == "mode":
        vac = scale * (tot(raw.te, 3) + tot(raw.tm, 3))
    else:
        vac = vacuum_mass_correction(reg.omega_max)
    return a_pc, vac, b


def vacuum_subtraction_term(reg: RegularizationConfig, included_modes=None) -> float:
    """Vacuum electromagnetic mass paired with the included PC modes.

    ``included_modes`` is a sequence of (k_rho, k_ext, weight) quadrature
    nodes over the half-plane k_rho >= 0 of the extended zone, one entry per
    polarisation; used for the mode-matched scheme. The frequency-matched
    scheme is a sphere of radius omega_max.
    """
    if reg.matching == "freq":
        return vacuum_mass_correction(reg.omega_max)
    if not included_modes:
        return 0.0
    acc = math.fsum(w * kr / (3.0 * (kr * kr + kz * kz)) for kr, kz, w in included_modes)
    return PREFACTOR * HBAR_C * acc


def tail_estimate(stack: LayerStack, k0: float, C1: float) -> TailEstimate:
    """Size of the correction from |k| > k0 for a Sellmeier tail n = 1 + C1/k^2.

    ``k0`` in eV, ``C1`` in eV^2. Returns (alpha/6 pi^2) (C1 d_h/period) 4 pi/k0.
    """
    bz = stack.b_z * HBAR_C
    if not k0 > bz:
        raise DomainError(f"k0={k0} eV must exceed the zone width {bz:.4g} eV")
    mag = ALPHA / (6 * math.pi ** 2) * (C1 * stack.d_h / stack.period) * 4 * math.pi / k0
    return TailEstimate(C1, abs(mag), k0, abs(C1) / k0, bz ** 2 / k0)


def _evaluate(stack, quad, reg, level):
    te, p_te = _polarization_integrals(stack, Polarization.TE, reg.omega_max, quad, level)
    tm, p_tm = _polarization_integrals(stack, Polarization.TM, reg.omega_max, quad, level)
    raw = _Raw(te, tm)
    a_pc, vac, b = _combine(raw, reg)
    return raw, a_pc, vac, b


def ab_coefficients(stack: LayerStack, quad: QuadratureConfig | None = None,
                    reg: RegularizationConfig | None = None, raise_on_failure: bool = True) -> MassCorrection:
    """Coefficients (A, B) of the mass correction, in eV."""
    quad = quad or QuadratureConfig()
    reg = reg or RegularizationConfig()
    prev = None
    history = []
    achieved = math.inf
    for level in range(quad.refinement + 1):
        raw, a_pc, vac, b = _evaluate(stack, quad, reg, level)
        a = a_pc - vac
        history.append((a, b))
        if prev is not None:
            scale = max(abs(a), abs(b), quad.floor)
            achieved = max(abs(a - prev[0]), abs(b - prev[1])) / scale
            if achieved < quad.tol_rel:
                break
        prev = (a, b)
    mc = _assemble(stack, reg, raw, a_pc, vac, b, achieved, level, history)
    if achieved >= quad.tol_rel and raise_on_failure:
        raise QuadratureError(f"no convergence after {level} refinements (achieved {achieved:.2e})", mc)
    return mc


def _assemble(stack, reg, raw, a_pc, vac, b, achieved, level, history):
    scale = PREFACTOR * HBAR_C
    per_band = {}
    for name, d in (("TE", raw.te), ("TM", raw.tm)):
        for band, v in sorted(d.items()):
            per_band[f"{name}{band}"] = [scale * x for x in v[:5]]
    long_num = math.fsum(v[4] for _, v in sorted(raw.tm.items()))
    long_den = math.fsum(v[0] + v[4] for _, v in sorted(raw.tm.items()))
    diag = {
        "A_pc": a_pc,
        "vacuum_term": vac,
        "tol_achieved": achieved,
        "refinements": level,
        "history": history,
        "bands_included": max([len(raw.te), len(raw.tm)]),
        "M": int(max([v[5] for v in list(raw.te.values()) + list(raw.tm.values())], default=0)),
        "scheme": reg.matching,
        "per_band": per_band,
        "longitudinal_fraction": long_num / long_den if long_den else 0.0,
        "tail_estimate": None,
        "raw": raw,
    }
    if reg.k0 is not None:
        from .dispersion import fit_sellmeier_tail

        hi = max(reg.k0, 2 * reg.omega_max)
        c1 = fit_sellmeier_tail(stack.model_h, reg.k0, 4 * hi).C1
        diag["tail_estimate"] = tail_estimate(stack, reg.k0, c1).magnitude
    return MassCorrection(a_pc - vac, b, diag)
