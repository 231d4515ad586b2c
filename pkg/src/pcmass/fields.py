"""
Bloch eigenfields of the two-layer stack and their plane-wave coefficients.

A mode is the eigenvector of the unit-cell transfer matrix for the Bloch
factor exp(i k_z period), propagated into each layer as a pair of
exponentials exp(+-i q z). Every field component is therefore a sum of
exponentials per layer and its Fourier coefficients are closed-form layer
integrals; no sampling is involved.

Normalisation: (1/period) * integral of eps |E|^2 over the cell = 1/2, the
value a single free-space plane-wave polarisation carries. With this choice
the uniform-vacuum stack reproduces the free-space self-energy exactly.

The local frame has k_rho along x. TE modes carry E_y (the azimuthal
direction); TM modes carry H_y and an in-plane E = (E_x, E_z).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bands import BandPoint, LayerStack, Polarization, cell_matrix, half_trace
from .units import HBAR_C


class OffShellError(ValueError):
    """The requested band point does not satisfy the dispersion relation."""


@dataclass(frozen=True)
class TransferMatrix:
    matrix: np.ndarray

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    @property
    def half_trace(self) -> float:
        return float(np.real(np.trace(self.matrix))) / 2.0


def unit_cell_transfer_matrix(stack: LayerStack, pol, omega: float, k_rho: float) -> TransferMatrix:
    m11, m12, m21, m22 = cell_matrix(stack, Polarization(pol), np.asarray(float(omega)), k_rho)
    return TransferMatrix(np.array([[m11, m12], [m21, m22]], dtype=complex))


def _phi(x):
    # (exp(x) - 1) / x for complex x, 1 at x = 0
    small = np.abs(x) < 1e-8
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.expm1(x) / x
    return np.where(small, 1.0 + 0.5 * x, r)


def _branch(q2):
    return np.sqrt(q2.astype(complex))


class ModeSet:
    """Vectorised Bloch fields for many (omega, k_z) at fixed k_rho and pol.

    Each field component ``c`` is stored per layer as the coefficient pair
    ``(alpha, beta)`` of exp(+i q t) and exp(-i q (t - d)), t measured from
    the layer start, already normalised. The second exponential is referred
    to the layer end so that both stay bounded in evanescent layers.
    """

    # above this transfer-matrix size the eigenvector is found from the
    # interface-matching system instead of the (ill-conditioned) cell matrix
    null_threshold = 1e4

    def __init__(self, stack: LayerStack, pol, k_rho: float, omega, k_z):
        self.stack = stack
        self.pol = Polarization(pol)
        self.k_rho = float(k_rho)
        self.omega = np.atleast_1d(np.asarray(omega, dtype=float))
        self.k_z = np.broadcast_to(np.asarray(k_z, dtype=float), self.omega.shape).copy()
        self._build()

    def _build(self):
        st, kr = self.stack, self.k_rho
        k0 = self.omega / HBAR_C
        n_h = st.model_h.index(self.omega)
        p_h = np.ones_like(n_h) if self.pol == Polarization.TE else 1.0 / n_h ** 2
        p_l = np.ones_like(n_h)
        q2_h = k0 ** 2 * n_h ** 2 - kr ** 2
        q2_l = k0 ** 2 - kr ** 2
        q_h, q_l = _branch(q2_h), _branch(q2_l)
        tiny_h, tiny_l = 1e-12 / st.d_h, 1e-12 / st.d_l
        q_h = np.where(np.abs(q_h) < tiny_h, tiny_h, q_h)
        q_l = np.where(np.abs(q_l) < tiny_l, tiny_l, q_l)

        m11, m12, m21, m22 = cell_matrix(st, self.pol, self.omega, kr)
        lam = np.exp(1j * self.k_z * st.period)
        half = 0.5 * (m11 + m22)
        self.band_edge = np.abs(np.abs(half) - 1.0) < 1e-10
        self.matrix_scale = np.abs(m11) + np.abs(m12) + np.abs(m21) + np.abs(m22)
        self.off_shell = np.abs(np.cos(self.k_z * st.period) - half)

        # Per layer the field is a e^{iqt} + b e^{-iq(t - d)}, t from the layer
        # start; both terms stay bounded when the layer is evanescent.
        e_h, e_l = np.exp(1j * q_h * st.d_h), np.exp(1j * q_l * st.d_l)
        P_h, P_l = p_h * q_h, p_l * q_l
        coef = self._eigvec_transfer(m11, m12, m21, m22, lam, st, q_h, q_l, p_h, p_l)
        bad = self.matrix_scale > self.null_threshold
        if np.any(bad):
            coef[:, bad] = self._eigvec_null(lam[bad], e_h[bad], e_l[bad], P_h[bad], P_l[bad])
        self.degenerate = self.band_edge & (np.abs(m12) + np.abs(m21) < 1e-12 * (1 + self.matrix_scale))
        a_h, b_h, a_l, b_l = coef

        self.layers = []
        for z0, d, q, p, n, a, b in (
            (0.0, st.d_h, q_h, p_h, n_h, a_h, b_h),
            (st.d_h, st.d_l, q_l, p_l, np.ones_like(n_h), a_l, b_l),
        ):
            if self.pol == Polarization.TE:
                comps = {"y": (a, b)}
            else:
                comps = {
                    "h": (a, b),
                    "x": (p * q / k0 * a, -p * q / k0 * b),
                    "z": (-kr * p / k0 * a, -kr * p / k0 * b),
                }
            self.layers.append({"z0": z0, "d": d, "q": q, "eps": n ** 2, "comps": comps})

        norm = self.weighted_norm()
        scale = 1.0 / np.sqrt(2.0 * norm)
        for layer in self.layers:
            layer["comps"] = {k: (al * scale, be * scale) for k, (al, be) in layer["comps"].items()}

    @staticmethod
    def _eigvec_transfer(m11, m12, m21, m22, lam, st, q_h, q_l, p_h, p_l):
        # eigenvector of the cell matrix for lam, carried through the stack
        v1 = np.stack([m12 + 0j, lam - m11])
        v2 = np.stack([lam - m22, m21 + 0j])
        n1 = np.linalg.norm(v1, axis=0)
        n2 = np.linalg.norm(v2, axis=0)
        v = np.where(n1 >= n2, v1, v2)
        vn = np.maximum(n1, n2)
        v = np.where(vn > 0, v / np.where(vn > 0, vn, 1.0), np.array([1.0 + 0j, 0.0])[:, None])
        psi0, dpsi0 = v[0], v[1]
        c, s = np.cos(q_h * st.d_h), np.sin(q_h * st.d_h)
        psi1 = c * psi0 + s / (q_h * p_h) * dpsi0
        dpsi1 = -p_h * q_h * s * psi0 + c * dpsi0
        out = []
        for psi, dpsi, q, p, d in ((psi0, dpsi0, q_h, p_h, st.d_h), (psi1, dpsi1, q_l, p_l, st.d_l)):
            a = 0.5 * (psi + dpsi / (1j * q * p))
            b = 0.5 * (psi - dpsi / (1j * q * p)) * np.exp(-1j * q * d)
            out.extend([a, b])
        return np.stack(out)

    @staticmethod
    def _eigvec_null(lam, e_h, e_l, P_h, P_l):
        # null vector of the 4x4 interface-matching system in the bounded basis
        one = np.ones_like(lam)
        scale = np.maximum(np.abs(P_h), np.abs(P_l))
        ph, pl = P_h / scale, P_l / scale
        rows = np.stack([
            np.stack([e_h, one, -one, -e_l], axis=-1),
            np.stack([ph * e_h, -ph, -pl, pl * e_l], axis=-1),
            np.stack([-lam, -lam * e_h, e_l, one], axis=-1),
            np.stack([-lam * ph, lam * ph * e_h, pl * e_l, -pl], axis=-1),
        ], axis=-2)
        _, _, vh = np.linalg.svd(rows)
        return vh[:, -1, :].conj().T

    @property
    def e_components(self):
        return ("y",) if self.pol == Polarization.TE else ("x", "z")

    def _layer_norm(self, layer, comp):
        al, be = layer["comps"][comp]
        q, d = layer["q"], layer["d"]
        im, re = q.imag, q.real
        decay = d * _phi(-2 * im * d)
        cross = np.exp(-1j * np.conj(q) * d) * d * _phi(2j * re * d)
        val = (np.abs(al) ** 2 + np.abs(be) ** 2) * decay + 2 * np.real(al * np.conj(be) * cross)
        return np.real(val)

    def weighted_norm(self):
        """(1/period) integral of eps |E|^2."""
        tot = 0.0
        for layer in self.layers:
            for comp in self.e_components:
                tot = tot + layer["eps"] * self._layer_norm(layer, comp)
        return tot / self.stack.period

    def plain_norm(self, comps=None):
        """(1/period) integral of |E|^2 over the listed components."""
        comps = self.e_components if comps is None else comps
        tot = 0.0
        for layer in self.layers:
            for comp in comps:
                tot = tot + self._layer_norm(layer, comp)
        return tot / self.stack.period

    def fourier(self, comp, m, weighted=False):
        """Coefficients of exp(i (k_z + G) z), G = m b_z; shape (modes, len(m))."""
        m = np.asarray(m)
        K = self.k_z[:, None] + m[None, :] * self.stack.b_z
        out = 0.0
        for layer in self.layers:
            al, be = layer["comps"][comp]
            q = layer["q"][:, None]
            d, z0 = layer["d"], layer["z0"]
            term = (al[:, None] * _phi(1j * (q - K) * d)
                    + be[:, None] * np.exp(-1j * K * d) * _phi(1j * (q + K) * d)) * d
            if weighted:
                term = term * np.asarray(layer["eps"])[:, None]
            out = out + np.exp(-1j * K * z0) * term
        return out / self.stack.period

    def field(self, comp, z):
        """Real-space component on a z grid inside one cell; shape (modes, len(z))."""
        z = np.asarray(z, dtype=float)
        out = np.zeros((self.omega.size, z.size), dtype=complex)
        for layer in self.layers:
            al, be = layer["comps"][comp]
            t = z[None, :] - layer["z0"]
            inside = (t >= 0) & (t <= layer["d"])
            q = layer["q"][:, None]
            val = al[:, None] * np.exp(1j * q * t) + be[:, None] * np.exp(-1j * q * (t - layer["d"]))
            out = np.where(inside, val, out)
        return out

    def polarization_sums(self, M: int):
        """Per-mode G-sums of the projected coefficient weighted by the
        azimuthally reduced factors.

        Returns ``(total, axial, anisotropic, longitudinal)`` where, with
        c(G) the coefficient on the transverse polarisation vector and
        k_G = (k_rho, k_z + G):

        * total       = sum |c|^2
        * axial       = sum |c|^2 (k_z + G)^2 / |k_G|^2
        * anisotropic = sum |c|^2 (2 k_rho^2 - (k_z + G)^2) / |k_G|^2
        * longitudinal = sum of the squared projection on k_G (TM only)

        The part of the sum beyond |m| > M is closed with the Parseval
        remainder, using the large-|G| limits of the weights (1, 1, -1).
        """
        m = np.arange(-M, M + 1)
        K = self.k_z[:, None] + m[None, :] * self.stack.b_z
        kr = self.k_rho
        k2 = kr ** 2 + K ** 2
        if self.pol == Polarization.TE:
            c = self.fourier("y", m)
            tail = self.plain_norm(("y",)) - np.sum(np.abs(c) ** 2, axis=1)
            longitudinal = np.zeros(self.omega.size)
        else:
            ex, ez = self.fourier("x", m), self.fourier("z", m)
            kk = np.sqrt(k2)
            c = (ex * K - ez * kr) / kk
            el = (ex * kr + ez * K) / kk
            tail = self.plain_norm(("x",)) - np.sum(np.abs(ex) ** 2, axis=1)
            longitudinal = np.sum(np.abs(el) ** 2, axis=1)
        w = np.abs(c) ** 2
        tail = np.maximum(tail, 0.0)
        total = np.sum(w, axis=1) + tail
        axial = np.sum(w * K ** 2 / k2, axis=1) + tail
        aniso = np.sum(w * (2 * kr ** 2 - K ** 2) / k2, axis=1) - tail
        return total, axial, aniso, longitudinal


def default_cutoff(stack: LayerStack, k_rho: float, omega_max: float, extra: int = 24) -> int:
    """G cutoff covering the largest axial wavenumber below omega_max, plus margin."""
    k0 = omega_max / HBAR_C
    n = stack.model_h.max_index(omega_max)
    q = math.sqrt(max(k0 ** 2 * n ** 2 - k_rho ** 2, 0.0))
    return int(math.ceil(q * stack.period / (2 * math.pi))) + extra


@dataclass
class BlochFieldProfile:
    bandpoint: BandPoint
    stack: LayerStack
    modes: ModeSet
    degenerate: bool

    @property
    def amplitudes(self):
        """Per layer: forward/backward amplitudes of E_y (TE) or H_y (TM); the
        backward one is referred to the layer end."""
        key = "y" if self.bandpoint.pol == Polarization.TE else "h"
        return [(complex(l["comps"][key][0][0]), complex(l["comps"][key][1][0])) for l in self.modes.layers]

    @property
    def normalization(self) -> float:
        return float(self.modes.weighted_norm()[0])

    def field(self, z):
        """Electric field vector (E_x, E_y, E_z) in the local frame at z in [0, period]."""
        z = np.asarray(z, dtype=float)
        zero = np.zeros(z.shape, dtype=complex)
        if self.bandpoint.pol == Polarization.TE:
            return np.stack([zero, self.modes.field("y", z)[0], zero])
        return np.stack([self.modes.field("x", z)[0], zero, self.modes.field("z", z)[0]])

    def scalar(self, z):
        """E_y (TE) or H_y (TM)."""
        key = "y" if self.bandpoint.pol == Polarization.TE else "h"
        return self.modes.field(key, np.asarray(z, dtype=float))[0]

    def interface_mismatch(self) -> float:
        """Largest relative jump of (psi, p psi') across the two interfaces,
        including the Bloch-wrapped one at z = period."""
        key = "y" if self.bandpoint.pol == Polarization.TE else "h"
        st = self.stack
        vals = []
        for layer in self.modes.layers:
            al, be = (x[0] for x in layer["comps"][key])
            q, d, p = layer["q"][0], layer["d"], 1.0
            if self.bandpoint.pol == Polarization.TM:
                p = 1.0 / layer["eps"] if np.ndim(layer["eps"]) == 0 else 1.0 / layer["eps"][0]
            e = np.exp(1j * q * d)
            start = (al + be * e, p * 1j * q * (al - be * e))
            end = (al * e + be, p * 1j * q * (al * e - be))
            vals.append((start, end))
        bloch = np.exp(1j * self.bandpoint.k_z * st.period)
        (s_h, e_h), (s_l, e_l) = vals
        scale = max(abs(s_h[0]), abs(e_h[0]), 1e-300)
        dscale = max(abs(s_h[1]), abs(e_h[1]), abs(s_l[1]), 1e-300)
        mism = [
            abs(e_h[0] - s_l[0]) / scale,
            abs(e_h[1] - s_l[1]) / dscale,
            abs(e_l[0] - bloch * s_h[0]) / scale,
            abs(e_l[1] - bloch * s_h[1]) / dscale,
        ]
        return float(max(mism))


def mode_profile(stack: LayerStack, bandpoint: BandPoint, tol: float = 1e-8) -> BlochFieldProfile:
    """Normalised Bloch field of a solved band point."""
    modes = ModeSet(stack, bandpoint.pol, bandpoint.k_rho, [bandpoint.omega], [bandpoint.k_z])
    if modes.off_shell[0] > tol * max(1.0, modes.matrix_scale[0] * 1e-6):
        raise OffShellError(f"band point off shell by {modes.off_shell[0]:.3e}")
    return BlochFieldProfile(bandpoint, stack, modes, bool(modes.band_edge[0] or modes.degenerate[0]))


@dataclass
class FourierCoefficients:
    bandpoint: BandPoint
    M: int
    G: np.ndarray
    coefficients: np.ndarray
    longitudinal_residual: float
    parseval_residual: float
    components: dict
    gauge: complex = 1.0

    def reconstruct(self, z):
        """Sum the plane-wave series for every stored component at z (in the
        gauge of the coefficients; divide by ``gauge`` to compare with the
        profile's own field)."""
        z = np.asarray(z, dtype=float)
        phase = np.exp(1j * np.outer(z, self.bandpoint.k_z + self.G))
        return {k: phase @ v for k, v in self.components.items()}

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "G_invnm", "re_E", "im_E", "pol"])
            b = self.G[1] - self.G[0] if self.G.size > 1 else 0.0
            for g, c in zip(self.G, self.coefficients):
                w.writerow([int(round(g / b)) if b else 0, repr(float(g)), repr(float(c.real)),
                            repr(float(c.imag)), self.bandpoint.pol.name])


def fourier_coefficients(profile: BlochFieldProfile, M: int, parseval_tol: float = 1e-8) -> FourierCoefficients:
    """Plane-wave coefficients E(G), |G| <= M b_z, gauge fixed so the largest
    coefficient is real and positive."""
    if M < 1:
        raise ValueError("M must be >= 1")
    modes = profile.modes
    st = profile.stack
    m = np.arange(-M, M + 1)
    G = m * st.b_z
    K = profile.bandpoint.k_z + G
    kr = profile.bandpoint.k_rho
    if profile.bandpoint.pol == Polarization.TE:
        comps = {"y": modes.fourier("y", m)[0]}
        coeff = comps["y"]
        longitudinal = 0.0
    else:
        comps = {"x": modes.fourier("x", m)[0], "z": modes.fourier("z", m)[0]}
        kk = np.sqrt(kr ** 2 + K ** 2)
        coeff = (comps["x"] * K - comps["z"] * kr) / kk
        el = (comps["x"] * kr + comps["z"] * K) / kk
        total = np.sum(np.abs(coeff) ** 2) + np.sum(np.abs(el) ** 2)
        longitudinal = float(np.sum(np.abs(el) ** 2) / total) if total > 0 else 0.0
    big = np.argmax(np.abs(coeff))
    gauge = np.conj(coeff[big]) / abs(coeff[big]) if abs(coeff[big]) > 0 else 1.0
    coeff = coeff * gauge
    comps = {k: v * gauge for k, v in comps.items()}
    plain = float(modes.plain_norm()[0])
    summed = float(sum(np.sum(np.abs(v) ** 2) for v in comps.values()))
    residual = abs(plain - summed) / plain
    if residual > parseval_tol:
        warnings.warn(f"Parseval residual {residual:.2e} at M={M}", stacklevel=2)
    return FourierCoefficients(profile.bandpoint, M, G, coeff, longitudinal, residual, comps, complex(gauge))


def weighted_parseval(profile: BlochFieldProfile, M: int) -> float:
    """sum_G conj(E(G)) . (eps E)(G); tends to the cell norm 1/2 as M grows."""
    m = np.arange(-M, M + 1)
    tot = 0.0
    for comp in profile.modes.e_components:
        e = profile.modes.fourier(comp, m)[0]
        d = profile.modes.fourier(comp, m, weighted=True)[0]
        tot += np.real(np.sum(np.conj(e) * d))
    return float(tot)
