import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcmass import (BandScan, Constant, LayerStack, Polarization, band_surface, dispersion_residual,
                    empty_lattice, half_trace, layer_axial_wavenumber, solve_bands)
from pcmass.bands import BandSolverError
from pcmass.units import HBAR_C, DomainError

OMEGA_MAX = 10.65


def test_layer_axial_wavenumber_examples():
    assert layer_axial_wavenumber(1.0, 2.0, 0.0) == pytest.approx(2.0)
    assert layer_axial_wavenumber(1.0, 1.0, 1.0) == 0
    assert layer_axial_wavenumber(2.0, 1.0, 1.5) == pytest.approx(math.sqrt(1.75))
    assert layer_axial_wavenumber(1.0, 1.0, 1.5) == pytest.approx(1j * math.sqrt(1.25))


def test_empty_lattice_residual_zero_on_light_cone(vacuum_stack):
    kz = 0.4 * vacuum_stack.zone_edge
    assert dispersion_residual(vacuum_stack, Polarization.TE, kz * HBAR_C, 0.0, kz) == pytest.approx(0.0, abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.0, 0.1), st.floats(-0.03, 0.03))
def test_te_tm_coincide_for_unit_index(omega, k_rho, k_z):
    s = empty_lattice(100.0, 0.3)
    assert dispersion_residual(s, 1, omega, k_rho, k_z) == pytest.approx(
        dispersion_residual(s, 2, omega, k_rho, k_z), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 30.0), st.floats(0.0, 2.0), st.floats(0.0, 0.06), st.sampled_from([1, 2]))
def test_residual_even_and_finite(omega, k_rho, k_z, pol):
    s = LayerStack(37.0, 63.0, Constant(4.0))
    a = dispersion_residual(s, pol, omega, k_rho, k_z)
    b = dispersion_residual(s, pol, omega, k_rho, -k_z)
    assert math.isfinite(a)
    assert a == b


def test_residual_at_branch_point_is_finite():
    s = LayerStack(40.0, 60.0, Constant(3.0))
    omega = 5.0
    k_rho = 3.0 * omega / HBAR_C  # k_z^h = 0 exactly
    assert math.isfinite(dispersion_residual(s, Polarization.TM, omega, k_rho, 0.01))


def test_empty_lattice_folding(vacuum_stack):
    s = vacuum_stack
    kz = 0.3 * s.zone_edge
    b = s.b_z
    expected = np.array([kz, b - kz, b + kz]) * HBAR_C
    w_max = 0.5 * (b + kz + 2 * b - kz) * HBAR_C  # between third and fourth branch
    got = [p.omega for p in solve_bands(s, Polarization.TE, 0.0, kz, w_max)]
    assert np.allclose(got, expected, rtol=1e-12)
    assert [p.band for p in solve_bands(s, Polarization.TE, 0.0, kz, w_max)] == [1, 2, 3]


@pytest.mark.parametrize("k_rho,frac", [(0.0, 0.21), (0.02, 0.5), (0.035, 0.9), (0.01, 1.0)])
def test_empty_lattice_mode_count(vacuum_stack, k_rho, frac):
    s = vacuum_stack
    kz = frac * s.zone_edge
    kmax = OMEGA_MAX / HBAR_C
    m = np.arange(-50, 51)
    expected = int(np.sum(np.hypot(k_rho, kz + m * s.b_z) <= kmax))
    for pol in Polarization:
        assert len(solve_bands(s, pol, k_rho, kz, OMEGA_MAX)) == expected


def test_quarter_wave_gap_edges_by_dense_scan():
    # oracle: dense omega scan of |h| - 1 at the zone edge locates the gap
    s = LayerStack(100.0 / 6, 500.0 / 6, Constant(2.0))
    kz = s.zone_edge
    w = np.linspace(0.01, OMEGA_MAX, 200001)
    h = half_trace(s, Polarization.TE, w, 0.0)
    r = np.cos(kz * s.period) - h
    flips = np.nonzero(np.sign(r[:-1]) != np.sign(r[1:]))[0]
    roots = [p.omega for p in solve_bands(s, Polarization.TE, 0.0, kz, OMEGA_MAX)]
    assert len(roots) == len(flips)
    for i, root in zip(flips, roots):
        assert w[i] <= root <= w[i + 1]
    # inside the first gap h < -1, so the residual changes sign across each edge
    lo, hi = roots[0], roots[1]
    mid = 0.5 * (lo + hi)
    assert float(half_trace(s, Polarization.TE, np.array(mid), 0.0)) < -1.0
    inside = dispersion_residual(s, 1, mid, 0.0, kz)
    assert inside > 0
    assert dispersion_residual(s, 1, lo - 1e-3, 0.0, kz) < 0
    assert dispersion_residual(s, 1, hi + 1e-3, 0.0, kz) < 0


@pytest.mark.parametrize("n", [1.5, 3.0, 7.0])
@pytest.mark.parametrize("pol", list(Polarization))
def test_roots_are_roots(n, pol):
    s = LayerStack(50.0, 50.0, Constant(n))
    for k_rho in (0.0, 0.01, 0.04):
        for frac in (0.0, 0.33, 1.0):
            for p in solve_bands(s, pol, k_rho, frac * s.zone_edge, OMEGA_MAX):
                assert abs(dispersion_residual(s, pol, p.omega, k_rho, p.k_z)) < 1e-10
                assert 0 < p.omega <= OMEGA_MAX


def test_frequencies_strictly_increase_with_band(n3_stack):
    pts = solve_bands(n3_stack, Polarization.TM, 0.02, 0.5 * n3_stack.zone_edge, OMEGA_MAX)
    w = [p.omega for p in pts]
    assert all(a < b for a, b in zip(w, w[1:]))
    assert [p.band for p in pts] == list(range(1, len(pts) + 1))


def test_bracket_width(n3_stack):
    scan = BandScan(n3_stack, Polarization.TE, 0.01, OMEGA_MAX)
    w = scan.roots([0.3 * n3_stack.zone_edge])[0]
    w = w[np.isfinite(w)]
    # bisection stops at a few ulps, far below 1e-12 relative
    h = scan.h(w)
    assert np.all(np.abs(h - math.cos(0.3 * math.pi)) < 1e-10)


def test_evenness_of_band_surface(n3_stack):
    kz = np.array([-0.7, -0.2, 0.2, 0.7]) * n3_stack.zone_edge
    surf = band_surface(n3_stack, Polarization.TE, [0.0, 0.02], kz, OMEGA_MAX)
    table = {(p.k_rho, round(p.k_z, 15), p.band): p.omega for p in surf.points}
    for (kr, z, band), w in table.items():
        assert table[(kr, round(-z, 15), band)] == w


def test_surface_1x1_matches_solve_bands(n3_stack):
    kz = 0.4 * n3_stack.zone_edge
    surf = band_surface(n3_stack, Polarization.TM, [0.015], [kz], OMEGA_MAX)
    direct = solve_bands(n3_stack, Polarization.TM, 0.015, kz, OMEGA_MAX)
    assert surf.points == direct


def test_surface_threads_identical(n3_stack):
    kz = np.linspace(0, n3_stack.zone_edge, 5)
    a = band_surface(n3_stack, 1, [0.0, 0.01, 0.02, 0.03], kz, OMEGA_MAX, threads=1).to_csv()
    b = band_surface(n3_stack, 1, [0.0, 0.01, 0.02, 0.03], kz, OMEGA_MAX, threads=3).to_csv()
    assert a == b
    assert a.splitlines()[0] == "k_rho_invnm,k_z_invnm,pol,band,omega_eV"


def test_band_count_grows_with_index():
    counts = []
    for n in (1.0, 2.0, 3.0, 5.0, 7.0):
        s = LayerStack(50.0, 50.0, Constant(n))
        counts.append(sum(len(solve_bands(s, Polarization.TM, 0.0, f * s.zone_edge, OMEGA_MAX))
                          for f in np.linspace(0.05, 0.95, 10)))
    assert counts == sorted(counts)
    # roughly linear in the optical path per period, (n d_h + d_l) / period
    ratios = [c / (0.5 * (n + 1)) for c, n in zip(counts, (1.0, 2.0, 3.0, 5.0, 7.0))]
    assert max(ratios) / min(ratios) < 1.5


def test_continuity_to_empty_lattice():
    eps = 1e-4
    s0 = empty_lattice(100.0)
    s1 = LayerStack(50.0, 50.0, Constant(1.0 + eps))
    kz = 0.3 * s0.zone_edge
    a = [p.omega for p in solve_bands(s0, 2, 0.01, kz, OMEGA_MAX)]
    b = [p.omega for p in solve_bands(s1, 2, 0.01, kz, OMEGA_MAX)]
    assert len(a) == len(b)
    assert np.max(np.abs(np.array(a) - np.array(b)) / np.array(a)) < 1e-3


def test_gamma_point_skips_zero_frequency_band(n3_stack):
    pts = solve_bands(n3_stack, 1, 0.0, 0.0, OMEGA_MAX)
    assert pts[0].band == 2


def test_domain_errors(n3_stack):
    with pytest.raises(DomainError):
        solve_bands(n3_stack, 1, 0.0, 2 * n3_stack.zone_edge, OMEGA_MAX)
    with pytest.raises(DomainError):
        LayerStack(0.0, 10.0, Constant(2.0))
    with pytest.raises(DomainError):
        dispersion_residual(n3_stack, 1, 0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        band_surface(n3_stack, 1, [], [0.0], OMEGA_MAX)


def test_unstable_band_count_raises(n3_stack):
    # a step far too coarse with no retries left cannot stabilise
    with pytest.raises(BandSolverError):
        BandScan(n3_stack, 1, 0.0, 200.0, step=100.0, max_retries=0)
