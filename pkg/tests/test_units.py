import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from pcmass.units import (ALKALI_IONIZATION, ALPHA, HBAR_C, AtomicState, AtomRecord, Direction,
                          DomainError, atoms_by_symbol, cos2_expectation, energy_to_wavenumber,
                          load_atom_data, vacuum_mass_correction, wavenumber_to_energy)


def test_energy_wavenumber_examples():
    assert energy_to_wavenumber(HBAR_C) == pytest.approx(1.0, rel=1e-15)
    assert energy_to_wavenumber(0.0) == 0.0
    arr = energy_to_wavenumber(np.array([1.0, 2.0]))
    assert arr.shape == (2,)


@given(st.floats(min_value=0.0, max_value=1e6, allow_nan=False))
def test_conversion_round_trip(e):
    back = wavenumber_to_energy(energy_to_wavenumber(e))
    assert back == pytest.approx(e, rel=1e-12, abs=1e-300)


def test_negative_energy_rejected():
    with pytest.raises(DomainError):
        energy_to_wavenumber(-1.0)
    with pytest.raises(DomainError):
        wavenumber_to_energy(np.array([0.1, -0.1]))


def test_vacuum_mass_correction():
    assert vacuum_mass_correction(10.65) == pytest.approx(4 * ALPHA * 10.65 / (3 * math.pi), rel=1e-14)
    assert vacuum_mass_correction(0.0) == 0.0
    with pytest.raises(DomainError):
        vacuum_mass_correction(-1.0)


def _cos2_by_quadrature(l, m):
    # independent oracle: integrate cos^2(theta) |Y_lm|^2 over the sphere
    def f(theta):
        y = special.sph_harm_y(l, m, theta, 0.0)
        return math.cos(theta) ** 2 * abs(y) ** 2 * math.sin(theta) * 2 * math.pi

    val, _ = integrate.quad(f, 0.0, math.pi, epsabs=1e-13, epsrel=1e-13)
    return val


@pytest.mark.parametrize("l,m", [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 0), (3, 2), (4, 4)])
def test_cos2_closed_form_matches_quadrature(l, m):
    assert cos2_expectation(AtomicState(l, m)) == pytest.approx(_cos2_by_quadrature(l, m), abs=1e-12)


def test_cos2_s_state_is_one_third():
    assert cos2_expectation(AtomicState(0, 0)) == pytest.approx(1 / 3, abs=1e-15)


@given(st.integers(min_value=0, max_value=12).flatmap(
    lambda l: st.tuples(st.just(l), st.integers(min_value=-l, max_value=l))))
def test_cos2_bounds_and_m_symmetry(lm):
    l, m = lm
    c = cos2_expectation(AtomicState(l, m))
    assert 0.0 <= c <= 1.0
    assert c == pytest.approx(cos2_expectation(AtomicState(l, -m)), abs=1e-15)


def test_cos2_sums_to_one_third_over_m():
    # unsold: averaging over m gives the isotropic value
    for l in range(6):
        avg = np.mean([cos2_expectation(AtomicState(l, m)) for m in range(-l, l + 1)])
        assert avg == pytest.approx(1 / 3, abs=1e-14)


def test_invalid_state_and_direction():
    with pytest.raises(DomainError):
        AtomicState(1, 2)
    with pytest.raises(DomainError):
        AtomicState(-1, 0)
    with pytest.raises(DomainError):
        Direction(4.0)
    with pytest.raises(DomainError):
        AtomRecord("X", 0.0)


def test_alkali_table_values():
    table = {a.symbol: a.ionization_energy_vacuum for a in ALKALI_IONIZATION}
    assert table == {"H": 13.60, "Li": 5.39, "Na": 5.14, "K": 4.34, "Rb": 4.18, "Cs": 3.90, "Fr": 4.07}
    assert [a.symbol for a in atoms_by_symbol(["Cs", "H"])] == ["Cs", "H"]
    with pytest.raises(KeyError):
        atoms_by_symbol(["Xx"])


def test_load_atom_data(tmp_path):
    p = tmp_path / "atoms.csv"
    p.write_text("symbol,ionization_eV\nH,13.6\nLi,5.39\n")
    recs = load_atom_data(p)
    assert [(r.symbol, r.ionization_energy_vacuum) for r in recs] == [("H", 13.6), ("Li", 5.39)]
    p.write_text("symbol,ionization_eV\nH,13.6\nLi,abc\n")
    with pytest.raises(ValueError, match=":3:"):
        load_atom_data(p)
    p.write_text("name,value\nH,13.6\n")
    with pytest.raises(ValueError, match="header"):
        load_atom_data(p)
