"""
pcmass: photonic-crystal corrections to the electron electromagnetic mass
and the resulting shifts of atomic ionization energies in 1D stacks.

    >>> from pcmass import LayerStack, Constant, ab_coefficients
    >>> mc = ab_coefficients(LayerStack(50.0, 50.0, Constant(3.0)))
    >>> mc.A, mc.B          # eV
"""

from .bands import (BandPoint, BandScan, BandSolverError, BandSurface, LayerStack, Polarization,
                    band_surface, dispersion_residual, empty_lattice, half_trace,
                    layer_axial_wavenumber, solve_bands)
from .dispersion import (AveragedIndex, Constant, DispersionModel, MetamaterialEffective,
                         SellmeierTail, Tabulated, average_index, fit_sellmeier_tail,
                         gold_hfo2_metamaterial, hfo2_like, load_dispersion_table,
                         refractive_index, write_dispersion_table)
from .fields import (BlochFieldProfile, FourierCoefficients, ModeSet, OffShellError,
                     TransferMatrix, fourier_coefficients, mode_profile,
                     unit_cell_transfer_matrix, weighted_parseval)
from .ionization import (IonizationResult, RateFactorInput, arrhenius_factor, delta_m_min,
                         ionization_correction_closed_form, ionization_correction_general,
                         pc_ionization_table, table_to_csv)
from .mass import (MassCorrection, QuadratureConfig, QuadratureError, RegularizationConfig,
                   TailEstimate, ab_coefficients, azimuthal_reduction_check, delta_m,
                   tail_estimate, vacuum_subtraction_term)
from .units import (ALKALI_IONIZATION, ALPHA, HBAR_C, K_B, AtomicState, AtomRecord, Direction,
                    DomainError, cos2_expectation, energy_to_wavenumber, load_atom_data,
                    vacuum_mass_correction, wavenumber_to_energy)

__version__ = "0.1.0"
