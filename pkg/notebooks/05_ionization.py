# %% [markdown]
# # Ionization energies in the stack
#
# For an s electron the shift of the ionization energy is
# min(0, B) - B/3, so (2/3) B when B < 0. The same number follows directly
# from the anisotropic band integral.

# %%
from pcmass import Constant, LayerStack
from pcmass.ionization import (RateFactorInput, arrhenius_factor, ionization_correction_closed_form,
                               ionization_correction_general, pc_ionization_table, table_to_csv)
from pcmass.mass import QuadratureConfig, ab_coefficients
from pcmass.units import ALKALI_IONIZATION

# %%
s = LayerStack(50.0, 50.0, Constant(7.0))
mc = ab_coefficients(s, QuadratureConfig(n_rho=6, n_z=6))
print(ionization_correction_general(mc))
print(ionization_correction_closed_form(s, mc=mc))

# %% [markdown]
# Shifted ionization table for shifts of -1.82 and -2.64 eV, and the Arrhenius
# factor a shift of the activation energy would imply at room temperature.

# %%
for delta in (-1.82, -2.64):
    print(table_to_csv(pc_ionization_table(ALKALI_IONIZATION, delta), digits=2))
    print("log10 rate factor at 300 K:", round(arrhenius_factor(RateFactorInput(delta, 300.0)).log10, 2))
