# %% [markdown]
# # Bloch bands of a 1D stack
#
# Bands are the roots of cos(k_z period) = h(omega) at fixed in-plane
# wavenumber k_rho. The solver scans h(omega) for monotone pieces and
# bisects each one.

# %%
import numpy as np

from pcmass import Constant, LayerStack, Polarization, band_surface, empty_lattice, solve_bands

# %% [markdown]
# In vacuum the bands are the folded light line |k_z + m b_z| c.

# %%
vac = empty_lattice(100.0)
kz = 0.3 * vac.zone_edge
print([round(p.omega, 4) for p in solve_bands(vac, Polarization.TE, 0.0, kz, 10.65)])
print([round(abs(kz + m * vac.b_z) * 197.3269804, 4) for m in (0, -1, 1)])

# %% [markdown]
# A high-index layer pulls many more bands under the same cutoff, and opens
# gaps at the zone edge.

# %%
for n in (1.0, 3.0, 7.0, 15.0):
    s = LayerStack(50.0, 50.0, Constant(n))
    te = solve_bands(s, Polarization.TE, 0.0, 0.5 * s.zone_edge, 10.65)
    print(f"n = {n:4.1f}: {len(te)} TE bands below 10.65 eV at k_z = pi/(2 period)")

# %%
s = LayerStack(50.0, 50.0, Constant(3.0))
surf = band_surface(s, Polarization.TM, [0.0, 0.02], np.linspace(0, s.zone_edge, 5), 10.65)
print(surf.to_csv()[:400])
