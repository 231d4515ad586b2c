# %% [markdown]
# # Bloch field profiles and plane-wave coefficients
#
# Each solved band point gets a field profile normalised so that the cell
# average of eps |E|^2 is 1/2, and plane-wave coefficients E(G).

# %%
import numpy as np

from pcmass import Constant, LayerStack, Polarization, solve_bands
from pcmass.fields import fourier_coefficients, mode_profile, weighted_parseval

# %%
s = LayerStack(50.0, 50.0, Constant(3.0))
bp = solve_bands(s, Polarization.TE, 0.01, 0.37 * s.zone_edge, 10.65)[2]
prof = mode_profile(s, bp)
print(bp)
print("normalisation", prof.normalization, "interface mismatch", prof.interface_mismatch())

# %% [markdown]
# Plane-wave content: TE fields are smooth, so the coefficients decay fast
# and Parseval closes to round-off at M = 64.

# %%
fc = fourier_coefficients(prof, 64)
power = np.abs(fc.coefficients) ** 2
top = np.argsort(power)[::-1][:5]
for i in top:
    print(f"G/b_z = {int(round(fc.G[i] / s.b_z)):+d}   |E(G)|^2 = {power[i]:.4e}")
print("Parseval residual", fc.parseval_residual)

# %% [markdown]
# With the eps weight, the product eps E jumps at the interfaces and the
# truncated sum converges only algebraically.

# %%
for M in (16, 32, 64, 128):
    print(M, abs(weighted_parseval(prof, M) - 0.5))
