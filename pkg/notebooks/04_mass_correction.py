# %% [markdown]
# # Mass-correction coefficients
#
# The electromagnetic mass shift of an electron in the air layer is
# A + cos^2(theta) B, where theta is measured from the stacking axis. The
# vacuum value is subtracted mode by mode, so an empty lattice gives zero.

# %%
from pcmass import Constant, LayerStack, empty_lattice
from pcmass.mass import QuadratureConfig, RegularizationConfig, ab_coefficients

# %%
mc = ab_coefficients(empty_lattice(100.0))
print(f"vacuum: A = {mc.A:.1e} eV, B = {mc.B:.1e} eV")

# %% [markdown]
# Constant-index hosts. The anisotropy B is negative: the shift is smallest
# for motion along the stacking axis.

# %%
quick = QuadratureConfig(n_rho=6, n_z=6)
for n in (2.0, 3.0, 5.0, 7.0):
    mc = ab_coefficients(LayerStack(50.0, 50.0, Constant(n)), quick)
    print(f"n = {n}: A = {mc.A:+.5f} eV, B = {mc.B:+.5f} eV, bands = {mc.diagnostics['bands_included']}")

# %% [markdown]
# The two vacuum-subtraction schemes agree in vacuum and differ slightly for
# a structured host.

# %%
s = LayerStack(50.0, 50.0, Constant(3.0))
for scheme in ("mode", "freq"):
    mc = ab_coefficients(s, quick, RegularizationConfig(matching=scheme))
    print(scheme, mc.report())
