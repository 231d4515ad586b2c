# %% [markdown]
# # Host dispersion models
#
# The high-index layer of the stack can be a constant index, a Sellmeier
# tail, a tabulated curve, or the effective index of a gold nanoparticle
# superlattice, n_eff = sqrt((a/g) eps_d). Above the table the index is
# blended smoothly to 1 so the band sum stays finite.

# %%
import numpy as np

from pcmass.dispersion import average_index, fit_sellmeier_tail, gold_hfo2_metamaterial, hfo2_like

# %%
diel = hfo2_like()
w = np.linspace(0.5, 14.0, 12)
print("omega    n_HfO2-like")
for wi, ni in zip(w, diel.index(w)):
    print(f"{wi:6.2f}  {ni:6.3f}")

# %% [markdown]
# Two superlattices with a = 30 nm: g = 0.7 nm and g = 0.5 nm. Their averaged
# indices over the band window come out near 15 and 18.

# %%
for g in (0.7, 0.5):
    meta = gold_hfo2_metamaterial(g, 30.0)
    avg = average_index(meta, 0.5, 10.65)
    print(f"g = {g} nm: n(1 eV) = {float(meta.index(1.0)):.2f}, averaged n = {avg.n_bar:.2f}")

# %% [markdown]
# A Sellmeier fit to the blended region gives the C1 coefficient used by the
# high-frequency tail estimate.

# %%
tail = fit_sellmeier_tail(gold_hfo2_metamaterial(0.7), 20.0, 80.0)
print(f"C1 = {tail.C1:.3g} eV^2, C2 = {tail.C2:.3g} eV^4")
