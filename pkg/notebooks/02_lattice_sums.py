# %% [markdown]
# # Lattice sums along the grating
#
# I_n collects the field every other cylinder sends to the reference one.
# The defining series converges slowly and only conditionally; the summation
# pairs direct terms with an exact treatment of the asymptotic Hankel tail.

# %%
import math

from cylgrating.lattice import lattice_sum_table, leading_h, verify_leading_order
from cylgrating.medium import GratingConfig, anomaly_margin, derive_wavenumbers


def grating(krd, psi_deg):
    d = krd / (2 * math.pi)
    return GratingConfig(lambda0=1.0, theta_i=math.pi / 2, phi_i=math.radians(psi_deg - 180),
                         eps_r=2.25, a=0.1 * d, d=d)


wn = derive_wavenumbers(grating(1.0, 200.0))
table = lattice_sum_table(wn, 4, tol=1e-12)
for n in table.n:
    print(f"I_{n:+d} = {table[n]:.10f}   terms {table.terms_used[n + 4]}")

# %% [markdown]
# For closely spaced cylinders the sums blow up like powers of 1/(k_r d),
# with coefficients h_n.  The n = 0 sum carries a logarithmic correction, so
# its ratio approaches 1 slowly.

# %%
for krd in (0.2, 0.1, 0.05, 0.02):
    wn = derive_wavenumbers(grating(krd, 180.0))
    row = [abs(verify_leading_order(wn, n, tol=1e-12).deviation) for n in (0, 2, 4)]
    print(f"k_r d={krd:5.2f}  |ratio-1| n=0 {row[0]:.4f}  n=2 {row[1]:.4f}  n=4 {row[2]:.2e}")
print("h_2 =", leading_h(2, wn))

# %% [markdown]
# Close to a diffraction-order threshold the tail no longer converges
# usefully, so such configurations are refused.

# %%
try:
    grating(2 * math.pi * 0.9995, 180.0)
except Exception as exc:
    print(type(exc).__name__, exc)
print("margin at k_r d = 6:", anomaly_margin(grating(6.0, 180.0)))
