# %% [markdown]
# # Long-wavelength closed forms
#
# For thin, closely spaced cylinders the coefficients have closed forms in
# powers of a/d.  This compares them with the full solution.

# %%
import math

import numpy as np

from cylgrating.asymptotic import asymptotic_table, fit_power, omega_expansion_check
from cylgrating.medium import GratingConfig
from cylgrating.solver import solve_exact


def cfg(kra, ratio, theta=60.0):
    return GratingConfig.from_dimensionless(kra, ratio, math.radians(theta), math.radians(30), 2.25)


kra = np.geomspace(1e-3, 1e-2, 5)
tables = [solve_exact(cfg(k, 0.05), 6) for k in kra]
for n in range(4):
    print(f"|A_{n}| slope in k_r a: {fit_power(kra, [abs(t.get(n)[0]) for t in tables]):.3f}")

# %% [markdown]
# Remainder of the a/d series at fixed k_r d = 0.1.  The zeroth-order
# truncation behaves as (a/d)^2.  The fourth-order truncation stalls at the
# same rate: the residual is dominated by finite k_r d coupling terms that
# the pure a/d series does not contain.

# %%
ratios = [0.025, 0.05, 0.1]
exact = [solve_exact(cfg(0.1 * r, r), 8) for r in ratios]
for order in (0, 4):
    asym = [asymptotic_table(cfg(0.1 * r, r), order=order) for r in ratios]
    rep = omega_expansion_check(exact, asym, ratios, 1)
    print(f"order {order}: errors {np.array2string(rep.errors, formatter={'float': '{:.2e}'.format})}  q = {rep.exponent:.3f}")

# %% [markdown]
# Shrinking k_r d confirms that reading: the error drops in proportion.

# %%
for krd in (0.1, 0.01, 0.001):
    c = cfg(krd * 0.05, 0.05)
    A = solve_exact(c, 6).get(1)[0]
    B = asymptotic_table(c).reconstructed(1)[0]
    print(f"k_r d={krd:6.3f}  rel. error {abs(A - B) / abs(A):.2e}")
