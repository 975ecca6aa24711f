# %% [markdown]
# # Cylinder functions
#
# The scattering coefficients are ratios of Bessel and Hankel functions of
# k_r a and k_1 a.  The package wraps scipy's AMOS-backed routines, adds the
# negative-order reflection, and builds whole order tables by recurrence for
# the field evaluator.

# %%
import numpy as np

from cylgrating.special import bessel_deriv, bessel_j, bessel_jy_table, bessel_y, hankel1

x = np.geomspace(0.1, 50, 7)
for n in (0, 3, 10):
    w = bessel_j(n, x) * bessel_deriv("H1", n, x).imag - bessel_deriv("J", n, x) * bessel_y(n, x)
    print(f"n={n:2d}  max |W pi x / 2 - 1| = {np.max(np.abs(w * np.pi * x / 2 - 1)):.1e}")

# %% [markdown]
# Negative orders follow Z_{-n} = (-1)^n Z_n.

# %%
print(hankel1(-3, 2.0), -hankel1(3, 2.0))

# %% [markdown]
# The table routine runs Miller's backward recurrence for J and forward
# recurrence for Y, which is what the field sums need for many points at once.

# %%
J, Y = bessel_jy_table(20, x)
print(np.max(np.abs(J[20] - bessel_j(20, x)) / np.abs(bessel_j(20, x))))
