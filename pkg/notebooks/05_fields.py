# %% [markdown]
# # Fields near a cylinder
#
# E_z and H_z are rebuilt from the coefficients around any cylinder of the
# grating, valid between its surface and the distance to its neighbours.
# The corners of this grid sit at 0.85 d; there the mode count is capped by
# what double precision can hold, and the reported truncation estimate says
# how much accuracy that costs.

# %%
import math

import numpy as np

from cylgrating.fields import eval_exterior_fields
from cylgrating.medium import GratingConfig, derive_wavenumbers
from cylgrating.solver import solve_exact

cfg = GratingConfig.from_dimensionless(0.1, 0.1, math.radians(60), math.radians(30), 2.25)
wn = derive_wavenumbers(cfg)
table = solve_exact(cfg, 8)
xs = np.linspace(-0.6, 0.6, 7) * cfg.d
X, Y = np.meshgrid(xs, xs)
keep = np.hypot(X, Y) > cfg.a
grid = eval_exterior_fields(cfg, wn, table, None, X[keep], Y[keep])
print("n_field:", grid.n_field, " truncation estimate:", f"{grid.truncation_estimate:.1e}")
print("max |Ez| =", np.abs(grid.Ez).max(), " max |Hz| =", np.abs(grid.Hz).max())

# %% [markdown]
# The same physical point seen from two neighbouring cylinders.

# %%
x, y = np.array([0.3 * cfg.d]), np.array([0.5 * cfg.d])
a = eval_exterior_fields(cfg, wn, table, None, x, y)
b = eval_exterior_fields(cfg, wn, table, None, x, y - cfg.d, s=1)
print(a.Ez, b.Ez)
