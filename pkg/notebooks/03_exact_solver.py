# %% [markdown]
# # Coupled scattering coefficients
#
# The truncated system couples each mode of the reference cylinder to every
# mode of the others through the lattice sums.  At oblique incidence the
# electric and magnetic coefficients mix.

# %%
import math

import numpy as np

from cylgrating.errors import NoConvergenceError
from cylgrating.medium import GratingConfig
from cylgrating.solver import build_system, converged_truncation, solve_direct, solve_neumann

cfg = GratingConfig.from_dimensionless(0.01, 0.1, math.radians(60), math.radians(30), 2.25)
table = converged_truncation(cfg, tol=1e-12)
print("converged N:", table.N, " residual:", f"{table.residual:.1e}")
for n in range(-3, 4):
    A, AH = table.get(n)
    print(f"n={n:+d}  A={A:.6e}  AH={AH:.6e}")

# %% [markdown]
# The fixed-point iteration (isolated response plus successive rescattering)
# gives the same answer for small, well separated cylinders.

# %%
system = build_system(cfg, 8)
direct, neumann = solve_direct(system), solve_neumann(system)
print("iterations:", neumann.neumann_iters,
      " max difference:", np.abs(direct.vector - neumann.vector).max())

# %% [markdown]
# With large cylinders close to a Rayleigh condition the iteration grows
# instead, while the direct solve is unaffected.

# %%
big = GratingConfig.from_dimensionless(4.105 * 0.45, 0.45, math.radians(60), math.radians(30), 2.25)
system = build_system(big, 6)
try:
    solve_neumann(system)
except NoConvergenceError as exc:
    print("Neumann:", exc)
print("direct condition estimate:", f"{solve_direct(system).condition:.2e}")
