"""Truncated coupled system for the multiple-scattering coefficients A_n, A_n^H.

Unknowns are ordered ``[A_{-N} .. A_N, AH_{-N} .. AH_N]``.  With the local
field L_n = sum_m A_m I_{n-m} (and LH_n likewise for AH) the two row families are

    b^mu_n A_n + b^mu_n c_n L_n + AH_n + a^mu_n LH_n       = -b^mu_n c_n E^i_n
    -A_n - a^eps_n L_n + b^eps_n AH_n + b^eps_n c_n LH_n    =  a^eps_n E^i_n
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NoConvergenceError, SingularSystemError, TruncationError
from .isolated import isolated_coefficients
from .lattice import DEFAULT_ANOMALY_THRESHOLD, DEFAULT_TOL, lattice_sum_table
from .medium import derive_polarization_constants, derive_wavenumbers, incident_mode_amplitude

__all__ = [
    "LinearSystem",
    "CoefficientTable",
    "assemble_system",
    "build_system",
    "solve_direct",
    "solve_neumann",
    "solve_exact",
    "converged_truncation",
    "system_residual",
    "COND_LIMIT",
]

COND_LIMIT = 1e12


@dataclass(frozen=True)
class LinearSystem:
    N: int
    matrix: np.ndarray
    rhs: np.ndarray
    coeffs: object = field(repr=False, default=None)
    sums: object = field(repr=False, default=None)
    incident: np.ndarray = field(repr=False, default=None)


@dataclass
class CoefficientTable:
    """Solved coefficients for n in [-N, N]; arrays indexed by ``n + N``."""

    N: int
    A: np.ndarray
    AH: np.ndarray
    residual: float
    method: str
    neumann_iters: int = None
    condition: float = None

    @property
    def n(self):
        return np.arange(-self.N, self.N + 1)

    def get(self, n):
        """(A_n, AH_n); zero outside the truncation."""
        n = int(n)
        if abs(n) > self.N:
            return 0j, 0j
        return complex(self.A[n + self.N]), complex(self.AH[n + self.N])

    def restrict(self, N):
        """View limited to |n| <= N (metadata kept)."""
        sl = slice(self.N - N, self.N + N + 1)
        return CoefficientTable(N, self.A[sl].copy(), self.AH[sl].copy(), self.residual,
                                self.method, self.neumann_iters, self.condition)

    @property
    def vector(self):
        return np.concatenate([self.A, self.AH])


def _coupling(sums, N):
    n = np.arange(-N, N + 1)
    diff = n[:, None] - n[None, :]
    if np.abs(diff).max(initial=0) > sums.nmax:
        raise ValueError(f"lattice sums cover |n-m| <= {sums.nmax}, need {2 * N}")
    return sums[diff]


def assemble_system(coeffs, sums, incident, N):
    """Dense matrix and right-hand side of dimension 2(2N+1)."""
    if coeffs.N < N:
        raise ValueError(f"isolated coefficients cover |n| <= {coeffs.N}, need {N}")
    incident = np.asarray(incident, dtype=complex)
    if incident.shape != (2 * N + 1,):
        raise ValueError("incident amplitudes must cover n in [-N, N]")
    idx = np.arange(-N, N + 1) + coeffs.N
    c = coeffs.c[idx]
    a_e, a_m = coeffs.a_eps[idx], coeffs.a_mu[idx]
    b_e, b_m = coeffs.b_eps[idx], coeffs.b_mu[idx]
    I = _coupling(sums, N)
    eye = np.eye(2 * N + 1)

    top = np.hstack([b_m[:, None] * eye + (b_m * c)[:, None] * I, eye + a_m[:, None] * I])
    bottom = np.hstack([-eye - a_e[:, None] * I, b_e[:, None] * eye + (b_e * c)[:, None] * I])
    rhs = np.concatenate([-b_m * c * incident, a_e * incident])
    return LinearSystem(N, np.vstack([top, bottom]), rhs, coeffs, sums, incident)


def system_residual(system, x):
    """Largest componentwise backward error |Mx - b|_i / (|M||x| + |b|)_i."""
    M, b = system.matrix, system.rhs
    r = np.abs(M @ x - b)
    scale = np.abs(M) @ np.abs(x) + np.abs(b)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(scale > 0, r / scale, np.where(r > 0, np.inf, 0.0))
    return float(ratio.max(initial=0.0))


def _equilibrate(M):
    row = np.abs(M).max(axis=1)
    row[row == 0] = 1.0
    Ms = M / row[:, None]
    col = np.abs(Ms).max(axis=0)
    col[col == 0] = 1.0
    return Ms / col[None, :], row, col


def solve_direct(system, cond_limit=COND_LIMIT, refine=8):
    """LU with partial pivoting on the row/column-equilibrated matrix."""
    M = system.matrix
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("system matrix must be square")
    if not np.all(np.isfinite(M)):
        raise SingularSystemError("system matrix has non-finite entries")
    Ms, row, col = _equilibrate(M)
    with warnings.catch_warnings():
        # exact singularity is reported below as SingularSystemError
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(Ms, check_finite=False)
    if np.any(np.diag(lu) == 0):
        raise SingularSystemError("exactly singular system")
    anorm = np.abs(Ms).sum(axis=0).max()
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    cond = math.inf if rcond == 0 else 1.0 / rcond
    if cond > cond_limit:
        raise SingularSystemError(f"condition estimate {cond:.3g} exceeds {cond_limit:.3g}")
    def apply(v):
        return sla.lu_solve((lu, piv), v / row, check_finite=False) / col

    # high-order modes are many decades smaller than A_{+-1}; a few refinement
    # sweeps bring every row to a small componentwise backward error
    x = apply(system.rhs)
    err = system_residual(system, x)
    for _ in range(refine):
        if err <= 1e-14:
            break
        x_new = x - apply(M @ x - system.rhs)
        err_new = system_residual(system, x_new)
        if not err_new < err:
            break
        x, err = x_new, err_new
    N = system.N
    K = 2 * N + 1
    return CoefficientTable(N, x[:K], x[K:], err, "direct", condition=cond)


def _local_solve(coeffs, idx, incident, L, LH):
    """Per-mode 2x2 solve of the row pair with the coupling fields L, LH frozen."""
    c = coeffs.c[idx]
    a_e, a_m = coeffs.a_eps[idx], coeffs.a_mu[idx]
    b_e, b_m = coeffs.b_eps[idx], coeffs.b_mu[idx]
    f1 = -b_m * c * (incident + L) - a_m * LH
    f2 = a_e * (incident + L) - b_e * c * LH
    # [[b_m, 1], [-1, b_e]] @ [A, AH] = [f1, f2]
    det = b_m * b_e + 1
    return (b_e * f1 - f2) / det, (f1 + b_m * f2) / det


def solve_neumann(system, max_iters=500, tol=1e-13, growth_limit=1e6):
    """Fixed-point iteration of the coupled equations, started from the isolated response.

    Each sweep freezes the lattice couplings at the previous iterate.  ``tol``
    applies to the max-norm change relative to the max-norm of the iterate.
    """
    N = system.N
    coeffs, sums, incident = system.coeffs, system.sums, system.incident
    if coeffs is None or sums is None or incident is None:
        raise ValueError("Neumann iteration needs the tables the system was built from")
    idx = np.arange(-N, N + 1) + coeffs.N
    I = _coupling(sums, N)
    zero = np.zeros(2 * N + 1, dtype=complex)
    A, AH = _local_solve(coeffs, idx, incident, zero, zero)
    start_size = max(np.abs(A).max(), np.abs(AH).max())
    for it in range(1, max_iters + 1):
        A_new, AH_new = _local_solve(coeffs, idx, incident, I @ A, I @ AH)
        change = max(np.abs(A_new - A).max(), np.abs(AH_new - AH).max())
        size = max(np.abs(A_new).max(), np.abs(AH_new).max())
        A, AH = A_new, AH_new
        if not np.isfinite(change):
            raise NoConvergenceError("Neumann iterates became non-finite")
        if change <= tol * size or size == 0:
            x = np.concatenate([A, AH])
            return CoefficientTable(N, A, AH, system_residual(system, x), "neumann",
                                    neumann_iters=it)
        if size > growth_limit * start_size:
            raise NoConvergenceError(
                f"Neumann iterates grew by {size / start_size:.3g} after {it} iterations"
            )
    raise NoConvergenceError(f"Neumann iteration did not converge in {max_iters} iterations")


def build_system(cfg, N, tol=DEFAULT_TOL, threshold=DEFAULT_ANOMALY_THRESHOLD, sums=None):
    wn = derive_wavenumbers(cfg)
    pol = derive_polarization_constants(cfg, wn)
    coeffs = isolated_coefficients(cfg, wn, pol, N)
    if sums is None or sums.nmax < 2 * N:
        sums = lattice_sum_table(wn, 2 * N, tol=tol, threshold=threshold)
    incident = incident_mode_amplitude(cfg, wn, np.arange(-N, N + 1))
    return assemble_system(coeffs, sums, incident, N)


def solve_exact(cfg, N, method="direct", tol=DEFAULT_TOL, sums=None, **kw):
    """Build and solve the truncated system for one configuration."""
    system = build_system(cfg, N, tol=tol, sums=sums)
    if method == "direct":
        return solve_direct(system, **kw)
    if method == "neumann":
        return solve_neumann(system, **kw)
    raise ValueError(f"unknown method {method!r}")


def converged_truncation(cfg, base_N=4, tol=1e-12, N_max=32, method="direct", lattice_tol=DEFAULT_TOL):
    """Double N until the retained coefficients stop changing.

    Accepts when max_{|n|<=N} |x^(N) - x^(2N)| <= tol * max|x^(2N)| over both
    A and AH, and returns the 2N solution.
    """
    if base_N < 2:
        raise ValueError("base_N must be >= 2")
    if not tol > 0:
        raise TruncationError("truncation tolerance must be > 0")
    wn = derive_wavenumbers(cfg)
    N = base_N
    sums = None
    previous = solve_exact(cfg, N, method=method, tol=lattice_tol)
    while 2 * N <= N_max:
        if sums is None or sums.nmax < 4 * N:
            sums = lattice_sum_table(wn, 4 * N, tol=lattice_tol)
        current = solve_exact(cfg, 2 * N, method=method, tol=lattice_tol, sums=sums)
        kept = current.restrict(N)
        diff = max(np.abs(kept.A - previous.A).max(), np.abs(kept.AH - previous.AH).max())
        size = max(np.abs(current.A).max(), np.abs(current.AH).max())
        if diff <= tol * size or size == 0:
            return current
        previous, N = current, 2 * N
    raise TruncationError(f"coefficients not converged to {tol:g} by N = {N_max}")
