"""Exterior axial fields E_z, H_z around one cylinder of the grating.

About cylinder ``s`` the field is a sum of regular waves J_n (incident wave
plus the lattice-summed radiation of every other cylinder) and outgoing waves
H_n from cylinder ``s`` itself.  The re-expansion of the other cylinders
converges for R_s < d, so points must satisfy a < R_s < d.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .lattice import lattice_sum_table
from .medium import derive_wavenumbers, incident_mode_amplitude
from .special import bessel_jy_table

__all__ = ["FieldGrid", "eval_exterior_fields", "default_field_order", "local_coordinates", "max_sum_order"]


@dataclass
class FieldGrid:
    s: int
    x: np.ndarray
    y: np.ndarray
    R: np.ndarray
    phi: np.ndarray
    z: float
    Ez: np.ndarray
    Hz: np.ndarray
    N: int
    n_field: int
    truncation_estimate: float = 0.0


def local_coordinates(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.hypot(x, y), np.arctan2(y, x)


def max_sum_order(krd, limit=650.0):
    """Largest n for which |Y_n(k_r d)| ~ (n-1)! (2/k_r d)^n / pi stays well inside double range."""
    n = 1
    while math.lgamma(n + 1) + (n + 1) * math.log(2 / krd) - math.log(math.pi) < limit:
        n += 1
    return n


def default_field_order(wn, R_max, coupled=True, rtol=1e-12):
    """ceil(k_r R_max) + 15, extended so that (R_max/d)^n < rtol when coupling is present."""
    n = math.ceil(wn.kr * R_max) + 15
    if coupled:
        n += math.ceil(math.log(rtol) / math.log(R_max / wn.d))
    return n


def eval_exterior_fields(cfg, wn, table, sums, x, y, s=0, z=0.0, n_field=None):
    """E_z and H_z at local Cartesian points (x, y) measured from the centre of cylinder ``s``.

    ``table`` is a solved CoefficientTable.  ``wn`` and ``sums`` may be None;
    lattice sums are (re)computed when they do not reach order n_field + N.
    """
    wn = derive_wavenumbers(cfg) if wn is None else wn
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    R, phi = local_coordinates(x, y)
    if np.any(R <= cfg.a):
        raise DomainError(f"field points must lie outside the cylinder (R_s > a = {cfg.a:.6g})")
    coupled = bool(np.any(table.A) or np.any(table.AH))
    if coupled and np.any(R >= cfg.d):
        raise DomainError(f"the local expansion needs R_s < d = {cfg.d:.6g}")
    N = table.N
    cap = max_sum_order(wn.krd) - N if coupled else math.inf
    if n_field is None:
        # points close to R_s = d need orders whose Hankel values overflow;
        # cap the order and report the remaining truncation level instead
        n_field = min(default_field_order(wn, R.max(), coupled), cap)
    elif n_field > cap:
        raise NumericalError(f"n_field = {n_field} exceeds the representable order {cap} at this spacing")
    n_field = max(int(n_field), N)
    trunc = (R.max() / cfg.d) ** n_field if coupled else 0.0

    n = np.arange(-n_field, n_field + 1)
    m = np.arange(-N, N + 1)
    if coupled:
        if sums is None or sums.nmax < n_field + N:
            sums = lattice_sum_table(wn, n_field + N)
        I = sums[n[:, None] - m[None, :]]
        local = I @ table.A
        local_h = I @ table.AH
    else:
        local = local_h = np.zeros(n.size, dtype=complex)
    regular = incident_mode_amplitude(cfg, wn, n) + local

    flat = R.ravel() * wn.kr
    J, Y = bessel_jy_table(n_field, flat)
    Jn = J[np.abs(n)] * np.where((n < 0) & (n % 2 == 1), -1.0, 1.0)[:, None]
    sign_m = np.where((m < 0) & (m % 2 == 1), -1.0, 1.0)[:, None]
    Hm = (J[np.abs(m)] + 1j * Y[np.abs(m)]) * sign_m
    if not (np.all(np.isfinite(Hm)) and np.all(np.isfinite(regular))):
        raise NumericalError("non-finite modal values; reduce n_field or move points outward")

    ang_n = np.exp(1j * np.outer(n, phi.ravel() + math.pi / 2))
    ang_m = ang_n[n_field - N : n_field + N + 1]
    phase = np.exp(1j * wn.kr * s * wn.d * math.sin(wn.psi_i)) * np.exp(-1j * wn.kz * z)

    Ez = phase * ((regular[:, None] * Jn * ang_n).sum(0) + (table.A[:, None] * Hm * ang_m).sum(0))
    Hz = phase * ((local_h[:, None] * Jn * ang_n).sum(0) + (table.AH[:, None] * Hm * ang_m).sum(0))
    return FieldGrid(s=s, x=x, y=y, R=R, phi=phi, z=z, Ez=Ez.reshape(R.shape),
                     Hz=Hz.reshape(R.shape), N=N, n_field=n_field, truncation_estimate=trunc)
