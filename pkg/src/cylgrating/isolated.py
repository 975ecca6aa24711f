"""Scattering constants of a single dielectric cylinder at oblique incidence.

``c_n`` is the ratio J_n/H_n of the exterior argument; ``a_n^zeta`` and
``b_n^zeta`` (zeta in {eps, mu}) couple the axial E and H modal amplitudes.
Both quotients are evaluated after dividing numerator and denominator
by H_n(k_r a), which keeps them finite when H_n overflows for high orders.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ResonanceError
from .special import bessel_deriv, bessel_j, hankel1

__all__ = [
    "IsolatedCoefficients",
    "compute_cn",
    "compute_an",
    "compute_bn",
    "isolated_coefficients",
]


@dataclass(frozen=True)
class IsolatedCoefficients:
    """Arrays indexed by ``n + N`` for n in [-N, N]."""

    N: int
    c: np.ndarray
    a_eps: np.ndarray
    a_mu: np.ndarray
    b_eps: np.ndarray
    b_mu: np.ndarray

    @property
    def n(self):
        return np.arange(-self.N, self.N + 1)

    def index(self, n):
        n = np.asarray(n)
        if np.any(np.abs(n) > self.N):
            raise IndexError(f"mode index outside [-{self.N}, {self.N}]")
        return n + self.N


def _zeta_r(cfg, zeta):
    if zeta == "eps":
        return cfg.eps_r
    if zeta == "mu":
        return cfg.mu_r
    raise ValueError(f"zeta must be 'eps' or 'mu', got {zeta!r}")


def _impedance_prefactor(pol, zeta):
    # sqrt(eps0 mu0 / zeta0^2): eta0 for zeta = eps, xi0 for zeta = mu
    return pol.eta0 if zeta == "eps" else pol.xi0


def compute_cn(wn, a, n):
    """c_n = J_n(k_r a) / H_n^{(1)}(k_r a)."""
    x = wn.kr * a
    return bessel_j(n, x) / hankel1(n, x)


def _quotients(wn, cfg, n, zeta):
    """(numerator, denominator, J_n(k1 a)) of the shared quotient, scaled by 1/H_n(k_r a)."""
    n = np.asarray(n)
    x = wn.kr * cfg.a
    x1 = wn.k1 * cfg.a
    t = _zeta_r(cfg, zeta) * wn.ratio
    H = hankel1(n, x)
    J1 = bessel_j(n, x1)
    Jp1 = bessel_deriv("J", n, x1)
    num = J1 * bessel_deriv("J", n, x) / H - t * (bessel_j(n, x) / H) * Jp1
    den = J1 * bessel_deriv("H1", n, x) / H - t * Jp1
    scale = np.abs(J1 * bessel_deriv("H1", n, x) / H) + np.abs(t * Jp1)
    if np.any(np.abs(den) <= 1e-300 + 1e-15 * scale):
        raise ResonanceError(f"vanishing isolated-cylinder denominator (zeta={zeta})")
    return num, den, J1


def compute_an(wn, cfg, n, zeta):
    """a_n^zeta for zeta in {'eps', 'mu'}."""
    num, den, _ = _quotients(wn, cfg, n, zeta)
    return num / den


def compute_bn(wn, cfg, pol, n, zeta):
    """b_n^zeta; odd in n and proportional to the cross-polarization constant F."""
    n = np.asarray(n)
    _, den, J1 = _quotients(wn, cfg, n, zeta)
    x = wn.kr * cfg.a
    return _impedance_prefactor(pol, zeta) * (J1 / den) * (1j * n * pol.F / x)


def isolated_coefficients(cfg, wn, pol, N):
    """Tabulate c_n, a_n^eps, a_n^mu, b_n^eps, b_n^mu for n in [-N, N]."""
    n = np.arange(-N, N + 1)
    num_e, den_e, J1 = _quotients(wn, cfg, n, "eps")
    num_m, den_m, _ = _quotients(wn, cfg, n, "mu")
    x = wn.kr * cfg.a
    odd = 1j * n * pol.F / x
    return IsolatedCoefficients(
        N=N,
        c=compute_cn(wn, cfg.a, n),
        a_eps=num_e / den_e,
        a_mu=num_m / den_m,
        b_eps=pol.eta0 * (J1 / den_e) * odd,
        b_mu=pol.xi0 * (J1 / den_m) * odd,
    )
