"""Long-wavelength closed forms for the multiple-scattering coefficients.

Every coefficient is written as A_n = A_{n,0} (k_r a)^{e_n} with e_0 = 2,
e_{+-1} = 2, e_{+-2} = 4, e_{+-3} = 4, and A_{n,0} is a short series in
(a/d)^2 whose coefficients involve the leading lattice-sum constants h_n.
The truncation ``order`` (0, 2 or 4) is the highest power of a/d kept.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import leading_h
from .medium import derive_polarization_constants, derive_wavenumbers

__all__ = [
    "SMatrix",
    "s_matrix",
    "asymptotic_order0",
    "asymptotic_order1",
    "asymptotic_order2",
    "asymptotic_order3",
    "AsymptoticTable",
    "asymptotic_table",
    "scaling_exponent",
    "OmegaReport",
    "omega_expansion_check",
    "fit_power",
    "ORDERS",
]

ORDERS = (0, 2, 4)


def _check_order(order):
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")


def _check_sign(sign):
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")


@dataclass(frozen=True)
class SMatrix:
    """2x2 block S_{+-n}; ``entries`` exclude the (k_r a)^{2n} factor held in ``scale``."""

    n: int
    sign: int
    entries: np.ndarray
    scale: float

    @property
    def scaled(self):
        return self.entries * self.scale

    def det(self):
        return np.linalg.det(self.entries)


def s_matrix(n, sign, pol, wn, a=None):
    n = int(n)
    if n < 1:
        raise ValueError("S_n is defined for n >= 1")
    _check_sign(sign)
    a = wn.a if a is None else a
    g = 1j * n * math.pi / (2**n * math.factorial(n)) ** 2
    xi = pol.s_xi_plus if sign > 0 else pol.s_xi_minus
    eta = pol.s_eta_plus if sign > 0 else pol.s_eta_minus
    entries = g / pol.D * np.array([[pol.s_em, xi], [eta, pol.s_me]], dtype=complex)
    return SMatrix(n, sign, entries, (wn.kr * a) ** (2 * n))


def _prep(cfg, pol, wn):
    wn = derive_wavenumbers(cfg) if wn is None else wn
    pol = derive_polarization_constants(cfg, wn) if pol is None else pol
    return pol, wn


def asymptotic_order0(cfg, pol=None):
    """(A_{0,0}, A^H_{0,0}); the magnetic part vanishes identically."""
    pol, _ = _prep(cfg, pol, None)
    return math.sin(cfg.theta_i) * pol.s0_em * cfg.E0, 0j


def _common(cfg, pol, wn):
    q = wn.ratio**2
    s = pol.s_em
    cross = s * s - 4 * pol.F**2
    c4 = 1j * math.pi / (4 * pol.D)
    # sin(theta_i) E0 is the incident modal amplitude scale
    return q, s, cross, c4, math.sin(cfg.theta_i) * cfg.E0


def asymptotic_order1(cfg, pol=None, wn=None, sign=1, order=4):
    """(A_{+-1,0}, A^H_{+-1,0}) through (a/d)^order."""
    _check_sign(sign)
    _check_order(order)
    pol, wn = _prep(cfg, pol, wn)
    q, s, cross, c4, amp = _common(cfg, pol, wn)
    er, mr = cfg.eps_r, cfg.mu_r
    r = wn.xi
    psi = wn.psi_i
    down, up = np.exp(-1j * sign * psi), np.exp(1j * sign * psi)
    h2 = leading_h(2, wn)

    e_terms = [s * down]
    m_terms = [down]
    if order >= 2:
        e_terms.append(r**2 * h2 * cross * c4 * up)
        m_terms.append(r**2 * h2 * 2 * (mr - er) * q * c4 * up)
    if order >= 4:
        e_terms.append(r**4 * h2**2 * (s * cross + 8 * pol.F**2 * (er - mr) * q) * c4**2 * down)
        m_terms.append(r**4 * h2**2 * ((pol.s_me**2 - 4 * pol.F**2) + 2 * (mr - er) * q * s) * c4**2 * down)
    A = amp * c4 * sum(e_terms)
    AH = -sign * 2j * pol.eta0 * pol.F * amp * c4 * sum(m_terms)
    return complex(A), complex(AH)


def asymptotic_order2(cfg, pol=None, wn=None, sign=1, order=4):
    """(A_{+-2,0}, A^H_{+-2,0}) through (a/d)^order; mixed-term phases are not adjusted."""
    _check_sign(sign)
    _check_order(order)
    pol, wn = _prep(cfg, pol, wn)
    q, s, cross, c4, amp = _common(cfg, pol, wn)
    er, mr = cfg.eps_r, cfg.mu_r
    r = wn.xi
    psi = wn.psi_i
    c32 = 1j * math.pi / (32 * pol.D)
    h2, h3, h4, h5 = (leading_h(k, wn) for k in (2, 3, 4, 5))
    e = lambda k: np.exp(1j * k * psi)  # noqa: E731
    s0 = pol.s0_em

    e_terms = [s * e(-2 * sign)]
    m_terms = [e(-2 * sign)]
    if order >= 2:
        e_terms.append(r**2 * (h2 * s0 * s + sign * h3 * cross) * c4 * e(sign))
        m_terms.append(r**2 * (h2 * s0 + sign * h3 * c4 * 2 * (mr - er) * q * e(sign)))
    if order >= 4:
        e_terms.append(r**4 * (
            h4 * c32 * cross * e(2 * sign)
            + sign * h5 * h2 * c4**2 * (s * cross + 8 * pol.F**2 * (er - mr) * q) * e(-sign)
        ))
        m_terms.append(r**4 * (
            h4 * c32 * 2 * (mr - er) * q * e(2 * sign)
            + sign * h5 * h2 * c4**2 * (cross + 2 * (er - mr) * q * pol.s_me) * e(-sign)
        ))
    A = amp * c32 * sum(e_terms)
    AH = -sign * 2j * pol.eta0 * pol.F * amp * c32 * sum(m_terms)
    return complex(A), complex(AH)


# i pi / (3 * 2^8 D) prefactor of the third-order coefficients
_THIRD_ORDER_DENOM = 3 * 2**8


def asymptotic_order3(cfg, pol=None, wn=None, sign=1, order=4):
    """(A_{+-3,0}, A^H_{+-3,0}); the series starts at (a/d)^4."""
    _check_sign(sign)
    _check_order(order)
    if order < 4:
        return 0j, 0j
    pol, wn = _prep(cfg, pol, wn)
    q, s, cross, c4, amp = _common(cfg, pol, wn)
    pre = amp * 1j * math.pi / (_THIRD_ORDER_DENOM * pol.D)
    r4h4 = wn.xi**4 * leading_h(4, wn)
    phase = np.exp(1j * sign * wn.psi_i)
    A = pre * r4h4 * cross * c4 * phase
    AH = -sign * 2j * pol.eta0 * pol.F * pre * r4h4 * 2 * (cfg.mu_r - cfg.eps_r) * q * c4 * phase
    return complex(A), complex(AH)


def scaling_exponent(n):
    """Power e_n of k_r a in A_n ~ A_{n,0} (k_r a)^{e_n}."""
    n = abs(int(n))
    if n == 0:
        return 2
    if n > 3:
        raise ValueError("closed forms exist only for |n| <= 3")
    return 2 * ((n + 1) // 2) if n % 2 else n + 2


@dataclass
class AsymptoticTable:
    order_included: int
    kra: float
    values: dict = field(default_factory=dict)

    @property
    def modes(self):
        return sorted(self.values)

    def reconstructed(self, n):
        """(A_n, A^H_n) in absolute units: A_{n,0} (k_r a)^{e_n}."""
        A0, AH0 = self.values[n]
        f = self.kra ** scaling_exponent(n)
        return A0 * f, AH0 * f


def asymptotic_table(cfg, order=4):
    """Closed-form A_{n,0}, A^H_{n,0} for |n| <= 3."""
    _check_order(order)
    wn = derive_wavenumbers(cfg)
    pol = derive_polarization_constants(cfg, wn)
    values = {0: asymptotic_order0(cfg, pol)}
    for fn, n in ((asymptotic_order1, 1), (asymptotic_order2, 2), (asymptotic_order3, 3)):
        for sign in (1, -1):
            values[sign * n] = fn(cfg, pol, wn, sign=sign, order=order)
    return AsymptoticTable(order_included=order, kra=wn.kra, values=values)


def fit_power(x, y):
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit a power law")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("power-law fit needs positive finite data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@dataclass
class OmegaReport:
    mode: int
    order_included: int
    ratios: np.ndarray
    errors: np.ndarray
    exponent: float
    expected_min: int
    degenerate: bool = False

    @property
    def meets_expectation(self):
        return self.degenerate or self.exponent >= self.expected_min - 1


def omega_expansion_check(exact, asym, ratios, mode, floor=1e-300):
    """Fit q in |exact - asym| / |exact| ~ (a/d)^q across a sweep.

    ``exact`` and ``asym`` are sequences (one entry per a/d value) of
    CoefficientTable and AsymptoticTable; the exact value is compared with the
    reconstructed asymptotic one for the electric coefficient of ``mode``.
    """
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size < 3 or len(exact) != ratios.size or len(asym) != ratios.size:
        raise ValueError("omega_expansion_check needs >= 3 matched sweep points")
    order = asym[0].order_included
    errs = []
    for ex, at in zip(exact, asym):
        e = ex.get(mode)[0]
        a = at.reconstructed(mode)[0]
        scale = max(abs(e), abs(a))
        errs.append(abs(e - a) / scale if scale > floor else 0.0)
    errs = np.array(errs)
    if np.all(errs == 0):
        return OmegaReport(mode, order, ratios, errs, float("nan"), order + 2, degenerate=True)
    return OmegaReport(mode, order, ratios, errs, fit_power(ratios, errs), order + 2)
