"""Oblique-incidence Schlömilch lattice sums I_n(k_r d) and their small-spacing leading terms.

    I_n = sum_{p >= 1} H_n(p k_r d) [ (-1)^n exp(i p beta) + exp(-i p beta) ],
    beta = k_r d sin(psi_i).

The series converges only conditionally.  It is split into two one-sided sums
S_pm(n) = sum_p H_n(p k_r d) exp(+/- i p beta); each is summed directly up to a
depth P and the remainder p > P is obtained from the Hankel asymptotic
expansion H_n(x) ~ sqrt(2/(pi x)) e^{i(x - n pi/2 - pi/4)} sum_k i^k a_k(n) / x^k,
evaluated term by term up to a second depth and, beyond it, through the
one-sided power sums sum_{p > P} p^{-s} z^p, which follow from the
Euler-Abel (summation by parts) series

    sum_{q >= 0} z^q (q + A)^{-s} ~ A^{-s} sum_m (-1)^m (s)_m / m! A^{-m} Li_{-m}(z).

Li_{-m}(z) is a polynomial in u = 1/(1 - z), so the transformation is exact
arithmetic on the tail instead of finite differences of computed terms.  Its
terms shrink like m! / (A |1 - z|)^m, which is why P is tied to the distance
of z from 1, i.e. to the distance from a grating anomaly.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import AnomalyError, NoConvergenceError
from .medium import anomaly_margin
from .special import bernoulli_poly_zero, bessel_jy_table

__all__ = [
    "LatticeSumTable",
    "LeadingTerms",
    "SumInfo",
    "lattice_sum_table",
    "schlomilch_In",
    "leading_h",
    "leading_terms",
    "leading_exponent",
    "verify_leading_order",
    "check_anomaly",
    "DEFAULT_TOL",
    "DEFAULT_ANOMALY_THRESHOLD",
    "DEFAULT_MAX_TERMS",
]

DEFAULT_TOL = 1e-9
DEFAULT_ANOMALY_THRESHOLD = 1e-3
DEFAULT_MAX_TERMS = 500_000

_EPS = np.finfo(float).eps
# Euler-Abel tail wants P |1 - z| large; Hankel expansion wants P k_r d >> n
_TAIL_REACH = 60.0
_HANKEL_REACH = 30.0


@dataclass(frozen=True)
class SumInfo:
    terms: int
    est_tail: float


@dataclass(frozen=True)
class LatticeSumTable:
    """I_n for n in [-nmax, nmax]; arrays indexed by ``n + nmax``."""

    nmax: int
    values: np.ndarray
    terms_used: np.ndarray
    est_tail: np.ndarray
    anomaly_margin: float

    @property
    def n(self):
        return np.arange(-self.nmax, self.nmax + 1)

    def __getitem__(self, n):
        n = np.asarray(n)
        if np.any(np.abs(n) > self.nmax):
            raise IndexError(f"lattice sum index outside [-{self.nmax}, {self.nmax}]")
        out = self.values[n + self.nmax]
        return out if np.ndim(out) else complex(out)


def check_anomaly(wn, threshold=DEFAULT_ANOMALY_THRESHOLD):
    margin = anomaly_margin(wn)
    if margin < threshold:
        raise AnomalyError(
            f"Delta(1 +/- sin psi_i) is within {margin:.3g} of an anomaly (threshold {threshold:g}); "
            "the lattice sums diverge at a grating anomaly"
        )
    return margin


_LI_POLYS = [np.array([0.0, 1.0])]


def _li_poly(m):
    """Coefficients (in u = 1/(1-z)) of sum_{q>=0} q^m z^q; m = 0 gives u itself."""
    while len(_LI_POLYS) <= m:
        prev = _LI_POLYS[-1]
        # z d/dz acts as (u^2 - u) d/du
        _LI_POLYS.append(npoly.polymul([0.0, -1.0, 1.0], npoly.polyder(prev)))
    return _LI_POLYS[m]


def _power_tails(z, s, start, mmax=120):
    """sum_{p >= start} p^{-s} z^p for each entry of ``s``; returns (values, error estimates)."""
    s = np.asarray(s, dtype=float)
    u = 1.0 / (1.0 - z)
    coef = np.ones_like(s)
    total = np.zeros(s.shape, dtype=complex)
    last = np.full(s.shape, np.inf)
    done = np.zeros(s.shape, dtype=bool)
    for m in range(mmax):
        term = coef * npoly.polyval(u, _li_poly(m))
        mag = np.abs(term)
        grow = (mag > last) & ~done
        # asymptotic series: stop each column at its smallest term
        done |= grow
        active = ~done
        total[active] += term[active]
        last = np.where(active, mag, last)
        done |= active & (mag <= 1e-17 * np.abs(total))
        if done.all():
            break
        coef = coef * (-(s + m) / ((m + 1) * start))
    phase = z**start * start ** (-s)
    return phase * total, np.abs(phase) * last


def _hankel_coefficients(n, x, rtol=1e-17, kmax=400):
    """a_k(n) of the Hankel expansion, truncated where a_k / x^k is negligible."""
    mu = 4.0 * n * n
    coeffs = [1.0]
    peak = 1.0
    for k in range(1, kmax):
        nxt = coeffs[-1] * (mu - (2 * k - 1) ** 2) / (8.0 * k)
        coeffs.append(nxt)
        size = abs(nxt) / x**k
        peak = max(peak, size)
        if nxt == 0.0 or size < rtol * peak:
            return np.array(coeffs), size
    return np.array(coeffs), size


def _hankel_asymptotic(n, x, ak):
    """Hankel expansion of H_n(x) summed by Horner's rule in i/x."""
    y = 1j / x
    acc = np.full(x.shape, ak[-1], dtype=complex)
    for c in ak[-2::-1]:
        acc = acc * y + c
    return np.sqrt(2 / (np.pi * x)) * np.exp(1j * (x - n * np.pi / 2 - np.pi / 4)) * acc


def _depths(kd, beta, nmax, depth, max_terms):
    """Per-order (direct, explicit) depths: Bessel values up to the first, expansion up to the second."""
    dist = min(abs(1 - np.exp(1j * (kd + beta))), abs(1 - np.exp(1j * (kd - beta))))
    tail_start = depth * max(_TAIL_REACH / dist, 50)
    orders = np.arange(nmax + 1)
    direct = np.ceil(depth * (3 * orders + _HANKEL_REACH) / kd).astype(int)
    explicit = np.maximum(direct, math.ceil(tail_start))
    if explicit.max() > max_terms:
        raise NoConvergenceError(
            f"lattice sums need {explicit.max()} explicit terms (max {max_terms}); "
            "k_r d too small or too close to an anomaly"
        )
    return direct, explicit


def lattice_sum_table(wn, nmax, tol=DEFAULT_TOL, threshold=DEFAULT_ANOMALY_THRESHOLD,
                      max_terms=DEFAULT_MAX_TERMS, depth=1.0):
    """Tabulate I_n(k_r d) for n in [-nmax, nmax].

    ``tol`` bounds the estimated error relative to max(1, |I_n|).  ``depth``
    scales the number of explicitly summed terms (results must not depend on it).
    """
    nmax = int(nmax)
    margin = check_anomaly(wn, threshold)
    kd = wn.krd
    beta = kd * math.sin(wn.psi_i)
    direct, explicit = _depths(kd, beta, nmax, depth, max_terms)
    z_pm = (np.exp(1j * (kd + beta)), np.exp(1j * (kd - beta)))

    orders = np.arange(nmax + 1)
    # I_n = sum_p H_n(p kd) w_p with w_p = (-1)^n e^{ip beta} + e^{-ip beta};
    # summing with the combined weight avoids cancelling two large one-sided
    # sums when I_n is small (odd n at normal grating incidence).  I_{-n} = (-1)^n I_n.
    positive = np.zeros(nmax + 1, dtype=complex)
    err = np.zeros(nmax + 1)
    J, Y = bessel_jy_table(nmax, np.arange(1, direct.max() + 1) * kd)
    for n in orders:
        sign = -1.0 if n % 2 else 1.0
        p = np.arange(1, direct[n] + 1)
        with np.errstate(invalid="ignore"):
            H = J[n, : p.size] + 1j * Y[n, : p.size]
        if not np.all(np.isfinite(H)):
            raise NoConvergenceError(f"H_{n} overflows at k_r d = {kd:.3g}")
        w = sign * np.exp(1j * p * beta) + np.exp(-1j * p * beta)
        positive[n] = H @ w
        err[n] = 8 * _EPS * np.abs(H) @ np.abs(w)

        ak, h_trunc = _hankel_coefficients(n, (direct[n] + 1) * kd)
        if explicit[n] > direct[n]:
            p = np.arange(direct[n] + 1, explicit[n] + 1)
            H = _hankel_asymptotic(n, p * kd, ak)
            w = sign * np.exp(1j * p * beta) + np.exp(-1j * p * beta)
            positive[n] += H @ w
            err[n] += (h_trunc + 8 * _EPS) * np.abs(H) @ np.abs(w)

        start = explicit[n] + 1
        k = np.arange(ak.size)
        weights = (
            math.sqrt(2 / (math.pi * kd))
            * np.exp(-1j * (n * math.pi / 2 + math.pi / 4))
            * ak
            * (1j / kd) ** k
        )
        for z, factor in zip(z_pm, (sign, 1.0)):
            tails, errs = _power_tails(z, k + 0.5, start)
            positive[n] += factor * (weights @ tails)
            err[n] += (np.abs(weights) @ errs + h_trunc * abs(weights[0] * tails[0])
                       + 8 * _EPS * np.abs(weights) @ np.abs(tails))

    sign_n = np.where(orders % 2 == 0, 1.0, -1.0)
    negative = sign_n * positive
    values = np.concatenate([negative[:0:-1], positive])
    est = np.concatenate([err[:0:-1], err])
    bad = est > tol * np.maximum(1.0, np.abs(values))
    if np.any(bad):
        worst = int(np.flatnonzero(bad)[0]) - nmax
        raise NoConvergenceError(
            f"lattice sum I_{worst} estimated error {est[worst + nmax]:.3g} exceeds tolerance"
        )
    return LatticeSumTable(
        nmax=nmax,
        values=values,
        terms_used=np.concatenate([explicit[:0:-1], explicit]),
        est_tail=est,
        anomaly_margin=margin,
    )


def schlomilch_In(wn, n, tol=DEFAULT_TOL, **kw):
    """Single lattice sum I_n(k_r d) together with its SumInfo."""
    table = lattice_sum_table(wn, abs(int(n)), tol=tol, **kw)
    i = int(n) + table.nmax
    return complex(table.values[i]), SumInfo(int(table.terms_used[i]), float(table.est_tail[i]))


def _phi0(wn):
    s = math.sin(wn.psi_i)
    if abs(s) < 1e-14:  # sin(pi) is not exactly zero in floating point
        s = 0.0
    return s, math.sqrt(max(0.0, 1.0 - s * s))


def _h_general(n, sin_phi0):
    """Large-order forms: Bernoulli expression for even n, the odd-from-even rule otherwise."""
    m = n // 2
    if m == 0:
        raise ValueError("large-order form needs n >= 2")
    h_even = (1j / m) * (-1) ** m * 2.0 ** (4 * m - 1) * math.pi ** (2 * m - 1) * float(
        bernoulli_poly_zero(2 * m)
    )
    if n % 2 == 0:
        return h_even
    return -4j * m * h_even * sin_phi0


def leading_h(n, wn):
    """Leading small-spacing coefficient h_n of I_n (n >= 0).

    phi_0 is taken as the in-plane propagation angle: sin(phi_0) = sin(psi_i),
    cos(phi_0) = +sqrt(1 - sin^2).
    """
    n = int(n)
    if n < 0:
        raise ValueError("leading_h is defined for n >= 0")
    s, c = _phi0(wn)
    pi = math.pi
    explicit = {
        0: lambda: 2.0 / c,
        1: lambda: -2j * s / c,
        2: lambda: 4 * pi / 3j,
        3: lambda: -16 * pi * s / 3,
        4: lambda: 2**5 * pi**3 / 15j,
        5: lambda: -(2**8) * pi**3 * s / 15,
    }
    if n in explicit:
        return complex(explicit[n]())
    return complex(_h_general(n, s))


def leading_exponent(n):
    """Power of k_r d in H_n ~ h_n / (k_r d)^e: 1 for n in {0, 1}, else 2 floor(n/2)."""
    n = abs(int(n))
    return 1 if n < 2 else 2 * (n // 2)


@dataclass(frozen=True)
class LeadingTerms:
    krd: float
    h: dict
    estimate: dict


def leading_terms(wn, nmax):
    h = {n: leading_h(n, wn) for n in range(nmax + 1)}
    est = {n: h[n] / wn.krd ** leading_exponent(n) for n in h}
    return LeadingTerms(krd=wn.krd, h=h, estimate=est)


@dataclass(frozen=True)
class LeadingOrderCheck:
    n: int
    krd: float
    I_n: complex
    h_n: complex
    ratio: complex

    @property
    def deviation(self):
        return abs(self.ratio - 1)


def verify_leading_order(wn, n, tol=DEFAULT_TOL, **kw):
    """(k_r d)^e I_n / h_n, which tends to 1 as k_r d -> 0 (NaN when h_n = 0)."""
    value, _ = schlomilch_In(wn, n, tol=tol, **kw)
    h = leading_h(n, wn)
    if h == 0:
        ratio = complex(math.nan, math.nan)
    else:
        ratio = wn.krd ** leading_exponent(n) * value / h
    return LeadingOrderCheck(n=int(n), krd=wn.krd, I_n=value, h_n=h, ratio=ratio)
