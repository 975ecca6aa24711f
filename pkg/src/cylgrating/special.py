"""Integer-order Bessel and Hankel functions of real argument, and Bernoulli numbers.

The cylinder functions are thin wrappers over ``scipy.special`` (AMOS) that
add the argument checks used throughout the package and enforce the
reflection rule ``f_{-n} = (-1)^n f_n`` by construction.  All functions accept
scalars or numpy arrays for ``n`` and ``x`` and broadcast.
"""

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from .errors import DomainError

__all__ = [
    "bessel_j",
    "bessel_y",
    "hankel1",
    "bessel_deriv",
    "bernoulli_number",
    "bernoulli_poly_zero",
    "bessel_jy_table",
]

BERNOULLI_MAX = 30


def _order(n):
    n = np.asarray(n)
    if not np.issubdtype(n.dtype, np.integer):
        if not np.all(np.mod(n, 1) == 0):
            raise DomainError("only integer orders are supported")
        n = n.astype(np.int64)
    return n


def _argument(x, strict):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("argument must be finite")
    if strict and np.any(x <= 0):
        raise DomainError("argument must be > 0 (logarithmic singularity at x = 0)")
    if not strict and np.any(x < 0):
        raise DomainError("argument must be >= 0")
    return x


def _reflect(n, values):
    sign = np.where((n < 0) & (np.abs(n) % 2 == 1), -1.0, 1.0)
    out = sign * values
    return out if np.ndim(out) else out[()]


def bessel_j(n, x):
    """J_n(x) for integer n and real x >= 0 (x = 0 handled exactly)."""
    n = _order(n)
    x = _argument(x, strict=False)
    return _reflect(n, _sp.jv(np.abs(n), x))


def bessel_y(n, x):
    """Y_n(x) for integer n and real x > 0."""
    n = _order(n)
    x = _argument(x, strict=True)
    return _reflect(n, _sp.yv(np.abs(n), x))


def hankel1(n, x):
    """H_n^{(1)}(x) = J_n(x) + i Y_n(x), x > 0."""
    n = _order(n)
    x = _argument(x, strict=True)
    m = np.abs(n)
    return _reflect(n, _sp.jv(m, x) + 1j * _sp.yv(m, x))


def bessel_deriv(kind, n, x):
    """Derivative with respect to the argument, via f'_n = (f_{n-1} - f_{n+1}) / 2.

    ``kind`` is ``"J"`` or ``"H1"``.
    """
    n = _order(n)
    if kind == "J":
        f = bessel_j
    elif kind in ("H1", "H"):
        f = hankel1
    else:
        raise ValueError(f"unknown kind {kind!r}; expected 'J' or 'H1'")
    return 0.5 * (f(n - 1, x) - f(n + 1, x))


@lru_cache(maxsize=None)
def _bernoulli_table(m):
    # Akiyama-Tanigawa; yields the B_1 = +1/2 convention (even indices unaffected)
    a = [Fraction(0)] * (m + 1)
    out = []
    for i in range(m + 1):
        a[i] = Fraction(1, i + 1)
        for j in range(i, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    return tuple(out)


def bernoulli_poly_zero(m):
    """Value of the Bernoulli polynomial B_m(x) at x = 0, as an exact Fraction.

    B_1(0) = -1/2, B_2(0) = 1/6, B_4(0) = -1/30, ...
    """
    m = int(m)
    if m < 0 or m > 2 * BERNOULLI_MAX:
        raise DomainError(f"Bernoulli index must lie in [0, {2 * BERNOULLI_MAX}]")
    value = _bernoulli_table(m)[m]
    return -value if m == 1 else value


def bernoulli_number(k):
    """Bernoulli number in the positive convention B_1 = 1/6, B_2 = 1/30, ...

    Related to the polynomial values by B_{2k}(0) = (-1)^(k-1) B_k, so
    ``bernoulli_number(k) == abs(bernoulli_poly_zero(2 * k))``.  Returns a Fraction.
    """
    k = int(k)
    if k < 0 or k > BERNOULLI_MAX:
        raise DomainError(f"Bernoulli index must lie in [0, {BERNOULLI_MAX}]")
    if k == 0:
        return Fraction(1)
    return (-1) ** (k - 1) * bernoulli_poly_zero(2 * k)


def bessel_jy_table(nmax, x):
    """J_n(x) and Y_n(x) for every order 0..nmax at once; ``x`` is a 1-d array of positives.

    J comes from Miller's backward recurrence normalised by
    J_0 + 2 sum_k J_2k = 1, Y from forward recurrence off Y_0 and Y_1; both
    directions are the stable ones.  Returns two arrays of shape (nmax+1, len(x)).
    """
    nmax = int(nmax)
    x = _argument(np.atleast_1d(x), strict=True)
    start = max(nmax, math.ceil(x.max())) + 60 + math.ceil(10 * x.max() ** (1 / 3))
    start += start % 2
    J = np.zeros((nmax + 1, x.size))
    upper = np.zeros_like(x)
    current = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        # current = f_k, upper = f_{k+1}; step to f_{k-1}
        lower = (2 * k / x) * current - upper
        if k <= nmax:
            J[k] = current
        if k % 2 == 0:
            norm += 2 * current
        upper, current = current, lower
        big = np.abs(current) > 1e250
        if big.any():
            upper[big] *= 1e-250
            current[big] *= 1e-250
            norm[big] *= 1e-250
            J[k:, big] *= 1e-250
    J[0] = current
    norm += current
    J /= norm

    Y = np.empty_like(J)
    Y[0] = _sp.y0(x)
    if nmax >= 1:
        Y[1] = _sp.y1(x)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, nmax):
            Y[n + 1] = (2 * n / x) * Y[n] - Y[n - 1]
    return J, Y
