"""Vectorized incomplete beta / incomplete gamma.

Classical continued-fraction and series evaluations (modified Lentz), done
with numpy masks so millions of abscissae evaluate in one call.  Parameters
``a``, ``b`` are scalars; the argument may be any array.  Accuracy is
checked against independent library and quadrature oracles in the tests.
"""

from __future__ import annotations

import math

import numpy as np

_EPS = 1e-15
_TINY = 1e-300
_MAX_ITER = 500


def _betacf(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """Continued fraction for the incomplete beta (Lentz), vectorized in x."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    np.copyto(d, _TINY, where=np.abs(d) < _TINY)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        np.copyto(d, _TINY, where=np.abs(d) < _TINY)
        c = 1.0 + aa / c
        np.copyto(c, _TINY, where=np.abs(c) < _TINY)
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        np.copyto(d, _TINY, where=np.abs(d) < _TINY)
        c = 1.0 + aa / c
        np.copyto(c, _TINY, where=np.abs(c) < _TINY)
        d = 1.0 / d
        delta = d * c
        h *= delta
        if np.all(np.abs(delta - 1.0) < _EPS):
            break
    return h


def betainc_reg(a: float, b: float, x) -> np.ndarray | float:
    """Regularized incomplete beta I_x(a, b), elementwise over x in [0, 1]."""
    if not (a > 0 and b > 0):
        raise ValueError("incomplete beta requires a > 0 and b > 0")
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    if np.any((arr < 0) | (arr > 1)):
        raise ValueError("incomplete beta argument must lie in [0, 1]")
    out = np.empty_like(arr)
    interior = (arr > 0) & (arr < 1)
    out[arr <= 0] = 0.0
    out[arr >= 1] = 1.0
    if np.any(interior):
        xv = arr[interior]
        lbeta = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        front = np.exp(lbeta + a * np.log(xv) + b * np.log1p(-xv))
        res = np.empty_like(xv)
        direct = xv < (a + 1.0) / (a + b + 2.0)
        if np.any(direct):
            res[direct] = front[direct] * _betacf(a, b, xv[direct]) / a
        flip = ~direct
        if np.any(flip):
            res[flip] = 1.0 - front[flip] * _betacf(b, a, 1.0 - xv[flip]) / b
        out[interior] = np.clip(res, 0.0, 1.0)
    return float(out[0]) if scalar else out


def _gamma_series(a: float, x: np.ndarray) -> np.ndarray:
    """Series for the regularized lower incomplete gamma, valid for x < a+1."""
    ap = a
    total = np.full_like(x, 1.0 / a)
    term = total.copy()
    for _ in range(_MAX_ITER):
        ap += 1.0
        term = term * x / ap
        total += term
        if np.all(np.abs(term) < np.abs(total) * _EPS):
            break
    return total * np.exp(-x + a * np.log(x) - math.lgamma(a))


def _gamma_contfrac(a: float, x: np.ndarray) -> np.ndarray:
    """Lentz continued fraction for the regularized UPPER gamma, x >= a+1."""
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        np.copyto(d, _TINY, where=np.abs(d) < _TINY)
        c = b + an / c
        np.copyto(c, _TINY, where=np.abs(c) < _TINY)
        d = 1.0 / d
        delta = d * c
        h *= delta
        if np.all(np.abs(delta - 1.0) < _EPS):
            break
    return h * np.exp(-x + a * np.log(x) - math.lgamma(a))


def gammainc_lower(a: float, x) -> np.ndarray | float:
    """Regularized lower incomplete gamma P(a, x), elementwise over x >= 0."""
    if not a > 0:
        raise ValueError("incomplete gamma requires a > 0")
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    if np.any(arr < 0):
        raise ValueError("incomplete gamma argument must be >= 0")
    out = np.zeros_like(arr)
    pos = arr > 0
    series = pos & (arr < a + 1.0)
    if np.any(series):
        out[series] = _gamma_series(a, arr[series])
    tail = pos & ~series
    if np.any(tail):
        out[tail] = 1.0 - _gamma_contfrac(a, arr[tail])
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def gammainc_upper(a: float, x) -> np.ndarray | float:
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if not a > 0:
        raise ValueError("incomplete gamma requires a > 0")
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    if np.any(arr < 0):
        raise ValueError("incomplete gamma argument must be >= 0")
    out = np.ones_like(arr)
    pos = arr > 0
    tail = pos & (arr >= a + 1.0)
    if np.any(tail):
        out[tail] = _gamma_contfrac(a, arr[tail])
    series = pos & ~tail
    if np.any(series):
        out[series] = 1.0 - _gamma_series(a, arr[series])
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def chi2_sf(stat: float, dof: int) -> float:
    """Chi-square survival function (upper tail probability)."""
    if dof <= 0:
        raise ValueError("dof must be positive")
    return float(gammainc_upper(0.5 * dof, 0.5 * stat))


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
