"""Closed-form limit laws for ratios of ordered heavy-tailed Poisson points.

Everything here is deterministic: densities, CDFs and Laplace functionals of
the small-time limits of the ratio point patterns.  Conventions used
throughout:

* ``alpha`` is the tail index; where a law degenerates at ``alpha = 0`` or
  ``alpha = inf`` the corresponding point-mass convention is applied.
* ``r`` counts deleted top points, ``n`` the rank of the normalizing point.
* The pivot ratio ``W = (r+n-th largest)/(r-th largest)`` has the
  Beta(r, n)**(1/alpha) law; below-1 ratio points follow a negative binomial
  point process with ``alpha*x**(-alpha-1)`` base density on (0, 1); above-1
  ratios follow truncated Pareto laws on (1, 1/u).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad as _scipy_quad

from ._special import betainc_reg, gammainc_lower, log_beta

INDICATOR_STEP = "indicator_step"
LINEAR_RAMP = "linear_ramp"
PROBE_FORMS = frozenset({INDICATOR_STEP, LINEAR_RAMP})


@dataclass(frozen=True)
class LawSpec:
    """Parameter bundle selecting one closed-form limit law."""

    alpha: float
    r: int = 0
    n: int = 1
    u: Optional[float] = None
    z: Optional[float] = None
    lam: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.r < 0 or self.n < 1:
            raise ValueError("require r >= 0 and n >= 1")
        if self.u is not None and not (0.0 < self.u < 1.0):
            raise ValueError("u must lie strictly inside (0, 1)")
        if self.z is not None and not self.z > 0:
            raise ValueError("z must be positive")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")


@dataclass(frozen=True)
class LaplaceProbe:
    """Nonnegative bounded test function: a step or ramp on an open interval.

    ``indicator_step``: f(x) = amplitude * 1_(a,b)(x)
    ``linear_ramp``:    f(x) = amplitude * x * 1_(a,b)(x)

    ``amplitude`` may be ``inf`` (void-probability probes).
    """

    amplitude: float
    a: float
    b: float
    form: str = INDICATOR_STEP

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        if self.a < 0 or not self.b > self.a:
            raise ValueError("require 0 <= a < b")
        if self.form not in PROBE_FORMS:
            raise ValueError(f"unknown probe form: {self.form!r}")

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        inside = (arr > self.a) & (arr < self.b)
        if self.form == INDICATOR_STEP:
            out = np.where(inside, self.amplitude, 0.0)
        else:
            out = np.where(inside, self.amplitude * arr, 0.0)
        return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class QuadSpec:
    """Adaptive quadrature tolerances for the Laplace-functional integrals."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 200

    def __post_init__(self):
        if not (0 < self.abs_tol <= 1e-8 and 0 < self.rel_tol <= 1e-8):
            raise ValueError("quadrature tolerances must lie in (0, 1e-8]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be positive")


DEFAULT_QUAD = QuadSpec()


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


def _quad(fn, lo, hi, quad: QuadSpec, breakpoints=None) -> float:
    points = None
    if breakpoints:
        points = sorted(p for p in breakpoints if lo < p < hi)
        points = points or None
    value, err = _scipy_quad(
        fn, lo, hi, epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_depth,
        points=points,
    )
    if not math.isfinite(value):
        raise QuadratureError(f"integral on ({lo}, {hi}) is not finite")
    tol = quad.abs_tol + quad.rel_tol * abs(value)
    if err > max(tol * 100.0, 1e-7):
        raise QuadratureError(
            f"quadrature error {err:.3e} above tolerance on ({lo}, {hi})"
        )
    return value


def incomplete_beta(a: float, b: float, x):
    """Regularized incomplete beta B(a, b; x) for a, b > 0 and x in [0, 1]."""
    return betainc_reg(a, b, x)


def w_law(spec: LawSpec, w):
    """Density and CDF of the limiting pivot ratio W for ``r >= 1``.

    density = (1 - w**alpha)**(n-1) * alpha * w**(alpha*r - 1) / B(r, n)
    cdf     = B(r, n; w**alpha)
    """
    if spec.r < 1:
        raise ValueError("w_law requires r >= 1 (the ratio is undefined at r=0)")
    a, r, n = spec.alpha, spec.r, spec.n
    arr = np.asarray(w, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    if np.any((arr <= 0) | (arr >= 1)):
        raise ValueError("w must lie strictly inside (0, 1)")
    wa = arr**a
    density = (1.0 - wa) ** (n - 1) * a * arr ** (a * r - 1.0) / math.exp(log_beta(r, n))
    cdf = np.atleast_1d(betainc_reg(r, n, wa))
    if scalar:
        return float(density[0]), float(cdf[0])
    return density, cdf


def j_law(spec: LawSpec, x):
    """Density and CDF of the truncated-Pareto law J(u) on (1, 1/u)."""
    if spec.u is None or not (0.0 < spec.u < 1.0):
        raise ValueError("j_law requires u strictly inside (0, 1)")
    a, u = spec.alpha, spec.u
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    if np.any(arr <= 0):
        raise ValueError("x must be positive")
    norm = 1.0 - u**a
    inside = (arr > 1.0) & (arr < 1.0 / u)
    density = np.where(inside, a * arr ** (-a - 1.0) / norm, 0.0)
    cdf = np.clip((1.0 - arr ** -a) / norm, 0.0, 1.0)
    cdf[arr <= 1.0] = 0.0
    cdf[arr >= 1.0 / u] = 1.0
    if scalar:
        return float(density[0]), float(cdf[0])
    return density, cdf


def l_law(alpha: float, x):
    """Density and CDF of the Pareto(alpha) law on (1, inf) (the u -> 0 law)."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    if np.any(arr < 1.0):
        raise ValueError("x must be >= 1")
    density = alpha * arr ** (-alpha - 1.0)
    cdf = 1.0 - arr**-alpha
    if scalar:
        return float(density[0]), float(cdf[0])
    return density, cdf


def k_orderstat_cdf(r: int, n: int, alpha: float, w):
    """P(n-th largest of r+n-1 iid K's <= w) where P(K <= w) = w**alpha.

    Evaluated as the binomial sum over at-least-r successes; agrees with the
    incomplete-beta form of the pivot ratio law.
    """
    if r < 1 or n < 1:
        raise ValueError("require r >= 1 and n >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    arr = np.asarray(w, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    if np.any((arr <= 0) | (arr >= 1)):
        raise ValueError("w must lie strictly inside (0, 1)")
    m = r + n - 1
    p = arr**alpha
    out = np.zeros_like(arr)
    for k in range(r, m + 1):
        out += math.comb(m, k) * p**k * (1.0 - p) ** (m - k)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def successive_ratio_cdf(k: int, alpha: float, y):
    """CDF ``y**(k*alpha)`` of the limit of the k-th successive ratio.

    ``alpha = 0`` and ``alpha = inf`` follow the point-mass conventions
    (mass at 0 and at 1 respectively), which the power form already encodes.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative (inf allowed)")
    arr = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    with np.errstate(invalid="ignore"):
        out = arr ** (k * alpha)
    # 0**0 and 1**inf resolve to the convention values
    out = np.where(np.isnan(out), 1.0, out)
    return float(out) if np.ndim(y) == 0 else out


def ratio_tail_n1(r: int, alpha: float, x):
    """Limiting tail P(r-th/(r+1)-th largest > x) = x**(-r*alpha) for x >= 1."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    arr = np.maximum(np.asarray(x, dtype=float), 1.0)
    out = arr ** (-r * alpha)
    return float(out) if np.ndim(x) == 0 else out


def nb_count_pmf(n: int, alpha: float, a: float, kmax: int) -> np.ndarray:
    """pmf of the point count in (a, 1): NegativeBinomial(n, p = a**alpha).

    Entry k is the probability of exactly k points, k = 0..kmax.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < a < 1.0):
        raise ValueError("a must lie strictly inside (0, 1)")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    p = a**alpha
    k = np.arange(kmax + 1)
    log_pmf = (
        np.array([math.lgamma(n + kk) - math.lgamma(kk + 1) for kk in k])
        - math.lgamma(n)
        + n * math.log(p)
        + k * math.log1p(-p)
    )
    return np.exp(log_pmf)


def _lambda_mass(alpha: float, lo: float, hi: float) -> float:
    """Base-measure mass alpha*x**(-alpha-1) of the interval (lo, hi)."""
    if hi <= lo:
        return 0.0
    upper = 0.0 if math.isinf(hi) else hi**-alpha
    if lo <= 0.0:
        return math.inf
    return lo**-alpha - upper


def _exp_decrement(amplitude: float) -> float:
    """1 - exp(-amplitude), with amplitude = inf allowed."""
    if math.isinf(amplitude):
        return 1.0
    return -math.expm1(-amplitude)


def _probe_deficit(alpha: float, f: LaplaceProbe, lo: float, hi: float, quad: QuadSpec) -> float:
    """``integral of (1 - exp(-f)) d(base measure)`` over (lo, hi)."""
    lo = max(lo, f.a)
    hi = min(hi, f.b)
    if hi <= lo or f.amplitude == 0.0:
        return 0.0
    if f.form == INDICATOR_STEP:
        return _exp_decrement(f.amplitude) * _lambda_mass(alpha, lo, hi)
    if lo <= 0.0 and alpha >= 1.0:
        return math.inf  # ramp decays too slowly to tame the x**(-alpha-1) pole
    lam = f.amplitude

    def integrand(x):
        return -math.expm1(-lam * x) * alpha * x ** (-alpha - 1.0)

    return _quad(integrand, lo, hi, quad)


def nb_laplace(n: int, alpha: float, f: LaplaceProbe, quad: QuadSpec = DEFAULT_QUAD) -> float:
    """Laplace functional of the limiting below-1 point process at probe f.

    Returns ``(1 + integral over (0,1) of (1 - e^{-f}) alpha x^{-alpha-1} dx)**(-n)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    deficit = _probe_deficit(alpha, f, 0.0, 1.0, quad)
    if math.isinf(deficit):
        return 0.0
    return (1.0 + deficit) ** (-n)


def _upper_factor_r0(n: int, alpha: float, f: LaplaceProbe, quad: QuadSpec) -> float:
    """``E[exp(-f(L))]**(n-1)`` for the r = 0 above-1 factor."""
    mean = 1.0 - _probe_deficit(alpha, f, 1.0, math.inf, quad)
    return mean ** (n - 1)


def _upper_factor(r: int, n: int, alpha: float, f: LaplaceProbe, quad: QuadSpec) -> float:
    """Beta-mixed above-1 factor: E[(conditional Laplace of one J point)^(n-1)].

    The Beta(r, n) density's (1-s)**(n-1) cancels the conditional
    normalization, leaving a smooth outer integrand.
    """
    log_b = log_beta(r, n)

    def outer(s: float) -> float:
        hi = s ** (-1.0 / alpha)
        mass = _lambda_mass(alpha, 1.0, hi)  # equals 1 - s
        kernel = mass - _probe_deficit(alpha, f, 1.0, hi, quad)
        return s ** (r - 1.0) * kernel ** (n - 1) * math.exp(-log_b)

    # the support edge s**(-1/alpha) crossing a probe edge puts kinks in the
    # outer integrand
    kinks = [edge**-alpha for edge in (f.a, f.b) if 1.0 < edge < math.inf]
    return _quad(outer, 0.0, 1.0, quad, breakpoints=kinks)


def limit_laplace_full(
    r: int, n: int, alpha: float, f: LaplaceProbe, quad: QuadSpec = DEFAULT_QUAD
) -> float:
    """Laplace functional of the full limiting ratio point pattern.

    Product of three factors: the above-1 order-statistic block (a Beta
    mixture of truncated-Pareto points; the plain Pareto law when r = 0),
    the deterministic unit point, and the below-1 negative binomial block
    with n + r total shape.
    """
    if r < 0 or n < 1:
        raise ValueError("require r >= 0 and n >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if n == 1:
        first = 1.0
    elif r == 0:
        first = _upper_factor_r0(n, alpha, f, quad)
    else:
        first = _upper_factor(r, n, alpha, f, quad)
    f_at_one = f(1.0)
    point = 0.0 if math.isinf(f_at_one) else math.exp(-f_at_one)
    return first * point * nb_laplace(r + n, alpha, f, quad)


def phi_conditional(
    lam: float, u: float, alpha: float, quad: QuadSpec = DEFAULT_QUAD
) -> float:
    """Conditional Laplace transform of one above-1 point given the pivot u.

    ``Phi(lam, u) = integral_1^{1/u} e^{-lam x} alpha x^{-alpha-1} dx / (1 - u**alpha)``;
    the above-1 sum of n-1 points transforms as ``Phi**(n-1)``.
    """
    if not (0.0 < u < 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if lam == 0.0:
        return 1.0
    norm = -math.expm1(alpha * math.log(u))

    def integrand(x):
        return math.exp(-lam * x) * alpha * x ** (-alpha - 1.0)

    return _quad(integrand, 1.0, 1.0 / u, quad) / norm


def conditional_gamma_cdf(r: int, n: int, alpha: float, w: float, z):
    """Limiting conditional CDF of the top-point time scale given the pivot ratio.

    Returns the regularized lower incomplete gamma with shape r+n evaluated
    at ``w**-alpha * z``.
    """
    if r < 1 or n < 1:
        raise ValueError("require r >= 1 and n >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not (0.0 < w < 1.0):
        raise ValueError("w must lie strictly inside (0, 1)")
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0):
        raise ValueError("z must be nonnegative")
    return gammainc_lower(r + n, w**-alpha * arr)
