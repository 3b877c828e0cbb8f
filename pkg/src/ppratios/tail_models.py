"""Canonical heavy-tailed intensity tail functions and their inverses.

A tail function here is a non-increasing, right-continuous map
``(0, inf) -> (0, inf)`` that blows up at 0 and vanishes at infinity.  Five
parametric families are shipped, chosen so that every variation regime at 0
is represented with exact closed forms available for oracle testing:

``pareto``            ``x**-alpha``; index ``alpha`` in (0, inf).
``pareto_log``        ``x**-alpha * (1 + log(1/x))**beta`` for ``x < 1``,
                      continued as ``x**-alpha`` for ``x >= 1``.
``pareto_perturbed``  ``x**-alpha * (1 + c*x**gamma)`` for ``x <= 1``,
                      continued as ``(1+c) * x**-alpha`` for ``x > 1``.
``rapid_zero``        ``exp(1/x) - 1``; varies rapidly at 0 (index "inf").
``slow_zero``         ``log(1 + 1/x)``; varies slowly at 0 (index 0).

The perturbed and log families keep their defining formula near 0 (where the
small-time asymptotics live) and are continued with a plain power tail on
``x > 1`` so they remain genuine tails of locally finite measures for every
parameter choice.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

PARETO = "pareto"
PARETO_LOG = "pareto_log"
PARETO_PERTURBED = "pareto_perturbed"
RAPID_ZERO = "rapid_zero"
SLOW_ZERO = "slow_zero"

KINDS = frozenset({PARETO, PARETO_LOG, PARETO_PERTURBED, RAPID_ZERO, SLOW_ZERO})

#: Ceiling used instead of overflowing for the rapidly varying family.
TAIL_SATURATION = 1e300


class TailOverflowWarning(RuntimeWarning):
    """Raised as a warning when a tail evaluation saturates at TAIL_SATURATION."""


class InversionError(RuntimeError):
    """Numeric inversion failed; carries the last bracket examined."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(f"{message} (last bracket: [{bracket[0]:g}, {bracket[1]:g}])")
        self.bracket = bracket


@dataclass(frozen=True)
class InverseSpec:
    """Controls for the bracketed bisection used by numeric inverses."""

    bracket_lo: float = 1e-4
    bracket_hi: float = 1e4
    rel_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not (0 < self.bracket_lo < self.bracket_hi):
            raise ValueError("require 0 < bracket_lo < bracket_hi")
        if not (0 < self.rel_tol <= 1e-6):
            raise ValueError("rel_tol must lie in (0, 1e-6]")
        if self.max_iter < 64:
            raise ValueError("max_iter must be >= 64")


DEFAULT_INVERSE_SPEC = InverseSpec()


@dataclass(frozen=True)
class TailModel:
    """One member of the shipped tail function families.

    Use the constructors (:func:`pareto`, :func:`pareto_log`, ...) rather
    than filling fields by hand; they validate the parameter ranges.
    """

    kind: str
    alpha: Optional[float] = None
    beta: Optional[float] = None
    c: Optional[float] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown tail kind: {self.kind!r}")
        if self.kind in (PARETO, PARETO_LOG, PARETO_PERTURBED):
            if self.alpha is None or not self.alpha > 0:
                raise ValueError(f"{self.kind} requires alpha > 0")
        else:
            if self.alpha is not None:
                raise ValueError(f"{self.kind} does not take alpha")
        if self.kind == PARETO_LOG:
            if self.beta is None:
                raise ValueError("pareto_log requires beta")
            if self.beta < 0 and self.alpha + self.beta < 0:
                # monotonicity on (0,1) fails once the log factor decays
                # faster than the power grows
                raise ValueError("pareto_log requires alpha + beta >= 0")
        elif self.beta is not None:
            raise ValueError(f"{self.kind} does not take beta")
        if self.kind == PARETO_PERTURBED:
            if self.c is None or self.c < 0 or self.gamma is None or self.gamma < 0:
                raise ValueError("pareto_perturbed requires c >= 0 and gamma >= 0")
        elif self.c is not None or self.gamma is not None:
            raise ValueError(f"{self.kind} does not take c/gamma")

    @property
    def rv_index(self) -> float:
        """Variation index at 0: ``alpha`` for the power families, 0 or inf otherwise."""
        if self.kind == RAPID_ZERO:
            return math.inf
        if self.kind == SLOW_ZERO:
            return 0.0
        return float(self.alpha)

    @property
    def has_analytic_inverse(self) -> bool:
        return self.kind in (PARETO, RAPID_ZERO, SLOW_ZERO)

    def to_record(self) -> dict:
        """Flat key-value record (absent fields omitted); inverse of :func:`from_record`."""
        rec = {"kind": self.kind}
        for name in ("alpha", "beta", "c", "gamma"):
            value = getattr(self, name)
            if value is not None:
                rec[name] = float(value)
        return rec

    @staticmethod
    def from_record(rec: dict) -> "TailModel":
        known = {k: rec[k] for k in ("kind", "alpha", "beta", "c", "gamma") if k in rec}
        extra = set(rec) - set(known)
        if extra:
            raise ValueError(f"unknown tail model fields: {sorted(extra)}")
        return TailModel(**known)


def pareto(alpha: float) -> TailModel:
    return TailModel(PARETO, alpha=float(alpha))


def pareto_log(alpha: float, beta: float) -> TailModel:
    return TailModel(PARETO_LOG, alpha=float(alpha), beta=float(beta))


def pareto_perturbed(alpha: float, c: float, gamma: float) -> TailModel:
    return TailModel(PARETO_PERTURBED, alpha=float(alpha), c=float(c), gamma=float(gamma))


def rapid_zero() -> TailModel:
    return TailModel(RAPID_ZERO)


def slow_zero() -> TailModel:
    return TailModel(SLOW_ZERO)


def _validate_positive(values: np.ndarray, what: str):
    if not np.all(values > 0):
        raise ValueError(f"{what} must be strictly positive")


def eval_tail(model: TailModel, x):
    """Evaluate the tail function at ``x`` (scalar or array), elementwise.

    Raises ``ValueError`` for non-positive ``x``.  For the rapidly varying
    family the value saturates at :data:`TAIL_SATURATION` near 0 and a
    :class:`TailOverflowWarning` is issued.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    _validate_positive(arr, "x")
    a = model.alpha
    if model.kind == PARETO:
        out = arr ** -a
    elif model.kind == PARETO_LOG:
        out = arr ** -a
        low = arr < 1.0
        if np.any(low):
            out[low] *= (1.0 + np.log(1.0 / arr[low])) ** model.beta
    elif model.kind == PARETO_PERTURBED:
        out = arr ** -a
        low = arr <= 1.0
        out[low] *= 1.0 + model.c * arr[low] ** model.gamma
        out[~low] *= 1.0 + model.c
    elif model.kind == RAPID_ZERO:
        with np.errstate(over="ignore"):
            out = np.expm1(1.0 / arr)
        saturated = ~np.isfinite(out) | (out > TAIL_SATURATION)
        if np.any(saturated):
            out[saturated] = TAIL_SATURATION
            warnings.warn(
                "rapid_zero tail saturated at 1e300 near x=0", TailOverflowWarning
            )
    else:  # SLOW_ZERO
        out = np.log1p(1.0 / arr)
    return float(out[0]) if scalar else out


def log_inverse_tail(model: TailModel, y, spec: InverseSpec = DEFAULT_INVERSE_SPEC):
    """``log`` of the right-continuous inverse of the tail function.

    The inverse is ``inf{x > 0 : tail(x) <= y}``.  Working on the log scale
    keeps the slowly varying family usable deep in the small-time regime,
    where the inverse itself underflows float64.
    """
    arr = np.asarray(y, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    _validate_positive(arr, "y")
    a = model.alpha
    if model.kind == PARETO:
        out = -np.log(arr) / a
    elif model.kind == RAPID_ZERO:
        out = -np.log(np.log1p(arr))
    elif model.kind == SLOW_ZERO:
        # log of 1/(e^y - 1): stable at both ends
        small = arr <= 30.0
        out = np.empty_like(arr)
        out[small] = -np.log(np.expm1(arr[small]))
        big = ~small
        out[big] = -(arr[big] + np.log1p(-np.exp(-arr[big])))
    elif model.kind == PARETO_PERTURBED:
        limit = 1.0 + model.c  # tail value at x = 1
        out = np.empty_like(arr)
        outer = arr <= limit
        out[outer] = (np.log1p(model.c) - np.log(arr[outer])) / a
        inner = ~outer
        if np.any(inner):
            out[inner] = _bisect_log_inverse(model, arr[inner], spec)
    else:  # PARETO_LOG
        out = np.empty_like(arr)
        outer = arr <= 1.0  # tail value at x = 1 is exactly 1
        out[outer] = -np.log(arr[outer]) / a
        inner = ~outer
        if np.any(inner):
            out[inner] = _bisect_log_inverse(model, arr[inner], spec)
    return float(out[0]) if scalar else out


def eval_inverse_tail(model: TailModel, y, spec: InverseSpec = DEFAULT_INVERSE_SPEC):
    """Right-continuous inverse ``inf{x > 0 : tail(x) <= y}``.

    Closed form where the family admits one, otherwise bracketed bisection
    on log-x to relative tolerance ``spec.rel_tol``.
    """
    out = np.exp(log_inverse_tail(model, y, spec))
    return out


def _bisect_log_inverse(model: TailModel, y: np.ndarray, spec: InverseSpec) -> np.ndarray:
    """Monotone bisection for log(inverse tail), vectorized over y."""
    log4 = math.log(4.0)
    lo = np.full(y.shape, math.log(spec.bracket_lo))
    hi = np.full(y.shape, math.log(spec.bracket_hi))

    # geometric bracket expansion (factor 4) until tail(lo) >= y >= tail(hi)
    for attempt in range(spec.max_iter + 1):
        need_lo = eval_tail(model, np.exp(lo)) < y
        need_hi = eval_tail(model, np.exp(hi)) > y
        if not (np.any(need_lo) or np.any(need_hi)):
            break
        if attempt == spec.max_iter:
            i = int(np.argmax(need_lo | need_hi))
            raise InversionError(
                "bracket expansion exceeded max_iter",
                (float(np.exp(lo[i])), float(np.exp(hi[i]))),
            )
        lo[need_lo] -= log4
        hi[need_hi] += log4

    # bisection until the log-bracket is narrower than rel_tol
    width = float(np.max(hi - lo))
    tol = 0.5 * math.log1p(spec.rel_tol)
    n_steps = max(1, math.ceil(math.log2(max(width, tol) / tol)))
    if n_steps > spec.max_iter:
        i = int(np.argmax(hi - lo))
        raise InversionError(
            "bisection budget below requested tolerance",
            (float(np.exp(lo[i])), float(np.exp(hi[i]))),
        )
    for _ in range(n_steps):
        mid = 0.5 * (lo + hi)
        below = eval_tail(model, np.exp(mid)) <= y
        hi[below] = mid[below]
        lo[~below] = mid[~below]
    # hi is the side with tail(hi) <= y, matching the right-continuous inf
    return hi


def rv_limit_table(
    model: TailModel,
    u: float,
    y: float,
    t_grid,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
) -> np.ndarray:
    """``t * tail(u * inverse_tail(y/t))`` along a decreasing grid of t.

    For a power-law family with index ``alpha`` the values converge to
    ``u**-alpha * y`` as t shrinks (exactly, for pure Pareto); the slow and
    rapid families converge to ``y`` (u > 1) and diverge (u < 1) instead.
    """
    if not (u > 0 and y > 0):
        raise ValueError("u and y must be positive")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or not np.all(np.diff(t) < 0):
        raise ValueError("t_grid must be a strictly decreasing sequence")
    _validate_positive(t, "t_grid")
    lx = math.log(u) + log_inverse_tail(model, y / t, spec)
    if model.kind == SLOW_ZERO:
        # the inverse underflows float64 deep in the grid; evaluate
        # log1p(exp(-lx)) from the log directly
        neg = -lx
        vals = np.where(neg > 700.0, neg, np.log1p(np.exp(np.minimum(neg, 700.0))))
        return t * vals
    return t * eval_tail(model, np.exp(lx))
