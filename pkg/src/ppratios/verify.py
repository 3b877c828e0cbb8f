"""Statistical harness confronting finite-time simulations with the limit laws.

Each check simulates trials with per-trial reproducible streams, computes
goodness-of-fit distances against the relevant closed-form law, and returns
a :class:`VerifyReport` that serializes to JSON/CSV.  Pass thresholds follow
one rule: targets that are exact at every t for the pure power family use
the 1% asymptotic KS critical value ``1.63/sqrt(trials)``; perturbed-tail
targets use an absolute bound at the smallest t (finite-t bias never fully
vanishes).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import kolmogorov as _ks_sf

from . import samplers as sp
from ._special import betainc_reg, chi2_sf, gammainc_lower
from .rng import uniform_grid
from .tail_models import PARETO, RAPID_ZERO, SLOW_ZERO, InverseSpec, DEFAULT_INVERSE_SPEC, TailModel

#: 1% asymptotic critical coefficient for the Kolmogorov-Smirnov statistic.
KS_COEFF_1PCT = 1.63

REGULARLY_VARYING = "regularly_varying"
RAPIDLY_VARYING = "rapidly_varying"
SLOWLY_VARYING = "slowly_varying"

WLAW = "wlaw"
RATIO_TAIL_N1 = "ratio_tail_n1"
SUCCESSIVE_RATIOS = "successive_ratios"
GAMMA_NC = "gamma_nc"
SWEEP_TARGETS = frozenset({WLAW, RATIO_TAIL_N1, SUCCESSIVE_RATIOS, GAMMA_NC})


class ClassificationError(RuntimeError):
    """Tail classification found conflicting evidence (t is not small enough)."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(f"{message}; diagnostics: {diagnostics}")
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class EmpiricalDistribution:
    """A sorted sample with its size; the unit the distances operate on."""

    sorted_values: np.ndarray
    n_samples: int

    @staticmethod
    def from_samples(values) -> "EmpiricalDistribution":
        arr = np.sort(np.asarray(values, dtype=float))
        return EmpiricalDistribution(sorted_values=arr, n_samples=arr.size)


@dataclass
class VerifyReport:
    """Per-experiment statistics plus the pass verdict at the final grid point."""

    experiment_id: str
    t_grid: list
    statistics: list
    passed: bool
    threshold: float
    seed: int
    details: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "t_grid": list(self.t_grid),
            "statistics": _jsonable(self.statistics),
            "pass": bool(self.passed),
            "threshold": self.threshold,
            "seed": self.seed,
            "details": _jsonable(self.details),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def csv_rows(self):
        """Companion per-statistic rows: (keys, list of value tuples)."""
        keys = sorted({k for rec in self.statistics for k in rec})
        rows = [tuple(rec.get(k, "") for k in keys) for rec in self.statistics]
        return keys, rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass
class TailClassification:
    """Trichotomy verdict with the evidence that produced it."""

    verdict: str
    alpha_hat: Optional[float]
    evidence: dict

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "alpha_hat": self.alpha_hat,
            "evidence": _jsonable(self.evidence),
        }


# ---------------------------------------------------------------------------
# distances


def ks_distance(emp: EmpiricalDistribution, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov statistic with both one-sided corrections."""
    if emp.n_samples < 10:
        raise ValueError("need at least 10 samples")
    x = emp.sorted_values
    n = emp.n_samples
    f = np.asarray(cdf(x), dtype=float)
    grid = np.arange(1, n + 1) / n
    d_plus = np.max(grid - f)
    d_minus = np.max(f - (grid - 1.0 / n))
    return float(max(d_plus, d_minus))


def ks_p_value(stat: float, n: int) -> float:
    """Asymptotic p-value of the one-sample KS statistic."""
    return float(_ks_sf(stat * math.sqrt(n)))


def two_sample_ks(x, y) -> float:
    """Two-sample KS statistic (sup-distance between the two ECDFs)."""
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    pooled = np.concatenate([x, y])
    fx = np.searchsorted(x, pooled, side="right") / x.size
    fy = np.searchsorted(y, pooled, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


def two_sample_threshold(n1: int, n2: int, coeff: float = KS_COEFF_1PCT) -> float:
    return coeff * math.sqrt((n1 + n2) / (n1 * n2))


def chi_square_counts(observed: np.ndarray, expected: np.ndarray, min_expected: float = 5.0):
    """Chi-square GOF on count vectors, lumping the tail so expectations stay >= min_expected.

    Returns (statistic, p_value, dof).
    """
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    # lump trailing cells until every expected count is big enough
    while exp.size > 2 and exp[-1] < min_expected:
        exp = np.concatenate([exp[:-2], [exp[-2] + exp[-1]]])
        obs = np.concatenate([obs[:-2], [obs[-2] + obs[-1]]])
    keep = exp >= min_expected
    if not np.all(keep):
        obs, exp = obs[keep], exp[keep]
    if exp.size < 2:
        raise ValueError("too few cells with adequate expected counts")
    # renormalize the expectation to the observed total (lumping truncation)
    exp = exp * obs.sum() / exp.sum()
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = exp.size - 1
    return stat, chi2_sf(stat, dof), dof


def chi_square_independence(u: np.ndarray, v: np.ndarray, grid: int = 10):
    """Occupancy-grid chi-square independence test on two ~Uniform(0,1) samples.

    Coarsens the grid automatically while any expected cell count is < 5.
    Returns (statistic, p_value, grid_used).
    """
    n = u.size
    g = grid
    while g > 2 and n / (g * g) < 5.0:
        g //= 2
    iu = np.minimum((u * g).astype(np.int64), g - 1)
    iv = np.minimum((v * g).astype(np.int64), g - 1)
    counts = np.bincount(iu * g + iv, minlength=g * g).astype(float).reshape(g, g)
    row = counts.sum(axis=1, keepdims=True)
    col = counts.sum(axis=0, keepdims=True)
    expected = row * col / n
    stat = float(np.sum((counts - expected) ** 2 / expected))
    dof = (g - 1) * (g - 1)
    return stat, chi2_sf(stat, dof), g


# ---------------------------------------------------------------------------
# limit-law CDF callables


def _wlaw_cdf(r: int, n: int, alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda w: betainc_reg(r, n, np.clip(w, 0.0, 1.0) ** alpha)


def _gamma_cdf(k: int) -> Callable[[np.ndarray], np.ndarray]:
    return lambda z: gammainc_lower(k, z)


def default_threshold(model: TailModel, trials: int) -> float:
    """1% KS critical value for exact (pure power) targets, 0.01 otherwise."""
    if model.kind == PARETO:
        return KS_COEFF_1PCT / math.sqrt(trials)
    return 0.01


# ---------------------------------------------------------------------------
# verification operations


def convergence_sweep(
    model: TailModel,
    r: int,
    n: int,
    t_grid: Sequence[float],
    trials: int,
    target: str,
    seed: int,
    threshold: Optional[float] = None,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
) -> VerifyReport:
    """KS distance to the selected limit law along a decreasing grid of t.

    Targets: ``wlaw`` (pivot ratio vs its Beta-power CDF), ``ratio_tail_n1``
    (above-1 ratio vs the power tail), ``successive_ratios`` (per-coordinate
    KS, statistic is the worst coordinate), ``gamma_nc`` (time scales
    t*tail(k-th point) vs Gamma(k, 1), worst k in r..r+n).
    """
    t_arr = [float(t) for t in t_grid]
    if len(t_arr) == 0 or any(b >= a for a, b in zip(t_arr, t_arr[1:])):
        raise ValueError("t_grid must be strictly decreasing")
    if trials < 10_000:
        raise ValueError("trials must be >= 10^4")
    if target not in SWEEP_TARGETS:
        raise ValueError(f"unknown sweep target: {target!r}")
    alpha = model.rv_index
    if not (0 < alpha < math.inf):
        raise ValueError("convergence sweeps need a finite positive tail index")
    if threshold is None:
        threshold = default_threshold(model, trials)

    stats = []
    for it, t in enumerate(t_arr):
        base = it * trials
        entry = {"t": t}
        if target == WLAW:
            w = sp.pivot_ratio_batch(model, t, r, n, trials, seed, base, spec, threads)
            emp = EmpiricalDistribution.from_samples(w)
            entry["ks"] = ks_distance(emp, _wlaw_cdf(r, n, alpha))
            entry.update(_uniformity_chi2(betainc_reg(r, n, emp.sorted_values**alpha)))
        elif target == RATIO_TAIL_N1:
            y = np.exp(sp.log_trim_ratio_batch(model, t, r, trials, seed, base, spec, threads))
            emp = EmpiricalDistribution.from_samples(y)
            entry["ks"] = ks_distance(emp, lambda x: 1.0 - x ** (-r * alpha))
            entry.update(_uniformity_chi2(1.0 - emp.sorted_values ** (-r * alpha)))
        elif target == SUCCESSIVE_RATIOS:
            ratios = sp.successive_ratio_batch(model, t, max(r, 1), n, trials, seed, base, spec, threads)
            per_k = []
            for j in range(n):
                k = max(r, 1) + j
                emp = EmpiricalDistribution.from_samples(ratios[:, j])
                per_k.append(ks_distance(emp, lambda y, k=k: np.clip(y, 0, 1) ** (k * alpha)))
            entry["ks"] = max(per_k)
            entry["ks_per_coordinate"] = per_k
        else:  # GAMMA_NC
            kmax = r + n
            scales = sp.time_scale_batch(model, t, kmax, trials, seed, base, spec, threads)
            per_k = []
            for k in range(max(r, 1), kmax + 1):
                emp = EmpiricalDistribution.from_samples(scales[:, k - 1])
                per_k.append(ks_distance(emp, _gamma_cdf(k)))
            entry["ks"] = max(per_k)
            entry["ks_per_k"] = per_k
        entry["p_value"] = ks_p_value(entry["ks"], trials)
        stats.append(entry)

    passed = stats[-1]["ks"] <= threshold
    return VerifyReport(
        experiment_id=f"sweep_{target}_{model.kind}_r{r}_n{n}",
        t_grid=t_arr,
        statistics=stats,
        passed=bool(passed),
        threshold=float(threshold),
        seed=seed,
        details={
            "model": model.to_record(),
            "r": r, "n": n, "trials": trials, "target": target,
            "threshold_rule": "1.63/sqrt(trials) for exact targets, 0.01 absolute otherwise",
        },
    )


def _uniformity_chi2(pit_values: np.ndarray, bins: int = 20) -> dict:
    """Equiprobable-bin chi-square of probability-integral-transformed values."""
    idx = np.minimum((pit_values * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(float)
    expected = np.full(bins, pit_values.size / bins)
    stat, p, _ = chi_square_counts(counts, expected)
    return {"chi2": stat, "chi2_p_value": p}


def independence_check(
    model: TailModel,
    t: float,
    r: int,
    n: int,
    trials: int,
    seed: int,
    grid: int = 10,
    p_threshold: float = 1e-3,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
) -> VerifyReport:
    """Pairwise chi-square independence of successive ratios after their PIT.

    Each ratio R_k is mapped through its limit CDF y**(k*alpha) to a
    near-uniform; adjacent pairs are tested on an occupancy grid.  For the
    rapidly/slowly varying families the ratios collapse to a point mass and
    the check reports that verdict instead of a chi-square.
    """
    if n < 2:
        raise ValueError("independence check needs n >= 2")
    if r < 1:
        raise ValueError("r must be >= 1")
    alpha = model.rv_index

    if model.kind in (RAPID_ZERO, SLOW_ZERO):
        ratios = sp.successive_ratio_batch(model, t, r, n, trials, seed, 0, spec, threads)
        med = float(np.median(ratios))
        limit = 1.0 if model.kind == RAPID_ZERO else 0.0
        boundary = 1.0 - _rapid_median_allowance(t) if model.kind == RAPID_ZERO else 0.05
        collapsed = med > boundary if model.kind == RAPID_ZERO else med < boundary
        return VerifyReport(
            experiment_id=f"independence_{model.kind}_r{r}_n{n}",
            t_grid=[float(t)],
            statistics=[{"t": t, "median_ratio": med, "point_mass_at": limit}],
            passed=bool(collapsed),
            threshold=boundary,
            seed=seed,
            details={"model": model.to_record(), "verdict": f"point_mass_at_{limit:g}",
                     "r": r, "n": n, "trials": trials},
        )

    ratios = sp.successive_ratio_batch(model, t, r, n, trials, seed, 0, spec, threads)
    pit = ratios ** ((np.arange(n) + r) * alpha)[None, :]
    stats = []
    worst = None
    for j in range(n - 1):
        stat, p, g = chi_square_independence(pit[:, j], pit[:, j + 1], grid)
        rec = {"pair": [r + j, r + j + 1], "chi2": stat, "p_value": p, "grid": g, "t": t}
        stats.append(rec)
        if worst is None or p < worst["p_value"]:
            worst = rec
    marginal_ks = [
        ks_distance(EmpiricalDistribution.from_samples(pit[:, j]), lambda u: np.clip(u, 0, 1))
        for j in range(n)
    ]
    passed = worst["p_value"] > p_threshold
    return VerifyReport(
        experiment_id=f"independence_{model.kind}_r{r}_n{n}",
        t_grid=[float(t)],
        statistics=stats,
        passed=bool(passed),
        threshold=p_threshold,
        seed=seed,
        details={
            "model": model.to_record(), "r": r, "n": n, "trials": trials,
            "max_chi2": worst["chi2"], "min_p_value": worst["p_value"],
            "marginal_pit_ks": marginal_ks,
        },
    )


def identity_checks(
    alpha: float,
    r: int,
    n: int,
    trials: int,
    seed: int,
    s_bin: tuple[float, float] = (0.45, 0.55),
    coeff: float = KS_COEFF_1PCT,
) -> VerifyReport:
    """Monte Carlo distributional identities of the limit laws (two-sample KS).

    (a) the product of independent successive-ratio limits matches the
        Beta(r, n)**(1/alpha) pivot law;
    (b) the sum of the r=0 above-1 ratios matches a sum of n-1 iid Pareto
        variables;
    (c) given the pivot value, the above-1 ratios match order statistics of
        shifted uniforms raised to -1/alpha (conditioning by binning, the
        synthetic copy conditioned at each trial's own pivot).
    """
    if trials < 100_000:
        raise ValueError("identity checks are calibrated for trials >= 10^5")
    if r < 1 or n < 1:
        raise ValueError("require r >= 1 and n >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    stats = []

    # (a) product identity
    ks_units = np.arange(r, r + n)
    u = uniform_grid(seed, 0, trials, n)
    prod = np.prod(u ** (1.0 / (ks_units * alpha))[None, :], axis=1)
    g = sp.gamma_matrix(seed, trials, r + n, stream_start=trials)
    w_ref = (g[:, r - 1] / g[:, r + n - 1]) ** (1.0 / alpha)
    ks_a = two_sample_ks(prod, w_ref)
    thr_ab = two_sample_threshold(trials, trials, coeff)
    stats.append({"name": "product_of_ratio_limits", "ks": ks_a, "threshold": thr_ab,
                  "pass": ks_a <= thr_ab})

    # (b) sum representation at r=0 (needs n >= 2 for a nonempty sum)
    if n >= 2:
        g0 = sp.gamma_matrix(seed, trials, n, stream_start=2 * trials)
        lhs = np.sum((g0[:, :-1] / g0[:, -1:]) ** (-1.0 / alpha), axis=1)
        u_p = uniform_grid(seed, 3 * trials, trials, n - 1)
        rhs = np.sum(u_p ** (-1.0 / alpha), axis=1)
        ks_b = two_sample_ks(lhs, rhs)
        stats.append({"name": "trimmed_sum_random_walk", "ks": ks_b, "threshold": thr_ab,
                      "pass": ks_b <= thr_ab})

    # (c) conditional order-statistics identity within the pivot bin
    if n >= 2:
        g = sp.gamma_matrix(seed, trials, r + n, stream_start=4 * trials)
        b = g[:, r - 1] / g[:, r + n - 1]
        keep = (b > s_bin[0]) & (b < s_bin[1])
        idx = np.flatnonzero(keep)
        if idx.size < 1_000:
            raise ValueError("conditioning bin too narrow for the trial budget")
        ratios = (g[idx, r : r + n - 1] / g[idx, r + n - 1 : r + n]) ** (-1.0 / alpha)
        u_c = uniform_grid(seed, 5 * trials + 0, idx.size, n - 1)
        synth = (b[idx, None] + (1.0 - b[idx, None]) * u_c) ** (-1.0 / alpha)
        synth = -np.sort(-synth, axis=1)  # decreasing order statistics
        worst = 0.0
        for j in range(n - 1):
            worst = max(worst, two_sample_ks(ratios[:, j], synth[:, j]))
        thr_c = two_sample_threshold(idx.size, idx.size, coeff)
        stats.append({"name": "conditional_uniform_orderstats", "ks": worst,
                      "threshold": thr_c, "pass": worst <= thr_c,
                      "bin": list(s_bin), "bin_count": int(idx.size)})

    passed = all(rec["pass"] for rec in stats)
    return VerifyReport(
        experiment_id=f"identities_a{alpha:g}_r{r}_n{n}",
        t_grid=[],
        statistics=stats,
        passed=bool(passed),
        threshold=thr_ab,
        seed=seed,
        details={"alpha": alpha, "r": r, "n": n, "trials": trials},
    )


def nb_functional_check(
    n: int,
    alpha: float,
    probe,
    epsilon: float,
    trials: int,
    method: str,
    seed: int,
    rel_err_threshold: float = 5e-3,
    p_threshold: float = 1e-3,
    threads: int = 1,
) -> VerifyReport:
    """Empirical Laplace functional and point-count law of the sampled limit process.

    Compares (i) the mean of exp(-sum f(points)) against the closed-form
    functional and (ii) the count of points above the probe's lower edge
    against the negative binomial pmf with success probability a**alpha.
    """
    from .limit_laws import nb_count_pmf, nb_laplace  # local import to avoid cycles

    if probe.a < epsilon or probe.b > 1.0:
        raise ValueError("probe must be supported inside (epsilon, 1)")
    counts, sums = sp.negbin_batch(
        n, alpha, epsilon, method, trials, seed, probe=probe, threads=threads
    )
    finite_amp = math.isfinite(probe.amplitude)
    emp = float(np.mean(np.exp(-sums))) if finite_amp else float(np.mean(counts == 0))
    expected = nb_laplace(n, alpha, probe)
    rel_err = abs(emp - expected) / expected if expected > 0 else math.inf

    # count law in (a, 1) with a = epsilon (counts are taken at the sampler
    # truncation, so epsilon plays the role of the interval edge)
    kmax = int(counts.max())
    observed = np.bincount(counts, minlength=kmax + 1).astype(float)
    expected_counts = trials * nb_count_pmf(n, alpha, epsilon, kmax)
    chi2, p_count, dof = chi_square_counts(observed, expected_counts)
    p_succ = epsilon**alpha

    void_expected = p_succ**n
    void_emp = float(np.mean(counts == 0))
    void_se = math.sqrt(void_expected * (1 - void_expected) / trials)

    passed = (rel_err <= rel_err_threshold) and (p_count > p_threshold)
    return VerifyReport(
        experiment_id=f"nb_functional_{method}_n{n}_a{alpha:g}",
        t_grid=[],
        statistics=[{
            "empirical_functional": emp, "expected_functional": expected,
            "rel_err": rel_err, "chi2": chi2, "p_value": p_count, "dof": dof,
        }],
        passed=bool(passed),
        threshold=rel_err_threshold,
        seed=seed,
        details={
            "n": n, "alpha": alpha, "epsilon": epsilon, "method": method,
            "trials": trials, "void_empirical": void_emp,
            "void_expected": void_expected, "void_se": void_se,
            "probe": {"amplitude": probe.amplitude, "a": probe.a, "b": probe.b,
                      "form": probe.form},
        },
    )


def estimate_alpha(samples, r: int) -> tuple[float, float]:
    """Maximum-likelihood tail index from above-1 ratio samples.

    The limiting tail ``x**(-r*alpha)`` makes log-ratios exponential with
    rate ``r*alpha``; the MLE is ``1 / (r * mean(log samples))`` with
    standard error ``alpha_hat / sqrt(n)``.
    """
    if isinstance(samples, EmpiricalDistribution):
        values = samples.sorted_values
    else:
        values = np.asarray(samples, dtype=float)
    if values.size < 100:
        raise ValueError("need at least 100 samples")
    if np.any(values < 1.0):
        raise ValueError("ratio samples must all be >= 1")
    if r < 1:
        raise ValueError("r must be >= 1")
    mean_log = float(np.mean(np.log(values)))
    if mean_log <= 0.0:
        raise ValueError("degenerate sample: all ratios equal 1")
    alpha_hat = 1.0 / (r * mean_log)
    return alpha_hat, alpha_hat / math.sqrt(values.size)


def _rapid_median_allowance(t: float, kappa: float = 1.5) -> float:
    """Half-width of the collapse region around 1 at time t: kappa/log(1/t).

    Ratios of a rapidly varying tail approach 1 only at 1/log(1/t) speed,
    so the boundary must shrink with t rather than sit at a fixed delta.
    """
    return kappa / max(math.log(1.0 / t), 1.0)


def classify_tail(
    model: TailModel,
    t: float,
    r: int,
    trials: int,
    seed: int,
    delta: float = 0.05,
    eta: float = 0.05,
    big_m: float = 1e3,
    kappa: float = 1.5,
    median_boundary: Optional[float] = None,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
) -> TailClassification:
    """Three-way variation classifier from the above-1 ratio at one small t.

    Evidence is the log-ratio sample LY = log(r-th / (r+1)-th point):
    most mass beyond ``big_m``  -> slowly varying; median inside the
    shrinking collapse region around 1 -> rapidly varying; an interior
    median with sane tails -> regularly varying with the MLE tail index.
    ``median_boundary`` overrides the default ``1 + kappa/log(1/t)``.
    Conflicting evidence raises :class:`ClassificationError`.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if trials < 1_000:
        raise ValueError("classification needs at least 10^3 trials")
    ly = sp.log_trim_ratio_batch(model, t, r, trials, seed, 0, spec, threads)
    q25, med_ly, q75 = np.quantile(ly, [0.25, 0.5, 0.75])
    p_low = float(np.mean(ly < math.log1p(delta)))
    p_high = float(np.mean(ly > math.log(big_m)))
    boundary = median_boundary if median_boundary is not None else 1.0 + _rapid_median_allowance(t, kappa)
    median_ratio = math.exp(med_ly) if med_ly < 700.0 else math.inf
    evidence = {
        "t": t, "r": r, "trials": trials,
        "median_ratio": median_ratio,
        "log_ratio_quartiles": [float(q25), float(med_ly), float(q75)],
        "p_within_delta_of_1": p_low,
        "p_beyond_m": p_high,
        "median_boundary": boundary,
        "delta": delta, "eta": eta, "big_m": big_m,
    }
    if p_high > 1.0 - eta:
        return TailClassification(SLOWLY_VARYING, None, evidence)
    if median_ratio > big_m:
        raise ClassificationError(
            "median beyond the slow-variation bound but the upper tail is "
            "not consistently heavy; t not small enough", evidence)
    if p_low > 1.0 - eta or median_ratio < boundary:
        return TailClassification(RAPIDLY_VARYING, None, evidence)
    alpha_hat, stderr = estimate_alpha(np.exp(ly), r)
    evidence["alpha_stderr"] = stderr
    return TailClassification(REGULARLY_VARYING, alpha_hat, evidence)


def z_insensitivity_check(
    model: TailModel,
    t: float,
    r: int,
    n: int,
    trials: int,
    seed: int,
    n_bins: int = 4,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
) -> VerifyReport:
    """Pivot-ratio law checked inside quantile bins of the pivot time scale.

    The limit law of the pivot ratio does not depend on the conditioning
    level z; binning trials by z = t*tail(r+n-th point) into quantile bins,
    the per-bin KS statistics against the closed-form law must agree within
    twice the per-bin KS noise level.
    """
    alpha = model.rv_index
    w, z, _ = sp.pivot_ratio_with_scales_batch(
        model, t, r, n, trials, seed, 0, spec, threads
    )
    edges = np.quantile(z, np.linspace(0, 1, n_bins + 1))
    cdf = _wlaw_cdf(r, n, alpha)
    per_bin = []
    for b in range(n_bins):
        lo, hi = edges[b], edges[b + 1]
        mask = (z >= lo) & (z <= hi) if b == n_bins - 1 else (z >= lo) & (z < hi)
        emp = EmpiricalDistribution.from_samples(w[mask])
        per_bin.append({
            "bin": b, "z_lo": float(lo), "z_hi": float(hi),
            "count": int(emp.n_samples), "ks": ks_distance(emp, cdf),
        })
    ks_values = [rec["ks"] for rec in per_bin]
    noise = KS_COEFF_1PCT / math.sqrt(trials / n_bins)
    spread = max(ks_values) - min(ks_values)
    passed = spread < 2.0 * noise
    pooled = ks_distance(EmpiricalDistribution.from_samples(w), cdf)
    return VerifyReport(
        experiment_id=f"z_insensitivity_{model.kind}_r{r}_n{n}",
        t_grid=[float(t)],
        statistics=per_bin,
        passed=bool(passed),
        threshold=2.0 * noise,
        seed=seed,
        details={
            "model": model.to_record(), "r": r, "n": n, "trials": trials,
            "ks_spread": spread, "per_bin_noise": noise, "pooled_ks": pooled,
            "bin_rule": "quantile bins of the pivot time scale",
        },
    )


def conditional_gamma_check(
    model: TailModel,
    t: float,
    r: int,
    n: int,
    w_center: float,
    half_width: float,
    trials: int,
    seed: int,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
) -> VerifyReport:
    """Conditional law of the top-point time scale given the pivot ratio.

    Selects trials with pivot ratio within ``half_width`` of ``w_center``
    and probability-integral-transforms each trial's time scale through the
    Gamma(r+n) conditional CDF at the trial's own pivot value; the PIT
    sample must be uniform (KS below the 1% critical value for the bin).
    The bin-center KS is reported as a diagnostic.
    """
    if not (0 < w_center < 1) or not (0 < half_width < min(w_center, 1 - w_center)):
        raise ValueError("conditioning window must sit strictly inside (0, 1)")
    alpha = model.rv_index
    w, _, a_scale = sp.pivot_ratio_with_scales_batch(
        model, t, r, n, trials, seed, 0, spec, threads
    )
    mask = np.abs(w - w_center) <= half_width
    idx = np.flatnonzero(mask)
    if idx.size < 1_000:
        raise ValueError("conditioning bin too narrow for the trial budget")
    pit = gammainc_lower(r + n, w[idx] ** -alpha * a_scale[idx])
    emp = EmpiricalDistribution.from_samples(pit)
    ks_pit = ks_distance(emp, lambda u: np.clip(u, 0.0, 1.0))
    threshold = KS_COEFF_1PCT / math.sqrt(idx.size)
    # the bin-center comparison carries O(half_width) discretization bias
    center_cdf = lambda zv: gammainc_lower(r + n, w_center**-alpha * zv)
    ks_center = ks_distance(EmpiricalDistribution.from_samples(a_scale[idx]), center_cdf)
    return VerifyReport(
        experiment_id=f"conditional_gamma_{model.kind}_r{r}_n{n}",
        t_grid=[float(t)],
        statistics=[{
            "t": t, "ks": ks_pit, "p_value": ks_p_value(ks_pit, idx.size),
            "bin_count": int(idx.size),
        }],
        passed=bool(ks_pit <= threshold),
        threshold=threshold,
        seed=seed,
        details={
            "model": model.to_record(), "r": r, "n": n, "trials": trials,
            "w_center": w_center, "half_width": half_width,
            "bin_center_ks_diagnostic": ks_center,
            "pit_rule": "per-trial conditioning at the trial's own pivot value",
        },
    )
