"""Exact samplers for ordered points, ratio patterns, and the limit process.

Everything is driven by the inverse-tail representation: the i-th largest
point of the intensity-``t * tail`` Poisson process equals
``inverse_tail(gamma_i / t)`` where ``gamma_1 < gamma_2 < ...`` are unit-rate
Poisson arrivals.  Each trial owns one counter-based stream, and every
sampler exists in two bit-identical forms:

* a single-trial form taking an :class:`~ppratios.rng.RngStream`, and
* a vectorized batch form where row ``i`` replays stream ``stream_start+i``.

Ordered points are handled on the log scale internally so the slowly
varying family stays finite deep into the small-time regime.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .rng import RngStream, uniform_block, uniform_grid, uniforms_at
from .tail_models import (
    DEFAULT_INVERSE_SPEC,
    InverseSpec,
    TailModel,
    eval_tail,
    log_inverse_tail,
)

LIMIT_RATIOS = "limit_ratios"
MIXED_POISSON = "mixed_poisson"
NB_METHODS = frozenset({LIMIT_RATIOS, MIXED_POISSON})

_CHUNK = 64  # column budget per extension round of open-ended samplers
_ROW_BLOCK = 1 << 17  # rows per thread task in batch samplers


class TruncationError(RuntimeError):
    """Open-ended sampling hit the point cap before crossing epsilon."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass
class OrderedSample:
    """One realization of the largest points of the process at time t."""

    t: float
    gammas: np.ndarray  # increasing unit-rate Poisson arrivals
    points: np.ndarray  # non-increasing ordered points
    count: int


@dataclass
class RatioConfiguration:
    """The ratio pattern normalized by the (r+n)-th largest point.

    ``above`` holds the n-1 ratios >= 1, largest first; ``below`` the ratios
    in (epsilon, 1); ``w_rn`` the pivot-to-top ratio (absent when r = 0).
    """

    r: int
    n: int
    above: np.ndarray
    below: np.ndarray
    epsilon: float
    w_rn: Optional[float] = None


@dataclass
class NBSample:
    """Points in (epsilon, 1) of one draw of the limiting point process."""

    n: int
    alpha: float
    points: np.ndarray
    epsilon: float
    method: str


def _validate_nb_args(n: int, alpha: float, epsilon: float, method: str):
    if n < 1:
        raise ValueError("n must be >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie strictly inside (0, 1)")
    if method not in NB_METHODS:
        raise ValueError(f"unknown sampler method: {method!r}")


# ---------------------------------------------------------------------------
# single-trial samplers


def sample_gamma_arrivals(count: int, rng: RngStream) -> np.ndarray:
    """First ``count`` arrivals of a unit-rate Poisson process."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return np.cumsum(rng.exponentials(count))


def sample_ordered_points(
    model: TailModel,
    t: float,
    count: int,
    rng: RngStream,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
) -> OrderedSample:
    """The ``count`` largest points of the Poisson process at time t, exactly."""
    if not t > 0:
        raise ValueError("t must be positive")
    gammas = sample_gamma_arrivals(count, rng)
    points = np.exp(log_inverse_tail(model, gammas / t, spec))
    return OrderedSample(t=float(t), gammas=gammas, points=points, count=count)


def sample_ratio_configuration(
    model: TailModel,
    t: float,
    r: int,
    n: int,
    epsilon: float,
    rng: RngStream,
    cap: int = 1_000_000,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
) -> RatioConfiguration:
    """One ratio configuration, extending arrivals until the below ratios cross epsilon."""
    if r < 0 or n < 1:
        raise ValueError("require r >= 0 and n >= 1")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie strictly inside (0, 1)")
    if cap < r + n + 1:
        raise ValueError("cap must be at least r + n + 1")
    if not t > 0:
        raise ValueError("t must be positive")

    gammas = np.cumsum(rng.exponentials(r + n))
    lp = log_inverse_tail(model, gammas / t, spec)
    pivot = lp[r + n - 1]
    above = np.exp(lp[r : r + n - 1] - pivot)
    w_rn = float(np.exp(pivot - lp[r - 1])) if r >= 1 else None
    log_eps = math.log(epsilon)

    below: list[np.ndarray] = []
    last = gammas[-1]
    total = r + n
    crossed = False
    while not crossed:
        if total >= cap:
            partial = RatioConfiguration(
                r=r, n=n, above=above,
                below=np.concatenate(below) if below else np.empty(0),
                epsilon=epsilon, w_rn=w_rn,
            )
            raise TruncationError(
                f"cap={cap} reached before the epsilon={epsilon} crossing "
                "(epsilon or cap too small)", partial=partial,
            )
        chunk = min(_CHUNK, cap - total)
        arr = last + np.cumsum(rng.exponentials(chunk))
        log_ratios = log_inverse_tail(model, arr / t, spec) - pivot
        keep = log_ratios > log_eps
        if np.all(keep):
            below.append(np.exp(log_ratios))
            last = arr[-1]
            total += chunk
        else:
            stop = int(np.argmin(keep))
            below.append(np.exp(log_ratios[:stop]))
            total += stop + 1
            crossed = True
    return RatioConfiguration(
        r=r, n=n, above=above,
        below=np.concatenate(below) if below else np.empty(0),
        epsilon=epsilon, w_rn=w_rn,
    )


def sample_negbin_process(
    n: int,
    alpha: float,
    epsilon: float,
    method: str,
    rng: RngStream,
    cap: int = 1_000_000,
) -> NBSample:
    """One draw of the limiting below-1 point process, restricted to (epsilon, 1).

    ``limit_ratios`` realizes the points as transformed Poisson arrival
    ratios; ``mixed_poisson`` draws a gamma-mixed Poisson count and then
    i.i.d. points from the normalized base density.  Both constructions
    target the identical law.
    """
    _validate_nb_args(n, alpha, epsilon, method)
    seed, stream = rng.master_seed, rng.stream_index
    inv_alpha = 1.0 / alpha
    ea = epsilon**-alpha
    e0 = -np.log(uniform_grid(seed, stream, 1, n, 0)[0])
    g = float(e0.sum())
    bound = g * (ea - 1.0)

    if method == LIMIT_RATIOS:
        points: list[np.ndarray] = []
        s = 0.0
        offset = n
        done = False
        while not done:
            if offset - n >= cap:
                raise TruncationError(f"cap={cap} reached in limit_ratios sampler")
            u = uniform_grid(seed, stream, 1, _CHUNK, offset)[0]
            arr = s + np.cumsum(-np.log(u))
            within = arr <= bound
            if np.all(within):
                points.append((1.0 + arr / g) ** -inv_alpha)
                s = arr[-1]
                offset += _CHUNK
            else:
                stop = int(np.argmin(within))
                points.append((1.0 + arr[:stop] / g) ** -inv_alpha)
                offset += stop + 1
                done = True
        pts = np.concatenate(points) if points else np.empty(0)
        rng._cursor = offset
        return NBSample(n=n, alpha=alpha, points=pts, epsilon=epsilon, method=method)

    # mixed_poisson: count arrivals below the gamma-scaled mean, then place
    # i.i.d. points by inverse CDF of the truncated base density
    count = 0
    s = 0.0
    offset = n
    while True:
        if count >= cap:
            raise TruncationError(f"cap={cap} reached in mixed_poisson sampler")
        u = uniform_grid(seed, stream, 1, _CHUNK, offset)[0]
        arr = s + np.cumsum(-np.log(u))
        within = arr <= bound
        if np.all(within):
            count += _CHUNK
            s = arr[-1]
            offset += _CHUNK
        else:
            stop = int(np.argmin(within))
            count += stop
            offset += stop + 1
            break
    u = uniform_grid(seed, stream, 1, count, offset)[0] if count else np.empty(0)
    pts = (ea - u * (ea - 1.0)) ** -inv_alpha
    rng._cursor = offset + count
    return NBSample(n=n, alpha=alpha, points=pts, epsilon=epsilon, method=method)


# ---------------------------------------------------------------------------
# batch samplers (row i of a batch replays stream stream_start + i)


def _map_row_blocks(fn: Callable[[int, int], np.ndarray], n_trials: int, threads: int):
    """Apply fn(row_offset, n_rows) over fixed row blocks, concatenating in order.

    Blocking bounds peak memory and gives scheduling-independent results:
    block boundaries are fixed, so the output is identical for any thread
    count.
    """
    spans = [(s, min(s + _ROW_BLOCK, n_trials) - s) for s in range(0, n_trials, _ROW_BLOCK)]
    if len(spans) == 1:
        return fn(*spans[0])
    if threads <= 1:
        parts = [fn(*span) for span in spans]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda sp: fn(*sp), spans))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(cols, axis=0) for cols in zip(*parts))
    return np.concatenate(parts, axis=0)


def gamma_matrix(
    master_seed: int,
    n_trials: int,
    count: int,
    stream_start: int = 0,
    threads: int = 1,
) -> np.ndarray:
    """(n_trials, count) matrix of Poisson arrivals; row i replays stream i."""

    def block(offset: int, rows: int) -> np.ndarray:
        u = uniform_grid(master_seed, stream_start + offset, rows, count, 0)
        return np.cumsum(-np.log(u), axis=1)

    return _map_row_blocks(block, n_trials, threads)


def ordered_log_points(
    model: TailModel,
    t: float,
    gammas: np.ndarray,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
) -> np.ndarray:
    """log of ordered points for an arrival matrix (vectorized inverse)."""
    flat = log_inverse_tail(model, np.ravel(gammas) / t, spec)
    return flat.reshape(np.shape(gammas))


def ordered_log_points_batch(
    model: TailModel,
    t: float,
    n_cols: int,
    n_trials: int,
    master_seed: int,
    stream_start: int = 0,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
) -> np.ndarray:
    """(n_trials, n_cols) matrix of log ordered points at time t."""
    if not t > 0:
        raise ValueError("t must be positive")

    def block(offset: int, rows: int) -> np.ndarray:
        g = gamma_matrix(master_seed, rows, n_cols, stream_start + offset)
        return ordered_log_points(model, t, g, spec)

    return _map_row_blocks(block, n_trials, threads)


def pivot_ratio_batch(
    model: TailModel,
    t: float,
    r: int,
    n: int,
    n_trials: int,
    master_seed: int,
    stream_start: int = 0,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
) -> np.ndarray:
    """Per-trial pivot ratios (r+n-th over r-th largest point); requires r >= 1."""
    if r < 1:
        raise ValueError("the pivot ratio requires r >= 1")
    lp = ordered_log_points_batch(model, t, r + n, n_trials, master_seed,
                                  stream_start, spec, threads)
    return np.exp(lp[:, r + n - 1] - lp[:, r - 1])


def successive_ratio_batch(
    model: TailModel,
    t: float,
    r: int,
    count: int,
    n_trials: int,
    master_seed: int,
    stream_start: int = 0,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
) -> np.ndarray:
    """Matrix of successive below-1 ratios R_k, k = r .. r+count-1 (columns)."""
    if r < 1 or count < 1:
        raise ValueError("require r >= 1 and count >= 1")
    lp = ordered_log_points_batch(model, t, r + count, n_trials, master_seed,
                                  stream_start, spec, threads)
    return np.exp(lp[:, r:] - lp[:, r - 1 : -1])


def log_trim_ratio_batch(
    model: TailModel,
    t: float,
    r: int,
    n_trials: int,
    master_seed: int,
    stream_start: int = 0,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
) -> np.ndarray:
    """Per-trial log of the above-1 ratio (r-th over (r+1)-th largest point)."""
    if r < 1:
        raise ValueError("r must be >= 1")
    lp = ordered_log_points_batch(model, t, r + 1, n_trials, master_seed,
                                  stream_start, spec, threads)
    return lp[:, r - 1] - lp[:, r]


def time_scale_batch(
    model: TailModel,
    t: float,
    kmax: int,
    n_trials: int,
    master_seed: int,
    stream_start: int = 0,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
) -> np.ndarray:
    """Matrix of t * tail(k-th largest point) for k = 1..kmax (columns)."""

    def block(offset: int, rows: int) -> np.ndarray:
        g = gamma_matrix(master_seed, rows, kmax, stream_start + offset)
        lp = ordered_log_points(model, t, g, spec)
        return t * eval_tail(model, np.exp(lp).ravel()).reshape(lp.shape)

    return _map_row_blocks(block, n_trials, threads)


def pivot_ratio_with_scales_batch(
    model: TailModel,
    t: float,
    r: int,
    n: int,
    n_trials: int,
    master_seed: int,
    stream_start: int = 0,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
    threads: int = 1,
):
    """Per-trial (W, Z, A): pivot ratio, pivot time scale, top time scale.

    Z = t*tail(r+n-th largest), A = t*tail(r-th largest); used by the
    conditional-law checks.  Requires r >= 1.
    """
    if r < 1:
        raise ValueError("require r >= 1")

    def block(offset: int, rows: int):
        g = gamma_matrix(master_seed, rows, r + n, stream_start + offset)
        lp = ordered_log_points(model, t, g, spec)
        w = np.exp(lp[:, r + n - 1] - lp[:, r - 1])
        z = t * eval_tail(model, np.exp(lp[:, r + n - 1]))
        a = t * eval_tail(model, np.exp(lp[:, r - 1]))
        return w, z, a

    return _map_row_blocks(block, n_trials, threads)


def ratio_configuration_batch(
    model: TailModel,
    t: float,
    r: int,
    n: int,
    epsilon: float,
    n_trials: int,
    master_seed: int,
    stream_start: int = 0,
    cap: int = 1_000_000,
    spec: InverseSpec = DEFAULT_INVERSE_SPEC,
):
    """Batch ratio configurations: (above matrix, w_rn array or None, below counts).

    Row i matches :func:`sample_ratio_configuration` on stream
    ``stream_start + i`` (above ratios, pivot ratio, and the number of
    below-1 ratios exceeding epsilon).
    """
    if r < 0 or n < 1:
        raise ValueError("require r >= 0 and n >= 1")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie strictly inside (0, 1)")
    if cap < r + n + 1:
        raise ValueError("cap must be at least r + n + 1")
    head = r + n
    g = gamma_matrix(master_seed, n_trials, head, stream_start)
    lp = ordered_log_points(model, t, g, spec)
    pivot = lp[:, head - 1]
    above = np.exp(lp[:, r : head - 1] - pivot[:, None])
    w = np.exp(pivot - lp[:, r - 1]) if r >= 1 else None
    log_eps = math.log(epsilon)

    counts = np.zeros(n_trials, dtype=np.int64)
    act = np.arange(n_trials)
    last = g[:, -1].copy()
    offset = head
    while act.size:
        if offset - head >= cap:
            raise TruncationError(
                f"cap={cap} reached before the epsilon crossing in "
                f"{act.size} of {n_trials} trials"
            )
        u = uniform_block(master_seed, stream_start + act, _CHUNK, offset)
        arr = last[act, None] + np.cumsum(-np.log(u), axis=1)
        log_ratios = ordered_log_points(model, t, arr, spec) - pivot[act, None]
        keep = log_ratios > log_eps
        k_new = keep.sum(axis=1)
        counts[act] += k_new
        cont = k_new == _CHUNK
        last[act] = arr[:, -1]
        act = act[cont]
        offset += _CHUNK
    return above, w, counts


def negbin_batch(
    n: int,
    alpha: float,
    epsilon: float,
    method: str,
    n_trials: int,
    master_seed: int,
    stream_start: int = 0,
    probe: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    cap: int = 1_000_000,
    threads: int = 1,
):
    """Batch draws of the limiting point process on (epsilon, 1).

    Returns ``(counts, probe_sums)`` per trial; ``probe_sums`` is None when
    no probe is given.  Row i matches :func:`sample_negbin_process` on
    stream ``stream_start + i``.
    """
    _validate_nb_args(n, alpha, epsilon, method)

    def block(offset_rows: int, rows: int):
        return _negbin_block(
            n, alpha, epsilon, method, rows, master_seed,
            stream_start + offset_rows, probe, cap,
        )

    counts, sums = _map_row_blocks(block, n_trials, threads)
    return counts, (sums if probe is not None else None)


def _negbin_block(n, alpha, epsilon, method, rows, master_seed, s0, probe, cap):
    inv_alpha = 1.0 / alpha
    ea = epsilon**-alpha
    u0 = uniform_grid(master_seed, s0, rows, n, 0)
    g = np.sum(-np.log(u0), axis=1)
    bound = g * (ea - 1.0)

    counts = np.zeros(rows, dtype=np.int64)
    sums = np.zeros(rows)
    finish_offset = np.full(rows, n, dtype=np.int64)  # counter after the crossing arrival

    act = np.arange(rows)
    s_act = np.zeros(rows)
    offset = n
    while act.size:
        if offset - n >= cap:
            raise TruncationError(f"cap={cap} reached in negbin batch sampler")
        u = uniform_block(master_seed, s0 + act, _CHUNK, offset)
        arr = s_act[act, None] + np.cumsum(-np.log(u), axis=1)
        within = arr <= bound[act, None]
        k_new = within.sum(axis=1)
        counts[act] += k_new
        if method == LIMIT_RATIOS and probe is not None:
            x = (1.0 + arr / g[act, None]) ** -inv_alpha
            sums[act] += np.sum(probe(x) * within, axis=1)
        done = k_new < _CHUNK
        finish_offset[act[done]] = offset + k_new[done] + 1
        s_act[act] = arr[:, -1]
        act = act[~done]
        offset += _CHUNK

    if method == MIXED_POISSON:
        # place i.i.d. points by inverse CDF, consuming counters after the
        # per-row crossing arrival
        max_count = int(counts.max()) if rows else 0
        col = 0
        while col < max_count:
            width = min(_CHUNK, max_count - col)
            live = counts > col
            idx = np.flatnonzero(live)
            cols = col + np.arange(width)
            mask = cols[None, :] < counts[idx, None]
            ctr = finish_offset[idx, None] + cols[None, :]
            u = uniforms_at(master_seed, (s0 + idx)[:, None], ctr)
            x = (ea - u * (ea - 1.0)) ** -inv_alpha
            if probe is not None:
                sums[idx] += np.sum(probe(x) * mask, axis=1)
            col += width
    return counts, sums
