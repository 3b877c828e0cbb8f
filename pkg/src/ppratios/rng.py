"""Counter-based random number streams.

Every trial of a Monte Carlo experiment gets its own stream, addressed by
``(master_seed, stream_index)``.  Streams are stateless hash functions of a
64-bit counter (SplitMix64 finalizer over an affine counter lattice), so

* the same ``(master_seed, stream_index)`` always reproduces the same
  sequence, independent of scheduling or worker count, and
* a whole batch of trials can be generated as one vectorized 2-d array
  (rows = streams, columns = counters) that is bit-identical to drawing
  each trial's stream separately.

Exponential variates are inverse-CDF transforms of the uniforms so the
mapping from counters to variates stays explicit and portable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STREAM_SALT = np.uint64(0xD1B54A32D192ED03)
_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)

# Uniforms are midpoints of 2^53 equal bins, so they lie strictly inside (0, 1)
# and -log(u) is always finite and positive.
_INV_2_53 = float(2.0**-53)


def _mix64(z: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    """SplitMix64 finalizer, vectorized over uint64 arrays."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def stream_bases(master_seed: int, stream_start: int, n_streams: int) -> np.ndarray:
    """Per-stream base states for streams ``stream_start .. stream_start+n-1``."""
    with np.errstate(over="ignore"):
        seeded = _mix64(np.uint64(master_seed) + _GOLDEN)
        idx = (np.uint64(stream_start) + np.arange(n_streams, dtype=np.uint64)) * _STREAM_SALT
        return _mix64(seeded + idx)


def uniform_block(
    master_seed: int,
    stream_indices,
    n_draws: int,
    counter_start: int = 0,
) -> np.ndarray:
    """Uniform(0,1) matrix for an arbitrary array of stream indices.

    Row i is stream ``stream_indices[i]``; column j is counter
    ``counter_start + j``.
    """
    idx = np.asarray(stream_indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        seeded = _mix64(np.uint64(master_seed) + _GOLDEN)
        bases = _mix64(seeded + idx * _STREAM_SALT)
        ctr = (np.uint64(counter_start) + np.arange(n_draws, dtype=np.uint64)) * _GOLDEN
        words = _mix64(bases[:, None] + ctr[None, :])
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


def uniform_grid(
    master_seed: int,
    stream_start: int,
    n_streams: int,
    n_draws: int,
    counter_start: int = 0,
) -> np.ndarray:
    """Uniform(0,1) matrix; row i is stream ``stream_start+i``, column j is counter ``counter_start+j``.

    Row ``i`` of the result equals ``RngStream(master_seed, stream_start+i)``
    drawing ``n_draws`` uniforms from counter ``counter_start``.
    """
    with np.errstate(over="ignore"):
        idx = np.uint64(stream_start) + np.arange(n_streams, dtype=np.uint64)
    return uniform_block(master_seed, idx, n_draws, counter_start)


def exponential_grid(
    master_seed: int,
    stream_start: int,
    n_streams: int,
    n_draws: int,
    counter_start: int = 0,
) -> np.ndarray:
    """Unit-mean exponential matrix via inverse CDF of :func:`uniform_grid`."""
    return -np.log(uniform_grid(master_seed, stream_start, n_streams, n_draws, counter_start))


def uniforms_at(master_seed: int, stream_indices, counters) -> np.ndarray:
    """Elementwise accessor: uniform for stream ``stream_indices[i]`` at counter ``counters[i]``.

    The two index arrays broadcast against each other.  Used for ragged
    batch draws where each row sits at a different counter offset.
    """
    idx = np.asarray(stream_indices, dtype=np.uint64)
    ctr = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        seeded = _mix64(np.uint64(master_seed) + _GOLDEN)
        bases = _mix64(seeded + idx * _STREAM_SALT)
        words = _mix64(bases + ctr * _GOLDEN)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


@dataclass
class RngStream:
    """One reproducible random stream, addressed by ``(master_seed, stream_index)``.

    The object keeps a cursor over its counter sequence; a freshly
    constructed stream always replays the same variates in the same order.
    """

    master_seed: int
    stream_index: int = 0
    _cursor: int = field(default=0, repr=False, compare=False)

    def spawn(self, stream_index: int) -> "RngStream":
        """Fresh stream with the same master seed and a new index."""
        return RngStream(self.master_seed, stream_index)

    def uniforms(self, n: int) -> np.ndarray:
        """Next ``n`` Uniform(0,1) variates, advancing the cursor."""
        out = uniform_grid(self.master_seed, self.stream_index, 1, n, self._cursor)[0]
        self._cursor += n
        return out

    def exponentials(self, n: int) -> np.ndarray:
        """Next ``n`` unit-mean exponentials, advancing the cursor."""
        return -np.log(self.uniforms(n))
