"""Draw-parity bookkeeping for the fast-regime representation.

Over a time grid, each coordinate accumulates one parity bit per
interval (odd/even number of draws).  Bucketing coordinates by their
parity-bit signature partitions [K] into 2^s classes; the walk's
finite-dimensional law under a uniform start is reconstructed from the
class sizes by fresh Rademacher block sums with alternating signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .rng import (
    DRAW_STRIDE,
    RngStream,
    TAG_CHAIN,
    mix64_vec,
)

_MAX_INTERVALS = 20  # signature masks are small ints; 2^s count arrays


@dataclass(frozen=True)
class IntervalGrid:
    """Times (t_1..t_s) over a chain of rate n; t_0 = 0 is implicit.

    steps[j] = floor(n * t_j); deltas[k] = steps[k] - steps[k-1] counts the
    draws inside interval k.
    """

    n: int
    times: tuple

    def __init__(self, n: int, times: Sequence[float]):
        times = tuple(float(t) for t in times)
        if n < 1:
            raise ValueError("chain rate n must be >= 1")
        if not times:
            raise ValueError("grid needs at least one time")
        if any(t < 0 for t in times):
            raise ValueError("grid times must be nonnegative")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("grid times must be strictly increasing")
        if n * times[-1] >= 2**62:
            raise OverflowError("n * t_s exceeds the supported index range")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "times", times)

    @property
    def steps(self) -> tuple:
        return tuple(math.floor(self.n * t) for t in self.times)

    @property
    def deltas(self) -> tuple:
        steps = self.steps
        return tuple(b - a for a, b in zip((0,) + steps, steps))

    @property
    def s(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class ParityLedger:
    """Per-coordinate signature masks: bit k of sig[i] = parity in interval k."""

    K: int
    s: int
    sig: np.ndarray
    deltas: tuple

    def __post_init__(self) -> None:
        if self.sig.shape != (self.K,):
            raise ValueError("signature array does not match dimension")

    def parity(self, coordinate: int, interval: int) -> int:
        return int(self.sig[coordinate] >> interval) & 1

    def odd_counts(self) -> np.ndarray:
        """Number of odd-parity coordinates per interval."""
        return np.array(
            [int(((self.sig >> np.uint32(k)) & np.uint32(1)).sum()) for k in range(self.s)]
        )


@dataclass(frozen=True)
class SignatureCounts:
    """counts[J] = number of coordinates whose parity mask equals J."""

    s: int
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (1 << self.s,):
            raise ValueError("counts array must have length 2^s")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")

    @property
    def K(self) -> int:
        return int(self.counts.sum())


def accumulate_parities(K: int, grid: IntervalGrid, rng: RngStream) -> ParityLedger:
    """Simulate floor(n*t_s) coordinate draws and record interval parities."""
    if K < 1:
        raise ValueError("dimension must be positive")
    if grid.s > _MAX_INTERVALS:
        raise ValueError(f"at most {_MAX_INTERVALS} intervals supported")
    deltas = np.asarray(grid.deltas, dtype=np.int64)
    chain = rng.substream(TAG_CHAIN)
    sig = kernels.active_backend().parity_signature(np.uint64(chain.key), K, deltas)
    ledger = ParityLedger(K=K, s=grid.s, sig=sig, deltas=grid.deltas)
    assert np.all(ledger.odd_counts() % 2 == deltas % 2), "per-interval parity sum broken"
    return ledger


def signature_counts(ledger: ParityLedger) -> SignatureCounts:
    counts = np.bincount(ledger.sig, minlength=1 << ledger.s).astype(np.int64)
    return SignatureCounts(s=ledger.s, counts=counts)


def odd_set_union_check(counts: SignatureCounts, j: int) -> int:
    """Size of the odd-since-start set at grid point j from the class sizes.

    Sums counts[J] over masks J whose overlap with the first j intervals
    has odd cardinality; equals the direct odd-parity count over steps
    (0, floor(n t_j)].
    """
    if not 1 <= j <= counts.s:
        raise ValueError("interval index out of range")
    low = (1 << j) - 1
    return int(
        sum(int(counts.counts[J]) for J in range(1 << counts.s) if (J & low).bit_count() & 1)
    )


def _alternating_signs(s: int) -> np.ndarray:
    """sign[j-1, J] = (-1)^{|J n [j]|} for j = 1..s."""
    out = np.empty((s, 1 << s), dtype=np.int64)
    for j in range(1, s + 1):
        low = (1 << j) - 1
        for J in range(1 << s):
            out[j - 1, J] = -1 if (J & low).bit_count() & 1 else 1
    return out


def _signs_matrix(sign_keys: np.ndarray, K: int) -> np.ndarray:
    ctr = np.arange(1, K + 1, dtype=np.uint64)
    z = mix64_vec(sign_keys[:, None] + np.uint64(DRAW_STRIDE) * ctr[None, :])
    return 1 - 2 * (z >> np.uint64(63)).astype(np.int64)


def reconstruct_fdl_ensemble(counts: np.ndarray, sign_keys: np.ndarray) -> np.ndarray:
    """Vector of grid-point values from class sizes and fresh sign streams.

    counts is int64[R, 2^s]; every row must sum to the same K.  Row r uses
    counters 0..K-1 of sign_keys[r].  Returns float64[R, s].
    """
    counts = np.asarray(counts, dtype=np.int64)
    R, nmask = counts.shape
    s = nmask.bit_length() - 1
    K = int(counts[0].sum())
    out = np.empty((R, s))
    alt = _alternating_signs(s)
    chunk = max(1, int(2e7) // max(K, 1))
    for lo in range(0, R, chunk):
        hi = min(lo + chunk, R)
        signs = _signs_matrix(sign_keys[lo:hi], K)
        P = np.zeros((hi - lo, K + 1), dtype=np.int64)
        np.cumsum(signs, axis=1, out=P[:, 1:])
        bounds = np.zeros((hi - lo, nmask + 1), dtype=np.int64)
        np.cumsum(counts[lo:hi], axis=1, out=bounds[:, 1:])
        rows = np.arange(hi - lo)[:, None]
        block_sums = P[rows, bounds[:, 1:]] - P[rows, bounds[:, :-1]]
        out[lo:hi] = block_sums @ alt.T
    return out


def reconstruct_fdl(counts: SignatureCounts, rng: RngStream) -> np.ndarray:
    """Single-replication reconstruction: one fresh +/-1 per coordinate."""
    K = counts.K
    u = rng.uniforms(K)
    signs = np.where(u < 0.5, 1, -1).astype(np.int64)
    bounds = np.concatenate([[0], np.cumsum(counts.counts)])
    prefix = np.concatenate([[0], np.cumsum(signs)])
    block_sums = prefix[bounds[1:]] - prefix[bounds[:-1]]
    return (block_sums @ _alternating_signs(counts.s).T).astype(np.float64)


def partial_sums_at_random_times(
    K: int, time_vector: Sequence[float], rng: RngStream
) -> np.ndarray:
    """K^{-1/2} sign-sums up to floor(K*s_j) for each requested time."""
    if K < 1:
        raise ValueError("dimension must be positive")
    times = np.asarray(time_vector, dtype=np.float64)
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    ends = np.floor(K * times).astype(np.int64)
    maxend = int(ends.max(initial=0))
    u = rng.uniforms(maxend)
    signs = np.where(u < 0.5, 1, -1).astype(np.int64)
    prefix = np.concatenate([[0], np.cumsum(signs)])
    return prefix[ends] / math.sqrt(K)


def partial_sums_ensemble(K: int, ends: np.ndarray, sign_keys: np.ndarray) -> np.ndarray:
    """Ensemble version on precomputed integer ends (int64[R, k])."""
    sums = kernels.active_backend().rademacher_prefix(sign_keys, ends)
    return sums / math.sqrt(K)


def odd_since_start(ledger: ParityLedger, j: int) -> int:
    """Coordinates with odd total parity over intervals 1..j, read directly."""
    if not 1 <= j <= ledger.s:
        raise ValueError("interval index out of range")
    low = np.uint32((1 << j) - 1)
    return int((np.bitwise_count(ledger.sig & low) & np.uint32(1)).sum())
