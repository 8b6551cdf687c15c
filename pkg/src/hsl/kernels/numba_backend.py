"""@njit kernels (the default backend).

Each function walks the counter-based streams one draw at a time.  The
numpy backend consumes the identical draws in vectorized blocks; any
change to draw order or arithmetic here must be mirrored there.
"""

from __future__ import annotations

import numba as nb
import numpy as np

from ..rng import DRAW_STRIDE

_DRAW = np.uint64(DRAW_STRIDE)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_INV53 = 2.0**-53


@nb.njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> 30)) * _M1
    z = (z ^ (z >> 27)) * _M2
    return z ^ (z >> 31)


@nb.njit(cache=True, inline="always")
def _uniform(key, t):
    z = _mix64(key + _DRAW * (np.uint64(t) + _ONE))
    return np.float64(z >> 11) * _INV53


@nb.njit(cache=True, inline="always")
def _sign(key, t):
    z = _mix64(key + _DRAW * (np.uint64(t) + _ONE))
    return 1 - 2 * np.int64(z >> 63)


@nb.njit(cache=True)
def urn_record(keys, m0, K, rec):
    """Magnetization chain; record m after rec[j] steps, per replication."""
    R = keys.shape[0]
    s = rec.shape[0]
    out = np.empty((R, s), dtype=np.int64)
    twoK = 2.0 * K
    for r in range(R):
        key = keys[r]
        m = m0[r]
        j = 0
        while j < s and rec[j] == 0:
            out[r, j] = m
            j += 1
        total = rec[s - 1]
        for t in range(total):
            if _uniform(key, t) < 0.5 + m / twoK:
                m -= 2
            else:
                m += 2
            while j < s and rec[j] == t + 1:
                out[r, j] = m
                j += 1
    return out


@nb.njit(cache=True)
def urn_record_compensated(keys, m0, K, rec):
    """urn_record plus running sums used by the drift/variance compensators.

    s1_total = sum of m over steps 0..total-1 (state before each move),
    s2_total = sum of m^2 over the same range, s1_max_abs = running max of
    |partial sum of m|.  Accumulators are float64 but the summands are
    integers well below 2^53 in supported configurations, so the sums are
    exact and backend-independent.
    """
    R = keys.shape[0]
    s = rec.shape[0]
    out = np.empty((R, s), dtype=np.int64)
    s1_max_abs = np.zeros(R, dtype=np.float64)
    s1_total = np.zeros(R, dtype=np.float64)
    s2_total = np.zeros(R, dtype=np.float64)
    twoK = 2.0 * K
    for r in range(R):
        key = keys[r]
        m = m0[r]
        s1 = 0.0
        s2 = 0.0
        mx = 0.0
        j = 0
        while j < s and rec[j] == 0:
            out[r, j] = m
            j += 1
        total = rec[s - 1]
        for t in range(total):
            fm = np.float64(m)
            s1 += fm
            s2 += fm * fm
            a = abs(s1)
            if a > mx:
                mx = a
            if _uniform(key, t) < 0.5 + m / twoK:
                m -= 2
            else:
                m += 2
            while j < s and rec[j] == t + 1:
                out[r, j] = m
                j += 1
        s1_max_abs[r] = mx
        s1_total[r] = s1
        s2_total[r] = s2
    return out, s1_max_abs, s1_total, s2_total


@nb.njit(cache=True)
def walk_record(keys, words, m0, K, rec):
    """Full coordinate walk on packed sign bits (bit 1 means +1).

    `words` is uint64[R, ceil(K/64)] and is not modified; `m0` must equal
    2*popcount(words) - K row-wise.
    """
    R = keys.shape[0]
    s = rec.shape[0]
    W = words.shape[1]
    out = np.empty((R, s), dtype=np.int64)
    state = np.empty(W, dtype=np.uint64)
    for r in range(R):
        key = keys[r]
        for w in range(W):
            state[w] = words[r, w]
        m = m0[r]
        j = 0
        while j < s and rec[j] == 0:
            out[r, j] = m
            j += 1
        total = rec[s - 1]
        for t in range(total):
            idx = np.int64(_uniform(key, t) * K)
            w = idx >> 6
            b = np.uint64(idx & 63)
            bit = np.int64((state[w] >> b) & _ONE)
            m += 2 - 4 * bit
            state[w] ^= _ONE << b
            while j < s and rec[j] == t + 1:
                out[r, j] = m
                j += 1
    return out


@nb.njit(cache=True)
def parity_signature(key, K, deltas):
    """Per-coordinate interval-parity bitmasks after the given draw counts.

    Bit k of sig[i] is 1 iff coordinate i was drawn an odd number of times
    within interval k (draw counters are consecutive across intervals).
    """
    sig = np.zeros(K, dtype=np.uint32)
    t = 0
    for k in range(deltas.shape[0]):
        bit = np.uint32(1 << k)
        for _ in range(deltas[k]):
            idx = np.int64(_uniform(key, t) * K)
            sig[idx] ^= bit
            t += 1
    return sig


@nb.njit(cache=True)
def parity_signature_counts(keys, K, deltas, s):
    """Histogram of parity signatures (size 2**s) per replication."""
    R = keys.shape[0]
    nmask = 1 << s
    out = np.zeros((R, nmask), dtype=np.int64)
    for r in range(R):
        sig = parity_signature(keys[r], K, deltas)
        for i in range(K):
            out[r, sig[i]] += 1
    return out


@nb.njit(cache=True)
def rademacher_prefix(keys, ends):
    """Partial sums of one +/-1 stream per replication.

    out[r, j] = sum of the first ends[r, j] signs of stream r.  The ends
    need not be sorted; equal ends give equal sums.
    """
    R, k = ends.shape
    out = np.zeros((R, k), dtype=np.int64)
    for r in range(R):
        key = keys[r]
        maxend = 0
        for j in range(k):
            if ends[r, j] > maxend:
                maxend = ends[r, j]
        acc = 0
        for t in range(maxend):
            acc += _sign(key, t)
            for j in range(k):
                if ends[r, j] == t + 1:
                    out[r, j] = acc
    return out
