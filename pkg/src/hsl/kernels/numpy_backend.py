"""Pure-numpy kernels (fallback backend).

Vectorizes across replications at each step (chains) or across draws
within an interval (parities, sign sums).  Draw-for-draw identical to the
numba backend: replication r consumes counters 0,1,2,... of its own key
in the same order in both.
"""

from __future__ import annotations

import numpy as np

from ..rng import DRAW_STRIDE, mix64_vec

_MASK64 = 0xFFFFFFFFFFFFFFFF
_U = np.uint64
_S11, _S63 = _U(11), _U(63)
_ONE = _U(1)
_INV53 = np.float64(2.0**-53)

# memory caps for the blocked sign-sum kernel
_REP_CHUNK = 1024
_T_BLOCK = 8192


def _draw_offset(t: int) -> np.uint64:
    # python-int multiply avoids numpy scalar overflow warnings
    return _U((DRAW_STRIDE * (t + 1)) & _MASK64)


def _uniforms_across(keys: np.ndarray, t: int) -> np.ndarray:
    z = mix64_vec(keys + _draw_offset(t))
    return (z >> _S11).astype(np.float64) * _INV53


def _uniform_run(key: np.uint64, start: int, count: int) -> np.ndarray:
    ctr = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = mix64_vec(key + _U(DRAW_STRIDE) * ctr)
    return (z >> _S11).astype(np.float64) * _INV53


def urn_record(keys, m0, K, rec):
    R = keys.shape[0]
    s = rec.shape[0]
    out = np.empty((R, s), dtype=np.int64)
    m = m0.astype(np.int64, copy=True)
    twoK = 2.0 * K
    j = 0
    while j < s and rec[j] == 0:
        out[:, j] = m
        j += 1
    total = int(rec[-1])
    for t in range(total):
        u = _uniforms_across(keys, t)
        down = u < 0.5 + m / twoK
        m += np.where(down, -2, 2)
        while j < s and rec[j] == t + 1:
            out[:, j] = m
            j += 1
    return out


def urn_record_compensated(keys, m0, K, rec):
    R = keys.shape[0]
    s = rec.shape[0]
    out = np.empty((R, s), dtype=np.int64)
    s1 = np.zeros(R, dtype=np.float64)
    s2 = np.zeros(R, dtype=np.float64)
    mx = np.zeros(R, dtype=np.float64)
    m = m0.astype(np.int64, copy=True)
    twoK = 2.0 * K
    j = 0
    while j < s and rec[j] == 0:
        out[:, j] = m
        j += 1
    total = int(rec[-1])
    for t in range(total):
        fm = m.astype(np.float64)
        s1 += fm
        s2 += fm * fm
        np.maximum(mx, np.abs(s1), out=mx)
        u = _uniforms_across(keys, t)
        down = u < 0.5 + m / twoK
        m += np.where(down, -2, 2)
        while j < s and rec[j] == t + 1:
            out[:, j] = m
            j += 1
    return out, mx, s1, s2


def walk_record(keys, words, m0, K, rec):
    R = keys.shape[0]
    s = rec.shape[0]
    out = np.empty((R, s), dtype=np.int64)
    state = words.copy()
    m = m0.astype(np.int64, copy=True)
    rows = np.arange(R)
    j = 0
    while j < s and rec[j] == 0:
        out[:, j] = m
        j += 1
    total = int(rec[-1])
    for t in range(total):
        idx = (_uniforms_across(keys, t) * K).astype(np.int64)
        w = idx >> 6
        b = (idx & 63).astype(np.uint64)
        cur = state[rows, w]
        bit = ((cur >> b) & _ONE).astype(np.int64)
        m += 2 - 4 * bit
        state[rows, w] = cur ^ (_ONE << b)
        while j < s and rec[j] == t + 1:
            out[:, j] = m
            j += 1
    return out


def parity_signature(key, K, deltas):
    sig = np.zeros(K, dtype=np.uint32)
    t = 0
    for k in range(deltas.shape[0]):
        d = int(deltas[k])
        if d:
            idx = (_uniform_run(_U(key), t, d) * K).astype(np.int64)
            odd = (np.bincount(idx, minlength=K) & 1).astype(np.uint32)
            sig ^= odd << np.uint32(k)
            t += d
    return sig


def parity_signature_counts(keys, K, deltas, s):
    R = keys.shape[0]
    nmask = 1 << s
    out = np.zeros((R, nmask), dtype=np.int64)
    for r in range(R):
        sig = parity_signature(keys[r], K, deltas)
        out[r] = np.bincount(sig, minlength=nmask)
    return out


def rademacher_prefix(keys, ends):
    R, k = ends.shape
    out = np.zeros((R, k), dtype=np.int64)
    if ends.size == 0:
        return out
    for lo in range(0, R, _REP_CHUNK):
        hi = min(lo + _REP_CHUNK, R)
        ksub = keys[lo:hi]
        esub = ends[lo:hi]
        maxend = int(esub.max(initial=0))
        base = np.zeros(hi - lo, dtype=np.int64)
        for start in range(0, maxend, _T_BLOCK):
            b = min(_T_BLOCK, maxend - start)
            ctr = np.arange(start + 1, start + b + 1, dtype=np.uint64)
            z = mix64_vec(ksub[:, None] + _U(DRAW_STRIDE) * ctr[None, :])
            signs = 1 - 2 * (z >> _S63).astype(np.int64)
            csum = np.cumsum(signs, axis=1)
            for j in range(k):
                e = esub[:, j]
                inside = (e > start) & (e <= start + b)
                if inside.any():
                    rr = np.nonzero(inside)[0]
                    out[lo + rr, j] = base[rr] + csum[rr, e[rr] - start - 1]
            base += csum[:, -1]
    return out
