"""Counter-based splittable random streams.

Every draw is a pure function of a 64-bit stream key and a draw counter:
``raw(key, t) = mix64(key + (t+1)*DRAW_STRIDE)`` with the SplitMix64
finalizer as ``mix64``.  Because there is no sequential state, the same
stream can be generated one draw at a time (numba kernels), as a
vectorized block (numpy kernels), or lazily (this module) and the bits
agree exactly.

Stream layout:
  * replication r of a run gets ``stream_key(master_seed, r)``;
  * within a replication, independent purposes (initial state, chain
    steps, fresh signs, dither, ...) use ``substream_key(key, tag)``.

Keys are separated by distinct odd strides through the mixer, so streams
with different (master_seed, stream_index, tag) are at well-separated,
well-mixed phases; overlap of the counter windows used here (< 2^40
draws total) is astronomically unlikely.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
DRAW_STRIDE = 0x9E3779B97F4A7C15
STREAM_STRIDE = 0xD1B54A32D192ED03
SUBSTREAM_STRIDE = 0xA0761D6478BD642F
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# substream tags used by the simulation layers
TAG_INIT = 0
TAG_CHAIN = 1
TAG_SIGNS = 2
TAG_JITTER = 3
TAG_DITHER = 4


def mix64(z: int) -> int:
    """SplitMix64 finalizer on python ints (mod 2^64)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _M1) & _MASK64
    z = ((z ^ (z >> 27)) * _M2) & _MASK64
    return z ^ (z >> 31)


def stream_key(master_seed: int, stream_index: int) -> int:
    """Key of replication stream `stream_index` under `master_seed`."""
    if stream_index < 0:
        raise ValueError("stream_index must be nonnegative")
    root = mix64((master_seed + DRAW_STRIDE) & _MASK64)
    return mix64((root + STREAM_STRIDE * (stream_index + 1)) & _MASK64)


def substream_key(key: int, tag: int) -> int:
    """Derive an independent child stream for one purpose tag."""
    return mix64((key + SUBSTREAM_STRIDE * (tag + 1)) & _MASK64)


def raw_at(key: int, counter: int) -> int:
    """The uint64 draw at position `counter` of the stream `key`."""
    return mix64((key + DRAW_STRIDE * (counter + 1)) & _MASK64)


def uniform_at(key: int, counter: int) -> float:
    """Uniform [0,1) double: top 53 bits of the raw draw."""
    return (raw_at(key, counter) >> 11) * 2.0**-53


def rademacher_at(key: int, counter: int) -> int:
    """+1/-1 from the top bit of the raw draw."""
    return 1 - 2 * (raw_at(key, counter) >> 63)


def index_at(key: int, counter: int, k: int) -> int:
    """Uniform index in [0, k) (same float path as the kernels)."""
    return int(uniform_at(key, counter) * k)


# ---------------------------------------------------------------------------
# vectorized variants (uint64 array arithmetic; wraps mod 2^64)

_U = np.uint64
_S30, _S27, _S31, _S11, _S63 = _U(30), _U(27), _U(31), _U(11), _U(63)
_M1_U, _M2_U = _U(_M1), _U(_M2)
_INV53 = np.float64(2.0**-53)


def mix64_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1_U
    z = (z ^ (z >> _S27)) * _M2_U
    return z ^ (z >> _S31)


def stream_keys(master_seed: int, n_streams: int) -> np.ndarray:
    """Keys of streams 0..n_streams-1 as a uint64 array."""
    root = mix64((master_seed + DRAW_STRIDE) & _MASK64)
    idx = np.arange(1, n_streams + 1, dtype=np.uint64)
    return mix64_vec(_U(root) + _U(STREAM_STRIDE) * idx)


def substream_keys(keys: np.ndarray, tag: int) -> np.ndarray:
    off = (SUBSTREAM_STRIDE * (tag + 1)) & _MASK64
    return mix64_vec(keys + _U(off))


def raw_block(key: int, start: int, count: int) -> np.ndarray:
    """Raw draws at counters start..start+count-1 of one stream."""
    ctr = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    return mix64_vec(_U(key) + _U(DRAW_STRIDE) * ctr)


def raw_across(keys: np.ndarray, counter: int) -> np.ndarray:
    """One raw draw per stream, all at the same counter."""
    off = (DRAW_STRIDE * (counter + 1)) & _MASK64
    return mix64_vec(keys + _U(off))


def to_uniform(raw: np.ndarray) -> np.ndarray:
    return (raw >> _S11).astype(np.float64) * _INV53


def to_rademacher(raw: np.ndarray) -> np.ndarray:
    return 1 - 2 * (raw >> _S63).astype(np.int64)


def uniform_block(key: int, start: int, count: int) -> np.ndarray:
    return to_uniform(raw_block(key, start, count))


class RngStream:
    """One reproducible stream, identified by (master_seed, stream_index).

    Instances hold a draw cursor for convenience; reconstructing the
    stream from the same pair replays the identical sequence.  A stream
    must be owned by a single replication; parallel work splits at the
    stream level, never by sharing a cursor.
    """

    __slots__ = ("master_seed", "stream_index", "key", "_cursor")

    def __init__(self, master_seed: int, stream_index: int = 0, _key: int | None = None):
        self.master_seed = master_seed
        self.stream_index = stream_index
        self.key = stream_key(master_seed, stream_index) if _key is None else _key
        self._cursor = 0

    def substream(self, tag: int) -> "RngStream":
        child = RngStream.__new__(RngStream)
        child.master_seed = self.master_seed
        child.stream_index = self.stream_index
        child.key = substream_key(self.key, tag)
        child._cursor = 0
        return child

    def next_uniform(self) -> float:
        u = uniform_at(self.key, self._cursor)
        self._cursor += 1
        return u

    def next_rademacher(self) -> int:
        r = rademacher_at(self.key, self._cursor)
        self._cursor += 1
        return r

    def next_index(self, k: int) -> int:
        i = index_at(self.key, self._cursor, k)
        self._cursor += 1
        return i

    def uniforms(self, count: int) -> np.ndarray:
        u = uniform_block(self.key, self._cursor, count)
        self._cursor += count
        return u

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"
