"""Simple random walk on the hypercube and its magnetization chain.

The observable is the coordinate sum ("magnetization") of the walker.
Two engines produce it: the full walk on packed sign bits, and the
reduced birth-death chain on the magnetization alone, which moves
m -> m-2 with probability 1/2 + m/(2K) and m -> m+2 otherwise.  Both
engines are exposed single-step (for small exact studies) and through
the kernel backends (for ensembles).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from scipy.special import gammaln

from . import kernels
from .errors import ContractError
from .rng import RngStream, TAG_CHAIN, TAG_INIT, raw_across, to_uniform

_MASK63 = np.uint64(63)


def _check_magnetization(m: int, K: int) -> None:
    if abs(m) > K or (m - K) % 2 != 0:
        raise ValueError(f"magnetization {m} invalid for dimension {K}")


@dataclass(frozen=True)
class UrnState:
    """Magnetization value m with |m| <= K and m = K (mod 2)."""

    K: int
    m: int

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("dimension must be positive")
        _check_magnetization(self.m, self.K)


class CoordinateState:
    """Full walker position: K signs packed into uint64 words (bit b -> 2b-1)."""

    __slots__ = ("K", "words")

    def __init__(self, K: int, words: np.ndarray):
        if K < 1:
            raise ValueError("dimension must be positive")
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.shape != ((K + 63) // 64,):
            raise ValueError("word array does not match dimension")
        self.K = K
        self.words = words

    @classmethod
    def all_plus(cls, K: int) -> "CoordinateState":
        W = (K + 63) // 64
        words = np.full(W, np.uint64(0xFFFFFFFFFFFFFFFF))
        tail = K % 64
        if tail:
            words[-1] = np.uint64((1 << tail) - 1)
        return cls(K, words)

    @classmethod
    def from_signs(cls, signs) -> "CoordinateState":
        signs = np.asarray(signs, dtype=np.int64)
        if not np.all(np.abs(signs) == 1):
            raise ValueError("coordinates must be +1 or -1")
        K = len(signs)
        words = np.zeros((K + 63) // 64, dtype=np.uint64)
        for i, s in enumerate(signs):
            if s == 1:
                words[i >> 6] |= np.uint64(1) << np.uint64(i & 63)
        return cls(K, words)

    def signs(self) -> np.ndarray:
        i = np.arange(self.K)
        bits = (self.words[i >> 6] >> (i & 63).astype(np.uint64)) & np.uint64(1)
        return 2 * bits.astype(np.int64) - 1

    def magnetization(self) -> int:
        return 2 * int(np.bitwise_count(self.words).sum()) - self.K

    def flip(self, i: int) -> "CoordinateState":
        if not 0 <= i < self.K:
            raise ValueError("coordinate index out of range")
        words = self.words.copy()
        words[i >> 6] ^= np.uint64(1) << np.uint64(i & 63)
        return CoordinateState(self.K, words)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CoordinateState)
            and self.K == other.K
            and bool(np.array_equal(self.words, other.words))
        )

    def __repr__(self) -> str:  # pragma: no cover
        return f"CoordinateState(K={self.K}, m={self.magnetization()})"


@dataclass(frozen=True)
class InitialLaw:
    """Menu of initial distributions for the walker.

    uniform        -- uniform on all 2^K vertices (m = 2 Binomial(K,1/2) - K)
    all_plus       -- every coordinate +1 (m = K)
    fixed_fraction -- point mass at the representable m nearest fraction*K
                      (parity-matched; distance ties toward 0)
    explicit       -- user pmf over magnetization values
    """

    kind: str
    fraction: Optional[float] = None
    table: Optional[tuple] = field(default=None, repr=False)

    @classmethod
    def uniform(cls) -> "InitialLaw":
        return cls("uniform")

    @classmethod
    def all_plus(cls) -> "InitialLaw":
        return cls("all_plus")

    @classmethod
    def fixed_fraction(cls, fraction: float) -> "InitialLaw":
        if not -1.0 <= fraction <= 1.0:
            raise ValueError("magnetization fraction must lie in [-1, 1]")
        return cls("fixed_fraction", fraction=fraction)

    @classmethod
    def explicit(cls, pmf: Mapping[int, float]) -> "InitialLaw":
        items = tuple(sorted((int(m), float(p)) for m, p in pmf.items()))
        if not items:
            raise ValueError("explicit pmf must be nonempty")
        if any(p < 0 for _, p in items):
            raise ValueError("explicit pmf has negative mass")
        total = math.fsum(p for _, p in items)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"explicit pmf sums to {total}, not 1")
        return cls("explicit", table=items)

    def validate_for(self, K: int) -> None:
        if self.kind == "explicit":
            for m, _ in self.table:
                _check_magnetization(m, K)

    def resolve_fixed_m(self, K: int) -> int:
        """Lattice point nearest fraction*K on {m : |m|<=K, m=K mod 2}.

        Ties by distance go to the smaller |m|; the residual +/-m tie is
        broken toward the smaller value.
        """
        target = self.fraction * K
        j = math.floor((target + K) / 2)
        cands = [2 * j - K, 2 * j + 2 - K]
        cands = [m for m in cands if -K <= m <= K]
        return min(cands, key=lambda m: (abs(m - target), abs(m), m))

    def pmf_array(self, K: int) -> np.ndarray:
        """pmf over m = 2k - K, indexed by k = 0..K."""
        self.validate_for(K)
        if self.kind == "uniform":
            k = np.arange(K + 1)
            logp = gammaln(K + 1) - gammaln(k + 1) - gammaln(K - k + 1) - K * math.log(2)
            return np.exp(logp)
        p = np.zeros(K + 1)
        if self.kind == "all_plus":
            p[K] = 1.0
        elif self.kind == "fixed_fraction":
            p[(self.resolve_fixed_m(K) + K) // 2] = 1.0
        elif self.kind == "explicit":
            for m, q in self.table:
                p[(m + K) // 2] += q
        else:  # pragma: no cover
            raise ValueError(f"unknown law kind {self.kind!r}")
        return p

    def mean_abs(self, K: int) -> float:
        """E|m| under the law (exact lattice sum)."""
        pmf = self.pmf_array(K)
        m = np.arange(-K, K + 1, 2)
        return float(np.abs(m) @ pmf)

    def sample_m_ensemble(self, K: int, init_keys: np.ndarray) -> np.ndarray:
        """One magnetization per stream key (inverse-cdf, draw counter 0)."""
        R = len(init_keys)
        self.validate_for(K)
        if self.kind == "all_plus":
            return np.full(R, K, dtype=np.int64)
        if self.kind == "fixed_fraction":
            return np.full(R, self.resolve_fixed_m(K), dtype=np.int64)
        u = to_uniform(raw_across(init_keys, 0))
        cdf = np.cumsum(self.pmf_array(K))
        k = np.minimum(np.searchsorted(cdf, u, side="right"), K)
        return 2 * k.astype(np.int64) - K

    def sample_m(self, K: int, rng: RngStream) -> int:
        return int(self.sample_m_ensemble(K, np.array([rng.key], dtype=np.uint64))[0])


def sample_initial(law: InitialLaw, K: int, rng: RngStream) -> UrnState:
    """Draw the initial magnetization state from `law`."""
    if K < 1:
        raise ValueError("dimension must be positive")
    return UrnState(K, law.sample_m(K, rng))


def sample_initial_vertex(law: InitialLaw, K: int, rng: RngStream) -> CoordinateState:
    """Draw a full vertex consistent with `law`.

    For the non-uniform laws only the magnetization is specified, so the
    +1 coordinates are placed first; the observable never depends on the
    arrangement.
    """
    if law.kind == "uniform":
        W = (K + 63) // 64
        words = np.zeros(W, dtype=np.uint64)
        for i in range(K):
            if rng.next_rademacher() == 1:
                words[i >> 6] |= np.uint64(1) << np.uint64(i & 63)
        return CoordinateState(K, words)
    m = law.sample_m(K, rng)
    n_plus = (m + K) // 2
    signs = np.full(K, -1, dtype=np.int64)
    signs[:n_plus] = 1
    return CoordinateState.from_signs(signs)


def sample_words_ensemble(law: InitialLaw, K: int, init_keys: np.ndarray):
    """Vectorized vertex sampling: (words uint64[R, W], m0 int64[R])."""
    R = len(init_keys)
    W = (K + 63) // 64
    words = np.zeros((R, W), dtype=np.uint64)
    if law.kind == "uniform":
        m0 = np.zeros(R, dtype=np.int64)
        for i in range(K):
            bit = 1 - (raw_across(init_keys, i) >> np.uint64(63)).astype(np.int64)
            words[:, i >> 6] |= bit.astype(np.uint64) << np.uint64(i & 63)
            m0 += 2 * bit - 1
        return words, m0
    m0 = law.sample_m_ensemble(K, init_keys)
    for r in range(R):
        n_plus = (int(m0[r]) + K) // 2
        for w in range(W):
            lo, hi = 64 * w, min(64 * w + 64, n_plus)
            if hi > lo:
                words[r, w] = np.uint64((1 << (hi - lo)) - 1)
    return words, m0


def step_urn(state: UrnState, rng: RngStream) -> UrnState:
    """One move of the magnetization chain."""
    p_down = 0.5 + state.m / (2.0 * state.K)
    if rng.next_uniform() < p_down:
        return UrnState(state.K, state.m - 2)
    return UrnState(state.K, state.m + 2)


def step_full(state: CoordinateState, rng: RngStream) -> CoordinateState:
    """Flip one uniformly chosen coordinate of the full walker."""
    return state.flip(rng.next_index(state.K))


@dataclass(frozen=True)
class ObservablePath:
    """Magnetization recorded on a time grid (value j at step floor(n*t_j))."""

    plan: object
    times: tuple
    values: np.ndarray
    initial_value: int
    dense: bool = False

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.int64)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.times):
            raise ValueError("values and times differ in length")
        if self.dense and len(values) > 1:
            if not np.all(np.abs(np.diff(values)) == 2):
                raise ContractError("dense path must move by +/-2 each step")


def _record_steps(grid) -> np.ndarray:
    return np.asarray(grid.steps, dtype=np.int64)


def simulate_observable_path(plan, rng: RngStream, engine: str = "urn") -> ObservablePath:
    """Simulate one replication of the plan's observable at its grid times.

    `engine` is "urn" (magnetization chain) or "full" (coordinate walk);
    the two agree in distribution.  Initial-state draws and chain draws
    come from separate substreams of `rng`.
    """
    grid = plan.grid
    K = plan.K
    rec = _record_steps(grid)
    init = rng.substream(TAG_INIT)
    chain = rng.substream(TAG_CHAIN)
    keys = np.array([chain.key], dtype=np.uint64)
    backend = kernels.active_backend()
    if engine == "urn":
        m0 = plan.initial_law.sample_m(K, init)
        values = backend.urn_record(keys, np.array([m0], dtype=np.int64), K, rec)[0]
    elif engine == "full":
        state = sample_initial_vertex(plan.initial_law, K, init)
        m0 = state.magnetization()
        values = backend.walk_record(
            keys, state.words[None, :], np.array([m0], dtype=np.int64), K, rec
        )[0]
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return ObservablePath(
        plan=plan, times=tuple(grid.times), values=values, initial_value=int(m0)
    )


def simulate_dense_path(
    K: int, n: int, horizon: float, law: InitialLaw, rng: RngStream, engine: str = "urn"
) -> ObservablePath:
    """Record every step up to floor(n*horizon); times are (0, 1/n, ..., N/n)."""
    N = math.floor(n * horizon)
    init = rng.substream(TAG_INIT)
    chain = rng.substream(TAG_CHAIN)
    keys = np.array([chain.key], dtype=np.uint64)
    rec = np.arange(N + 1, dtype=np.int64)
    backend = kernels.active_backend()
    if engine == "urn":
        m0 = law.sample_m(K, init)
        values = backend.urn_record(keys, np.array([m0], dtype=np.int64), K, rec)[0]
    elif engine == "full":
        state = sample_initial_vertex(law, K, init)
        m0 = state.magnetization()
        values = backend.walk_record(
            keys, state.words[None, :], np.array([m0], dtype=np.int64), K, rec
        )[0]
    else:
        raise ValueError(f"unknown engine {engine!r}")
    times = tuple(i / n for i in range(N + 1))
    return ObservablePath(
        plan=None, times=times, values=values, initial_value=int(m0), dense=True
    )
