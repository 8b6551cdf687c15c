"""Hot simulation loops, in two interchangeable backends.

``numba_backend`` carries @njit kernels; ``numpy_backend`` is a pure
vectorized fallback.  Both consume the same counter-based streams
(:mod:`hsl.rng`) and produce bit-identical outputs, so the choice only
affects speed.  Selection: the ``HSL_BACKEND`` environment variable
("numba" or "numpy"), defaulting to numba when importable.

Kernel API (uint64 ``keys`` are per-replication substream keys; draw
counters always start at 0 within a kernel call):

  urn_record(keys, m0, K, rec)                 -> int64[R, s]
  urn_record_compensated(keys, m0, K, rec)     -> (records, s1_max_abs,
                                                   s1_total, s2_total)
  walk_record(keys, words, m0, K, rec)         -> int64[R, s]
  parity_signature(key, K, deltas)             -> uint32[K]
  parity_signature_counts(keys, K, deltas, s)  -> int64[R, 2**s]
  rademacher_prefix(keys, ends)                -> int64[R, k]
"""

from __future__ import annotations

import os
import warnings

_BACKENDS: dict = {}
_ACTIVE = None


def get_backend(name: str):
    """Import and return a backend module by name ("numba" or "numpy")."""
    if name in _BACKENDS:
        return _BACKENDS[name]
    if name == "numba":
        from . import numba_backend as mod
    elif name == "numpy":
        from . import numpy_backend as mod
    else:
        raise ValueError(f"unknown kernel backend {name!r} (use 'numba' or 'numpy')")
    _BACKENDS[name] = mod
    return mod


def active_backend():
    """The backend selected by HSL_BACKEND (resolved once, then cached)."""
    global _ACTIVE
    if _ACTIVE is not None:
        return _ACTIVE
    choice = os.environ.get("HSL_BACKEND", "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(f"HSL_BACKEND={choice!r} not recognized (use 'numba' or 'numpy')")
    if not choice:
        try:
            import numba  # noqa: F401
            choice = "numba"
        except ImportError:
            choice = "numpy"
    if choice == "numba":
        try:
            _ACTIVE = get_backend("numba")
        except ImportError as exc:  # pragma: no cover - env without numba
            warnings.warn(f"numba backend unavailable ({exc}); using numpy kernels")
            _ACTIVE = get_backend("numpy")
    else:
        _ACTIVE = get_backend("numpy")
    return _ACTIVE


def active_name() -> str:
    return "numba" if active_backend().__name__.endswith("numba_backend") else "numpy"
