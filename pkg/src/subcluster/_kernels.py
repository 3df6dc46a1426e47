"""Jitted batch kernels for sampled lazy random walks.

One walk step: draw r uniform in {0, ..., 2d-1}; if r < deg(v), move to
neighbor r of v, else stay.  Each step is charged as one adjacency query.

Walk randomness comes from SplitMix64 counter streams keyed per walk
(see rng.py): draw 0 picks the first phase length, draw 1 the second
phase length (two-phase walks), draws 2.. drive the steps.  Trajectories
therefore depend only on (base key, walk index), never on batch layout
or thread schedule.
"""

from __future__ import annotations

import numpy as np
import numba
from numba import njit, prange, uint64

if numba.config.THREADING_LAYER == "default":
    # avoid probing the too-old TBB build; omp is present and fast
    numba.config.THREADING_LAYER = "omp"

U64 = np.uint64

_GAMMA = U64(0x9E3779B97F4A7C15)
_M1 = U64(0xBF58476D1CE4E5B9)
_M2 = U64(0x94D049BB133111EB)

KIND_PLAIN = 0
KIND_UNIFORM = 1
KIND_TWO_PHASE = 2


@njit(uint64(uint64), cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _M1
    z = (z ^ (z >> U64(27))) * _M2
    return z ^ (z >> U64(31))


@njit(uint64(uint64, uint64), cache=True, inline="always")
def _draw(key, counter):
    return _mix64(key + (counter + U64(1)) * _GAMMA)


@njit(cache=True, inline="always")
def _bounded(x, bound):
    # map a 64-bit draw to [0, bound) via 32-bit fixed-point scaling
    return np.int64(((x >> U64(32)) * U64(bound)) >> U64(32))


@njit(cache=True)
def _walk_length(key, kind, t):
    if kind == KIND_PLAIN:
        return np.int64(t)
    ell = _bounded(_draw(key, U64(0)), t)
    if kind == KIND_TWO_PHASE:
        ell += _bounded(_draw(key, U64(1)), t)
    return ell


@njit(cache=True, parallel=True)
def walk_endpoints(indptr, indices, deg, twod, start, kind, t, base, w_start, count):
    """Endpoints and lengths of walks w_start..w_start+count-1 from `start`.

    Returns (endpoints int32[count], lengths int32[count]); each executed
    step costs one adjacency query.
    """
    ends = np.empty(count, dtype=np.int32)
    lens = np.empty(count, dtype=np.int32)
    for i in prange(count):
        key = _mix64(base + U64(w_start + i) * _GAMMA)
        ell = _walk_length(key, kind, t)
        v = np.int64(start)
        ctr = U64(1)  # draws 2.. are step draws
        for _ in range(ell):
            ctr += U64(1)
            r = _bounded(_draw(key, ctr), twod)
            if r < deg[v]:
                v = indices[indptr[v] + r]
        ends[i] = v
        lens[i] = ell
    return ends, lens
