"""Seedable splitmix64 stream, usable both from Python and inside jitted kernels.

A hand-rolled generator (rather than numpy's) so that the exact draw sequence
is pinned by this module alone: runs are bit-reproducible from the seed no
matter how the simulation is chunked across kernel calls.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def make_stream(seed: int) -> np.ndarray:
    """One-element uint64 state array; pass it by reference to the draw functions."""
    return np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)


@njit(cache=True)
def next_u64(state):
    state[0] = state[0] + _GOLDEN
    z = state[0]
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def uniform(state):
    """Uniform double in [0, 1)."""
    return float(next_u64(state) >> _S11) * _INV53


@njit(cache=True)
def randint(state, n):
    """Uniform integer in [0, n)."""
    k = int(uniform(state) * n)
    if k >= n:
        k = n - 1
    return k
