"""Pick-up/drop probability functions: response-threshold building blocks,
their compositions #1..#3, the basic-model reference forms, and the
Lumer-Faieta baseline (#4)."""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import Dataset, Item
from .grid import Grid

SUB_A = 0
SUB_B = 1

VARIANTS = (1, 2, 3, 4)


@njit(cache=True)
def chi(n_items, theta_count, steepness):
    """Crowding response n^s/(n^s + theta^s); 1/2 exactly at n == theta."""
    if n_items <= 0:
        return 0.0
    s = float(n_items) ** steepness
    return s / (s + theta_count**steepness)


@njit(cache=True)
def delta_drop(d, k1):
    """Similarity response for dropping: (k1/(k1+d))^2, 1 at d=0."""
    return (k1 / (k1 + d)) ** 2


@njit(cache=True)
def epsilon_pick(d, k2):
    """Dissimilarity response for picking: (d/(k2+d))^2, 0 at d=0."""
    return (d / (k2 + d)) ** 2


@njit(cache=True)
def compose_nb(variant, sub, chi_val, eps_val, delta_val):
    """(P_pick, P_drop) per composition table rows #1..#3."""
    if variant == 1 or (variant == 2 and sub == SUB_A):
        return (1.0 - chi_val) * eps_val, chi_val * delta_val
    if variant == 3 and sub == SUB_A:
        return 1.0 - chi_val, chi_val
    # #2(b) and #3(b): raw similarity responses
    return eps_val, delta_val


def compose_probabilities(variant: int, agent_sub: int, chi_val: float, eps_val: float,
                          delta_val: float) -> tuple[float, float]:
    if variant == 4:
        raise ValueError("variant #4 is the Lumer-Faieta rule; use lf_probabilities")
    if variant not in (1, 2, 3):
        raise ValueError(f"unknown function variant {variant}")
    return compose_nb(variant, agent_sub, chi_val, eps_val, delta_val)


@njit(cache=True)
def rms_distance_nb(features, idx, fvec, d_max):
    """Normalized RMS distance between item row idx and an explicit vector."""
    nf = features.shape[1]
    acc = 0.0
    for k in range(nf):
        diff = features[idx, k] - fvec[k]
        acc += diff * diff
    return math.sqrt(acc / nf) / d_max


@njit(cache=True)
def lf_density_nb(items, features, d_max, r, c, fvec, s, alpha):
    """max{0, (1/s^2) sum over the s x s window (center excluded) of 1 - d/alpha}."""
    side = items.shape[0]
    h = s // 2
    acc = 0.0
    for dr in range(-h, h + 1):
        for dc in range(-h, h + 1):
            if dr == 0 and dc == 0:
                continue
            oid = items[(r + dr) % side, (c + dc) % side]
            if oid >= 0:
                acc += 1.0 - rms_distance_nb(features, oid, fvec, d_max) / alpha
    f = acc / (s * s)
    return f if f > 0.0 else 0.0


def lf_local_density(grid: Grid, pos, item: Item, dataset: Dataset, s: int,
                     alpha: float) -> float:
    if s < 3 or s % 2 == 0:
        raise ValueError("perception window side must be an odd integer >= 3")
    r, c = pos
    fvec = np.asarray(item.features, dtype=np.float64)
    return float(lf_density_nb(grid.items, dataset.features, dataset.d_max,
                               r, c, fvec, s, alpha))


@njit(cache=True)
def lf_probabilities_nb(f, k1, k2):
    pp = (k1 / (k1 + f)) ** 2
    if f >= k2:
        pd = 1.0
    else:
        pd = 2.0 * f
        if pd > 1.0:
            pd = 1.0
    return pp, pd


def lf_probabilities(f: float, k1: float, k2: float) -> tuple[float, float]:
    """Lumer-Faieta (P_pick, P_drop) from the local density f."""
    return lf_probabilities_nb(f, k1, k2)


def bm_probabilities(f_fraction: float, k1: float, k2: float) -> tuple[float, float]:
    """Basic-model reference forms: P_pick=(k1/(k1+f))^2, P_drop=(f/(k2+f))^2.

    The memory-based estimate of f is out of scope; this evaluator exists so
    the closed forms stay unit-testable.
    """
    pp = (k1 / (k1 + f_fraction)) ** 2
    pd = (f_fraction / (k2 + f_fraction)) ** 2
    return pp, pd
