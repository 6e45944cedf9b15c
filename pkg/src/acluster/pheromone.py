"""Pheromone dynamics and stigmergic movement probabilities."""
from __future__ import annotations

import numpy as np
from numba import njit

from .core import SimConfig
from .grid import DIR_C, DIR_R, Grid

# Turn-magnitude weights, indexed by |delta heading| 0..4: straight ahead
# down to U-turn. Strictly positive and non-increasing.
TURN_WEIGHTS = np.array([1.0, 1.0 / 2, 1.0 / 4, 1.0 / 12, 1.0 / 20], dtype=np.float64)


@njit(cache=True)
def weight_pheromone(sigma, beta, gamma):
    """(1 + sigma/(1 + gamma*sigma))**beta; saturating pull toward pheromone."""
    return (1.0 + sigma / (1.0 + gamma * sigma)) ** beta


@njit(cache=True)
def delta_index(from_dir, to_dir):
    """Minimal circular distance between two of the 8 compass directions (0..4)."""
    d = from_dir - to_dir
    if d < 0:
        d = -d
    if d > 4:
        d = 8 - d
    return d


@njit(cache=True)
def transition_scores_nb(pheromone, agents, r, c, heading, beta, gamma, probs):
    """Fill probs[0:8] with normalized move probabilities; False if fully blocked."""
    side = pheromone.shape[0]
    total = 0.0
    for k in range(8):
        rr = (r + DIR_R[k]) % side
        cc = (c + DIR_C[k]) % side
        if agents[rr, cc] >= 0:
            probs[k] = 0.0
        else:
            probs[k] = weight_pheromone(pheromone[rr, cc], beta, gamma) * TURN_WEIGHTS[
                delta_index(heading, k)
            ]
            total += probs[k]
    if total <= 0.0:
        return False
    for k in range(8):
        probs[k] /= total
    return True


def transition_probabilities(grid: Grid, agent_pos, heading: int, cfg: SimConfig):
    """8 move probabilities in heading order, or None as the stay-put signal."""
    probs = np.empty(8, dtype=np.float64)
    r, c = agent_pos
    ok = transition_scores_nb(
        grid.pheromone, grid.agents, r, c, heading, cfg.beta, cfg.gamma, probs
    )
    return probs if ok else None


def deposit(grid: Grid, pos, n_items: int, cfg: SimConfig) -> float:
    """Add eta + p_dep*n_items at pos; returns the new pheromone level."""
    r, c = pos
    grid.pheromone[r, c] += cfg.eta + cfg.p_dep * n_items
    return float(grid.pheromone[r, c])


def evaporate(grid: Grid, k_evap: float) -> Grid:
    """Multiplicative decay of the whole field, once per global time step."""
    grid.pheromone *= 1.0 - k_evap
    return grid
