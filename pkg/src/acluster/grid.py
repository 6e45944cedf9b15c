"""Toroidal lattice: item placement, agent occupancy, pheromone storage."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

from . import rng as _rng
from .core import Dataset

EMPTY = -1

# Moore directions in heading order 0..7: N, NE, E, SE, S, SW, W, NW.
# Consecutive indices are 45 degrees apart, so circular index distance is
# exactly the turn magnitude used by the direction weights.
DIR_R = np.array([-1, -1, 0, 1, 1, 1, 0, -1], dtype=np.int64)
DIR_C = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)


class Cell(NamedTuple):
    pheromone: float
    item: int | None
    agent: int | None


class Grid:
    """side x side torus; one pheromone scalar, at most one item and one agent per cell."""

    def __init__(self, side: int):
        if side < 3:
            raise ValueError("grid side must be >= 3 (Moore neighborhood needs 8 distinct cells)")
        self.side = side
        self.pheromone = np.zeros((side, side), dtype=np.float64)
        self.items = np.full((side, side), EMPTY, dtype=np.int32)
        self.agents = np.full((side, side), EMPTY, dtype=np.int32)

    def cell(self, pos) -> Cell:
        r, c = pos
        it = int(self.items[r, c])
        ag = int(self.agents[r, c])
        return Cell(
            float(self.pheromone[r, c]),
            it if it != EMPTY else None,
            ag if ag != EMPTY else None,
        )

    def neighbors8(self, pos) -> list[tuple[int, int]]:
        """The 8 Moore neighbors with wrap-around, ordered by heading index."""
        r, c = pos
        s = self.side
        return [((r + DIR_R[k]) % s, (c + DIR_C[k]) % s) for k in range(8)]

    def count_items_around(self, pos) -> int:
        r, c = pos
        return int(count_items_around_nb(self.items, r, c))

    def item_count(self) -> int:
        return int(np.count_nonzero(self.items != EMPTY))


@njit(cache=True)
def count_items_around_nb(items, r, c):
    side = items.shape[0]
    n = 0
    for k in range(8):
        if items[(r + DIR_R[k]) % side, (c + DIR_C[k]) % side] >= 0:
            n += 1
    return n


def place_items_randomly(grid: Grid, dataset: Dataset, rng_state: np.ndarray) -> Grid:
    """Drop every item of the dataset onto a distinct uniformly-sampled free cell."""
    free = np.flatnonzero(grid.items.ravel() == EMPTY)
    if len(dataset) > free.size:
        raise ValueError(f"{len(dataset)} items do not fit on {free.size} free cells")
    chosen = _sample_without_replacement(free, len(dataset), rng_state)
    flat = grid.items.ravel()
    for i, cell in enumerate(chosen):
        flat[cell] = i
    return grid


def _sample_without_replacement(pool: np.ndarray, k: int, rng_state: np.ndarray) -> np.ndarray:
    """First k entries of a partial Fisher-Yates shuffle of pool."""
    pool = pool.copy()
    for i in range(k):
        j = i + _rng.randint(rng_state, pool.size - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]
