"""Benchmark data generation and empirical experiment sizing."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset


@dataclass(frozen=True)
class GaussianCluster:
    label: str
    mean_x: float
    mean_y: float
    stddev: float
    count: int

    def __post_init__(self):
        if self.count <= 0:
            raise ValueError("cluster count must be positive")
        if self.stddev <= 0:
            raise ValueError("cluster stddev must be positive")


@dataclass(frozen=True)
class GaussianSpec:
    clusters: tuple[GaussianCluster, ...]


# Four 200-point clusters at the corners of [0.2, 0.8]^2, stddev 0.1.
PAPER_GAUSSIAN = GaussianSpec((
    GaussianCluster("A", 0.2, 0.2, 0.1, 200),
    GaussianCluster("B", 0.8, 0.2, 0.1, 200),
    GaussianCluster("C", 0.8, 0.8, 0.1, 200),
    GaussianCluster("D", 0.2, 0.8, 0.1, 200),
))


def generate_gaussian(spec: GaussianSpec, rng: np.random.Generator) -> Dataset:
    """Labeled 2-feature items sampled from the given normals, in spec order."""
    rows = []
    labels: list[str | None] = []
    for cl in spec.clusters:
        xy = rng.normal((cl.mean_x, cl.mean_y), cl.stddev, size=(cl.count, 2))
        rows.append(xy)
        labels.extend([cl.label] * cl.count)
    return Dataset(np.vstack(rows), labels)


def size_experiment(n_items: int) -> dict[str, int]:
    """Grid side and ant count from the empirical rules A = 4*n_o, n_a = A/40."""
    if n_items < 1:
        raise ValueError("n_items must be positive")
    side = max(3, round(math.sqrt(4 * n_items)))
    agents = max(1, round(side * side / 40))
    return {"grid_side": side, "n_agents": agents}
