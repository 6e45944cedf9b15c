"""Spatial entropy and connected-component cluster extraction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .grid import DIR_C, DIR_R, EMPTY, Grid


class UndefinedLabelError(ValueError):
    """Entropy requested for a label with no resident items."""


@dataclass(frozen=True)
class EntropyRecord:
    t: int
    per_class: dict[str, float]
    total: float


@dataclass(frozen=True)
class Cluster:
    members: tuple[int, ...]
    majority_label: str
    purity: float
    size: int


@dataclass(frozen=True)
class ClusterReport:
    clusters: tuple[Cluster, ...]
    n_clusters: int


def _label_codes(grid: Grid, dataset: Dataset) -> tuple[np.ndarray, list[str]]:
    """Grid of per-cell class codes (-1 empty) plus the sorted label list.

    An unlabeled dataset collapses to the single class "all" (pure spatial
    compactness).
    """
    labels = sorted({l for l in dataset.labels if l is not None})
    if not labels:
        labels = ["all"]
        lookup = np.zeros(len(dataset), dtype=np.int64)
    else:
        index = {l: i for i, l in enumerate(labels)}
        lookup = np.array([index.get(l, -1) for l in dataset.labels], dtype=np.int64)
    codes = np.full(grid.items.shape, -1, dtype=np.int64)
    mask = grid.items != EMPTY
    codes[mask] = lookup[grid.items[mask]]
    return codes, labels


def _same_class_neighbor_counts(codes: np.ndarray) -> np.ndarray:
    """For every cell, how many of its 8 toroidal neighbors share its class."""
    same = np.zeros(codes.shape, dtype=np.int64)
    occupied = codes >= 0
    for k in range(8):
        rolled = np.roll(codes, (-int(DIR_R[k]), -int(DIR_C[k])), axis=(0, 1))
        same += occupied & (rolled == codes)
    return same


def class_entropy(grid: Grid, dataset: Dataset, label: str) -> float:
    """Mean fraction of non-same-class Moore neighbors over resident items of
    one class; 1.0 when every such item is fully isolated."""
    codes, labels = _label_codes(grid, dataset)
    if label not in labels:
        raise UndefinedLabelError(f"unknown label {label!r}")
    code = labels.index(label)
    cells = codes == code
    n = int(np.count_nonzero(cells))
    if n == 0:
        raise UndefinedLabelError(f"no resident items with label {label!r}")
    same = _same_class_neighbor_counts(codes)
    return float((8 * n - same[cells].sum()) / (8 * n))


def total_entropy(grid: Grid, dataset: Dataset, t: int = 0) -> EntropyRecord:
    """Sum of per-class entropies over all labels with resident items."""
    codes, labels = _label_codes(grid, dataset)
    same = _same_class_neighbor_counts(codes)
    per_class: dict[str, float] = {}
    for code, label in enumerate(labels):
        cells = codes == code
        n = int(np.count_nonzero(cells))
        if n == 0:
            continue
        per_class[label] = float((8 * n - same[cells].sum()) / (8 * n))
    return EntropyRecord(t, per_class, float(sum(per_class.values())))


def extract_clusters(grid: Grid, dataset: Dataset, connectivity: int = 8) -> ClusterReport:
    """Connected components of resident items on the torus, with purity stats."""
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    side = grid.side
    if connectivity == 8:
        dirs = list(zip(DIR_R.tolist(), DIR_C.tolist()))
    else:
        dirs = [(-1, 0), (0, 1), (1, 0), (0, -1)]
    seen = np.zeros((side, side), dtype=bool)
    clusters: list[Cluster] = []
    for r0 in range(side):
        for c0 in range(side):
            if grid.items[r0, c0] == EMPTY or seen[r0, c0]:
                continue
            stack = [(r0, c0)]
            seen[r0, c0] = True
            members: list[int] = []
            while stack:
                r, c = stack.pop()
                members.append(int(grid.items[r, c]))
                for dr, dc in dirs:
                    rr, cc = (r + dr) % side, (c + dc) % side
                    if not seen[rr, cc] and grid.items[rr, cc] != EMPTY:
                        seen[rr, cc] = True
                        stack.append((rr, cc))
            counts: dict[str, int] = {}
            for m in members:
                lab = dataset.labels[m] or "unlabeled"
                counts[lab] = counts.get(lab, 0) + 1
            majority = min(counts, key=lambda l: (-counts[l], l))
            clusters.append(Cluster(tuple(sorted(members)), majority,
                                    counts[majority] / len(members), len(members)))
    clusters.sort(key=lambda cl: (-cl.size, cl.members))
    return ClusterReport(tuple(clusters), len(clusters))
