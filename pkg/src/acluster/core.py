"""Shared domain types, dataset ingestion and the normalized feature distance."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist


class DatasetFormatError(ValueError):
    """Ragged records: not every row has the same number of fields."""


class DatasetParseError(ValueError):
    """A field could not be parsed as a decimal real."""


class EmptyDatasetError(ValueError):
    """The input contained no records."""


class DimensionError(ValueError):
    """Feature vectors of mismatched length."""


class ConfigError(ValueError):
    """A simulation parameter violates its range constraint."""


@dataclass(frozen=True)
class Item:
    """One object: a fixed-length real feature vector plus an optional class tag."""

    id: int
    features: tuple[float, ...]
    label: str | None = None


class Dataset:
    """Immutable collection of items sharing one feature dimension.

    ``d_max`` is the largest un-normalized root-mean-square feature distance
    over all item pairs; it is fixed at load time and never updated mid-run.
    """

    def __init__(self, features: np.ndarray, labels: list[str | None] | None = None):
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise EmptyDatasetError("need at least one record with at least one feature")
        self.features = features
        self.features.setflags(write=False)
        n, self.feature_dim = features.shape
        if labels is None:
            labels = [None] * n
        if len(labels) != n:
            raise DatasetFormatError("label count does not match record count")
        self.labels: list[str | None] = list(labels)
        self.items: list[Item] = [
            Item(i, tuple(features[i]), labels[i]) for i in range(n)
        ]
        self.d_max = _compute_d_max(features)

    def __len__(self) -> int:
        return len(self.items)


def _compute_d_max(features: np.ndarray) -> float:
    """Max pairwise RMS distance; 1.0 when all items coincide (degenerate)."""
    n, f = features.shape
    if n < 2:
        return 1.0
    d = float(pdist(features, "euclidean").max()) / math.sqrt(f)
    return d if d > 0.0 else 1.0


def load_dataset(source, label_column: bool = False, delimiter: str | None = None) -> Dataset:
    """Parse a delimiter-separated text table into a Dataset.

    ``source`` is a file path, a string of lines, or an iterable of lines.
    With ``label_column`` the trailing column is read as a class tag.
    The delimiter is sniffed (tab, else comma) unless given.
    """
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    elif isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = [str(l).rstrip("\n") for l in source]
    lines = [l for l in lines if l.strip()]
    if not lines:
        raise EmptyDatasetError("no records in input")
    if delimiter is None:
        delimiter = "\t" if "\t" in lines[0] else ","

    rows: list[list[float]] = []
    labels: list[str | None] = []
    width = None
    for ln, line in enumerate(lines, 1):
        parts = [p.strip() for p in line.split(delimiter)]
        if width is None:
            width = len(parts)
        elif len(parts) != width:
            raise DatasetFormatError(f"line {ln}: expected {width} fields, got {len(parts)}")
        if label_column:
            if width < 2:
                raise DatasetFormatError("label column requested but records have one field")
            labels.append(parts[-1])
            parts = parts[:-1]
        else:
            labels.append(None)
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise DatasetParseError(f"line {ln}: {exc}") from exc
    return Dataset(np.array(rows, dtype=np.float64), labels)


def normalized_distance(a: Item, b: Item, dataset: Dataset) -> float:
    """RMS feature distance between two items, scaled by the dataset's d_max."""
    if len(a.features) != len(b.features):
        raise DimensionError("feature vectors differ in length")
    fa = np.asarray(a.features)
    fb = np.asarray(b.features)
    return float(math.sqrt(np.mean((fa - fb) ** 2)) / dataset.d_max)


@dataclass
class SimConfig:
    """Every tunable of a run. Defaults follow the published parameter box."""

    k1: float = 0.1
    k2: float = 0.3
    beta: float = 3.5
    gamma: float = 0.2
    eta: float = 0.07
    k_evap: float = 0.015
    p_dep: float = 0.0025
    theta_count: float = 5.0
    steepness: float = 2.0
    t_max: int = 10**6
    function_type: int = 1
    lf_alpha: float = 0.3
    lf_s: int = 3
    grid_side: int = 57
    n_agents: int = 80
    seed: int = 1
    drain_cap: int = 10**5
    shuffle_agents: bool = False

    def __post_init__(self):
        checks = [
            (self.k1 > 0, "k1 must be positive"),
            (self.k2 > 0, "k2 must be positive"),
            (self.gamma >= 0, "gamma must be non-negative"),
            (self.eta >= 0, "eta must be non-negative"),
            (0.0 <= self.k_evap <= 1.0, "k_evap must lie in [0,1]"),
            (self.p_dep >= 0, "p_dep must be non-negative"),
            (self.theta_count > 0, "theta_count must be positive"),
            (self.steepness > 1, "steepness must exceed 1"),
            (self.t_max >= 0, "t_max must be non-negative"),
            (self.function_type in (1, 2, 3, 4), "function_type must be 1..4"),
            (self.lf_alpha > 0, "lf_alpha must be positive"),
            (self.lf_s >= 3 and self.lf_s % 2 == 1, "lf_s must be an odd integer >= 3"),
            (self.grid_side >= 3, "grid_side must be >= 3"),
            (self.n_agents >= 1, "n_agents must be >= 1"),
            (self.drain_cap >= 0, "drain_cap must be non-negative"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        self.t_max = int(self.t_max)
        self.seed = int(self.seed) & 0xFFFFFFFFFFFFFFFF
