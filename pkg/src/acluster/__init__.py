"""Stigmergic ant clustering on a toroidal grid."""

__version__ = "0.1.0"

from .core import Dataset, Item, SimConfig, load_dataset, normalized_distance
from .datasets import PAPER_GAUSSIAN, GaussianSpec, generate_gaussian, size_experiment
from .engine import SimState, init_state, run, step
from .grid import Grid
from .metrics import class_entropy, extract_clusters, total_entropy

__all__ = [
    "Dataset", "Item", "SimConfig", "load_dataset", "normalized_distance",
    "PAPER_GAUSSIAN", "GaussianSpec", "generate_gaussian", "size_experiment",
    "SimState", "init_state", "run", "step", "Grid",
    "class_entropy", "extract_clusters", "total_entropy",
    "__version__",
]
