"""Unbalanced incomplete multi-view clustering with adaptive view weighting."""

from .dataset import (
    ClusteringReport,
    IncompleteDataset,
    IndicatorMatrix,
    MaskSpec,
    MultiViewDataset,
    ViewClass,
    apply_mask,
    build_indicator,
    classify_views,
    load_dataset,
    load_incomplete,
    mean_fill,
    save_dataset,
    save_incomplete,
    save_report,
)
from .solver import SolveOutput, SolverConfig, solve
from .synth import make_synthetic

__all__ = [
    "ClusteringReport",
    "IncompleteDataset",
    "IndicatorMatrix",
    "MaskSpec",
    "MultiViewDataset",
    "SolveOutput",
    "SolverConfig",
    "ViewClass",
    "apply_mask",
    "build_indicator",
    "classify_views",
    "load_dataset",
    "load_incomplete",
    "make_synthetic",
    "mean_fill",
    "save_dataset",
    "save_incomplete",
    "save_report",
    "solve",
]

__version__ = "0.1.0"
