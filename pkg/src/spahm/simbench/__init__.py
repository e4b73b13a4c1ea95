"""Synthetic data, baselines and metrics for the simulated fusion experiment."""
from .generate import SimInstance, SimSpec, generate
from .kmeans import KMeansResult, baseline_match_kmeans, baseline_pooled, kmeans, kmeans_plusplus
from .metrics import co_cluster_fraction, hausdorff, rel_error
from .sweep import (
    CSV_FIELDS,
    DEFAULT_GRIDS,
    METHODS,
    SWEEP_VARS,
    SweepConfig,
    cell_spec,
    evaluate_methods,
    rows_to_csv,
    run_sweep,
    summarize,
)

__all__ = [
    "CSV_FIELDS", "DEFAULT_GRIDS", "KMeansResult", "METHODS", "SWEEP_VARS", "SimInstance", "SimSpec", "SweepConfig",
    "baseline_match_kmeans", "baseline_pooled", "cell_spec", "co_cluster_fraction", "evaluate_methods",
    "generate", "hausdorff", "kmeans", "kmeans_plusplus", "rel_error", "rows_to_csv", "run_sweep",
    "summarize",
]
