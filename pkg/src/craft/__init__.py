"""Nonparametric clustering of mixed categorical/numeric data with
cluster-specific feature selection (CRAFT), plus DP-means style baselines,
planted-subspace generators and clustering metrics."""

__version__ = "0.1.0"

from .baselines import binary_entropy_fit, dpmeans_fit, dprf_fit, one_hot
from .data import ClusterState, Column, Dataset, Hyperparams, Schema, ingest
from .engine import (
    ClusteringResult,
    compute_f_constants,
    craft_fit,
    craft_fit_best,
    objective_value,
)
from .errors import CraftError
from .lambda_select import CraftSingletonCost, SquaredEuclidean, farthest_first_lambda
from .metrics import mask_recovery, nmi, purity

__all__ = [
    "ClusterState",
    "ClusteringResult",
    "Column",
    "CraftError",
    "CraftSingletonCost",
    "Dataset",
    "Hyperparams",
    "Schema",
    "SquaredEuclidean",
    "binary_entropy_fit",
    "compute_f_constants",
    "craft_fit",
    "craft_fit_best",
    "dpmeans_fit",
    "dprf_fit",
    "farthest_first_lambda",
    "ingest",
    "mask_recovery",
    "nmi",
    "objective_value",
    "one_hot",
    "purity",
]
