"""Shrinkage partition distributions and the hierarchical shrinkage partition model."""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError, DataFormatError, DegenerateDataError, HSPError, InvalidArgumentError,
    ResourceLimitError,
)
from .metrics import (
    CoClusterMatrix, adjusted_rand_index, coclustering_matrix, symmetrized_f1,
    variation_of_information, vi_point_estimate,
)
from .model import ClusterParams, DataMatrix, HspState, Hyperparams, standardize
from .partition import (
    Partition, Permutation, canonicalize, crp_log_pmf, crp_predictive, enumerate_partitions,
    uniform_permutation,
)
from .sampler import PartitionTrace, SamplerConfig, run_chain
from .shrinkage import SpParams, sp_allocation_probs, sp_log_pmf, sp_sample

__all__ = [
    "CoClusterMatrix", "ClusterParams", "ConsistencyError", "DataFormatError", "DataMatrix",
    "DegenerateDataError", "HSPError", "HspState", "Hyperparams", "InvalidArgumentError",
    "Partition", "PartitionTrace", "Permutation", "ResourceLimitError", "SamplerConfig",
    "SpParams", "adjusted_rand_index", "canonicalize", "coclustering_matrix", "crp_log_pmf",
    "crp_predictive", "enumerate_partitions", "run_chain", "sp_allocation_probs",
    "sp_log_pmf", "sp_sample", "standardize", "symmetrized_f1", "uniform_permutation",
    "variation_of_information", "vi_point_estimate",
]
