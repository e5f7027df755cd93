"""Ultrametric subsets, covering submeasures and chaining functionals on
finite metric spaces."""

from .config import set_tolerance, tolerance
from .errors import (ArgumentError, CapacityError, ContractError,
                     InternalInvariantError, MetricValueError, StructuralError,
                     SubmeasureContractError, UmskelError)
from .experiment import ExperimentConfig, gaussian_argmax_experiment
from .gamma_delta import (PHI2, PhiFunction, equalizing_measure, find_dominated_point,
                          gamma_delta_bounds, gamma_delta_grid,
                          majorizing_chain_check, profile_integral, star_space,
                          star_witness_values)
from .kernels import BACKEND
from .measures import MeasureVec, WeightedSpace
from .metric import (FiniteMetricSpace, closed_ball, equilateral_space, path_space,
                     restrict_space, validate_metric)
from .skeleton import (SkeletonResult, build_skeleton, dvoretzky_check,
                       multi_measure_skeleton, skeleton_search, verify_growth)
from .subdominant import (exhaustive_min_distortion, min_ultrametric_distortion,
                          subdominant_ultrametric)
from .submeasures import (CoveringSubmeasure, TableSubmeasure, covering_submeasure,
                          submeasure_to_measure)
from .tree import (DistortionCertificate, UltrametricTree, distortion_certificate,
                   restrict_tree, ultrametric_from_tree)
from .union import (ClusterPartition, MergeParams, make_line_example, merge_params,
                    multi_union, union_partition_step, union_ultrametric)

__version__ = "0.1.0"


def restrict(obj, subset):
    """Induced subspace of a metric space, or pruned subtree of a dendrogram."""
    if isinstance(obj, FiniteMetricSpace):
        return restrict_space(obj, subset)
    if isinstance(obj, UltrametricTree):
        return restrict_tree(obj, subset)
    raise ArgumentError(f"cannot restrict a {type(obj).__name__}")

__all__ = [
    "ArgumentError", "BACKEND", "CapacityError", "ClusterPartition",
    "ContractError", "CoveringSubmeasure", "DistortionCertificate",
    "ExperimentConfig", "FiniteMetricSpace", "InternalInvariantError",
    "MeasureVec", "MergeParams", "MetricValueError", "PHI2", "PhiFunction",
    "SkeletonResult", "StructuralError", "SubmeasureContractError",
    "TableSubmeasure", "UltrametricTree", "UmskelError", "WeightedSpace",
    "build_skeleton", "closed_ball", "covering_submeasure",
    "distortion_certificate", "dvoretzky_check", "equalizing_measure",
    "equilateral_space", "exhaustive_min_distortion", "find_dominated_point",
    "gamma_delta_bounds", "gamma_delta_grid", "gaussian_argmax_experiment",
    "majorizing_chain_check", "make_line_example", "merge_params",
    "min_ultrametric_distortion", "multi_measure_skeleton", "multi_union",
    "path_space", "profile_integral", "restrict", "restrict_space", "restrict_tree",
    "set_tolerance", "skeleton_search", "star_space", "star_witness_values",
    "subdominant_ultrametric", "submeasure_to_measure", "tolerance",
    "ultrametric_from_tree", "union_partition_step", "union_ultrametric",
    "validate_metric", "verify_growth",
]
