"""Dominant-set clustering toolkit.

Graph clustering through evolutionary game dynamics: plain dominant-set
peeling, constrained (query-seeded) variants with a fast localized solver,
simultaneous clustering and outlier detection, affinity construction
helpers, and consensus across clustering ensembles.
"""

from .affinity import (
    CoassociationMatrix,
    CovarianceDescriptor,
    coassociation,
    consensus,
    covariance_descriptor,
    covariance_distance,
    homogenize,
    joint_distance,
    kernel_trick_affinity,
    laplacian_kernel,
    similarity,
    tracklet_affinity_mean,
    tracklet_affinity_min,
    tracklet_affinity_representative,
    update_with_priors,
)
from .assoc import (
    AssociationResult,
    AssociationSet,
    GroupedAffinity,
    RankedNeighborList,
    dynamic_nn_select,
    feature_weights,
    gate_grouped_affinity,
    prune_query,
    refine_constraint1,
    refine_constraint2,
    track_association,
    transitive_closure,
)
from .bench import (
    OUTLIER,
    LabeledDataset,
    clique_grid,
    evaluate_scod,
    gen_synthetic,
    jaccard,
    point_affinity,
    purity,
    run_fastcdsc_speed,
    run_scod_synthetic,
    scod_labels,
    v_measure,
)
from .cdsc import (
    ConstrainedCluster,
    ConstrainedProgram,
    alpha_lower_bound,
    enumerate_all_constrained,
    fast_cdsc,
    find_dominant_distribution,
    kkt_check,
    resolve_overlaps,
    solve_cdsc,
)
from .core import Cluster, barycenter, build_affinity, quadratic_value, support, symmetrize
from .dsets import (
    DominantSetReport,
    brute_force_dominant_sets,
    characteristic_vector,
    extract_dominant_set,
    is_dominant_set,
    node_weight,
    peel_off_enumerate,
    total_weight,
    weighted_degree,
)
from .dynamics import (
    FixedPointResult,
    SolverConfig,
    epsilon,
    inimdyn,
    perturbed_barycenter,
    replicator_step,
    run_dynamics,
    run_replicator,
    solve_polished,
    solve_stable,
)
from .estimators import (
    ConsensusClustering,
    ConstrainedDominantSetClustering,
    DominantSetClustering,
    OutlierAwareClustering,
)
from .io import (
    load_matrix,
    read_clusterings,
    read_dense_matrix,
    read_descriptors,
    read_edge_list,
    read_groups,
    read_labeled_points,
    write_dense_matrix,
    write_labeled_points,
)
from .scod import (
    ScodResult,
    gaussian_affinity,
    global_cohesiveness,
    learn_robust_affinity,
    scod,
)

__version__ = "0.1.0"

__all__ = [
    "AssociationResult",
    "AssociationSet",
    "Cluster",
    "CoassociationMatrix",
    "ConsensusClustering",
    "ConstrainedCluster",
    "ConstrainedDominantSetClustering",
    "ConstrainedProgram",
    "CovarianceDescriptor",
    "DominantSetClustering",
    "DominantSetReport",
    "FixedPointResult",
    "GroupedAffinity",
    "LabeledDataset",
    "OUTLIER",
    "OutlierAwareClustering",
    "RankedNeighborList",
    "ScodResult",
    "SolverConfig",
    "alpha_lower_bound",
    "barycenter",
    "brute_force_dominant_sets",
    "build_affinity",
    "characteristic_vector",
    "clique_grid",
    "coassociation",
    "consensus",
    "covariance_descriptor",
    "covariance_distance",
    "dynamic_nn_select",
    "enumerate_all_constrained",
    "epsilon",
    "evaluate_scod",
    "extract_dominant_set",
    "fast_cdsc",
    "feature_weights",
    "find_dominant_distribution",
    "gate_grouped_affinity",
    "gaussian_affinity",
    "gen_synthetic",
    "global_cohesiveness",
    "homogenize",
    "inimdyn",
    "is_dominant_set",
    "jaccard",
    "joint_distance",
    "kernel_trick_affinity",
    "kkt_check",
    "laplacian_kernel",
    "learn_robust_affinity",
    "load_matrix",
    "node_weight",
    "peel_off_enumerate",
    "perturbed_barycenter",
    "point_affinity",
    "prune_query",
    "purity",
    "quadratic_value",
    "read_clusterings",
    "read_dense_matrix",
    "read_descriptors",
    "read_edge_list",
    "read_groups",
    "read_labeled_points",
    "refine_constraint1",
    "refine_constraint2",
    "replicator_step",
    "resolve_overlaps",
    "run_dynamics",
    "run_fastcdsc_speed",
    "run_replicator",
    "run_scod_synthetic",
    "scod",
    "scod_labels",
    "similarity",
    "solve_cdsc",
    "solve_polished",
    "solve_stable",
    "support",
    "symmetrize",
    "total_weight",
    "track_association",
    "tracklet_affinity_mean",
    "tracklet_affinity_min",
    "tracklet_affinity_representative",
    "transitive_closure",
    "update_with_priors",
    "v_measure",
    "weighted_degree",
    "write_dense_matrix",
    "write_labeled_points",
]
