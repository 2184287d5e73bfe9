"""Estimator layer: the library's solvers behind the fit/predict idiom.

Thin wrappers that validate input, call the underlying routines, and leave
``labels_`` behind (-1 marks vertices outside every cluster). Parameters
mirror the wrapped functions' arguments one to one, so anything tunable
there is tunable here.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .affinity import coassociation, consensus
from .bench import point_affinity, scod_labels
from .cdsc import (
    ConstrainedProgram,
    enumerate_all_constrained,
    resolve_overlaps,
    solve_cdsc,
)
from .core import build_affinity
from .dsets import peel_off_enumerate
from .dynamics import SolverConfig
from .exceptions import ValidationError
from .scod import scod


class DominantSetClustering(ClusterMixin, BaseEstimator):
    """Peel-off clustering of a precomputed affinity matrix.

    fit leaves clusters_ (in extraction order) and labels_, where label k
    means membership in clusters_[k] and -1 means no cluster took the
    vertex.
    """

    def __init__(
        self,
        min_cluster_size: int = 2,
        max_clusters: int | None = None,
        solver: str = "inimdyn",
        seed: int = 0,
        config: SolverConfig | None = None,
    ):
        self.min_cluster_size = min_cluster_size
        self.max_clusters = max_clusters
        self.solver = solver
        self.seed = seed
        self.config = config

    def fit(self, X, y=None):
        a = build_affinity(X, mode="strict")
        self.clusters_ = peel_off_enumerate(
            a,
            min_cluster_size=self.min_cluster_size,
            max_clusters=self.max_clusters,
            config=self.config,
            solver=self.solver,
            seed=self.seed,
        )
        labels = np.full(a.shape[0], -1, dtype=np.intp)
        for cid, cluster in enumerate(self.clusters_):
            labels[cluster.support] = cid
        self.labels_ = labels
        self.n_clusters_ = len(self.clusters_)
        return self


class ConstrainedDominantSetClustering(ClusterMixin, BaseEstimator):
    """Constrained clustering with a diagonal penalty off the query set.

    With constraints given, fit extracts the single cluster guaranteed to
    intersect them (labels_ is 0 on its members, -1 elsewhere) and records
    alpha_. Without constraints, it covers the whole graph by shrinking
    enumeration and assigns every vertex (no -1s), with alpha varying per
    round and alpha_ left as None.
    """

    def __init__(
        self,
        constraints=None,
        alpha: float | str = "auto",
        solver: str = "inimdyn",
        seed: int = 0,
        bound_mode: str = "max_degree",
        config: SolverConfig | None = None,
    ):
        self.constraints = constraints
        self.alpha = alpha
        self.solver = solver
        self.seed = seed
        self.bound_mode = bound_mode
        self.config = config

    def fit(self, X, y=None):
        a = build_affinity(X, mode="strict")
        if self.constraints is None:
            clusters = enumerate_all_constrained(
                a,
                config=self.config,
                solver=self.solver,
                seed=self.seed,
                bound_mode=self.bound_mode,
            )
            self.clusters_ = clusters
            self.labels_ = resolve_overlaps(clusters)
            self.alpha_ = None
            return self
        alpha = None if self.alpha == "auto" else float(self.alpha)
        prog = ConstrainedProgram(a, self.constraints, alpha=alpha, bound_mode=self.bound_mode)
        cluster = solve_cdsc(prog, solver=self.solver, config=self.config, seed=self.seed)
        self.clusters_ = [cluster]
        self.alpha_ = prog.alpha
        labels = np.full(a.shape[0], -1, dtype=np.intp)
        labels[cluster.support] = 0
        self.labels_ = labels
        return self


class OutlierAwareClustering(ClusterMixin, BaseEstimator):
    """Simultaneous clustering and outlier detection.

    input_kind selects what fit receives: "precomputed" for an affinity
    matrix, "points" for row-vector data converted through the contrast
    affinity first. Outliers come back as label -1 and as outliers_.
    """

    def __init__(
        self,
        input_kind: str = "precomputed",
        neighbor_fraction: float = 0.10,
        solver: str = "inimdyn",
        seed: int = 0,
        config: SolverConfig | None = None,
    ):
        self.input_kind = input_kind
        self.neighbor_fraction = neighbor_fraction
        self.solver = solver
        self.seed = seed
        self.config = config

    def fit(self, X, y=None):
        if self.input_kind == "points":
            a = point_affinity(np.asarray(X, dtype=np.float64))
        elif self.input_kind == "precomputed":
            a = build_affinity(X, mode="strict")
        else:
            raise ValidationError(
                f"input_kind must be 'points' or 'precomputed', got {self.input_kind!r}"
            )
        self.result_ = scod(
            a,
            neighbor_fraction=self.neighbor_fraction,
            config=self.config,
            solver=self.solver,
            seed=self.seed,
        )
        self.labels_ = scod_labels(self.result_, a.shape[0])
        self.outliers_ = np.flatnonzero(self.labels_ == -1)
        self.n_clusters_ = len(self.result_.clusters)
        return self


class ConsensusClustering(ClusterMixin, BaseEstimator):
    """Evidence-accumulation consensus over an ensemble of labelings.

    fit takes a list of label vectors (one per clustering run). Items no
    consensus cluster claims keep their identity as fresh singleton labels
    rather than -1: an item every run clustered alone is its own cluster,
    not noise.
    """

    def __init__(
        self,
        min_cluster_size: int = 2,
        solver: str = "inimdyn",
        seed: int = 0,
        config: SolverConfig | None = None,
    ):
        self.min_cluster_size = min_cluster_size
        self.solver = solver
        self.seed = seed
        self.config = config

    def fit(self, X, y=None):
        co = coassociation(X)
        self.coassociation_ = co
        self.clusters_ = consensus(
            co,
            min_cluster_size=self.min_cluster_size,
            config=self.config,
            solver=self.solver,
            seed=self.seed,
        )
        n = co.matrix.shape[0]
        labels = np.full(n, -1, dtype=np.intp)
        for cid, cluster in enumerate(self.clusters_):
            labels[cluster.support] = cid
        fresh = len(self.clusters_)
        for i in np.flatnonzero(labels == -1):
            labels[i] = fresh
            fresh += 1
        self.labels_ = labels
        self.n_clusters_ = fresh
        return self
