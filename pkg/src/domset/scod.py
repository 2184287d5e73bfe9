"""Simultaneous clustering and outlier detection.

Peel-off extraction with two admission gates: a candidate support only
counts as a cluster if its cohesiveness beats the global average both in
the input affinity and in a robustified affinity that downweights vertices
whose neighborhoods are weak. Everything that fails a gate is an outlier
set. The number of clusters and the number of outliers both fall out of
the data; no thresholds on cluster size are involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Cluster, quadratic_value, support
from .dynamics import SolverConfig, perturbed_barycenter, solve_stable
from .exceptions import (
    DegenerateSigmaError,
    NegativeWeightError,
    ValidationError,
    ZeroSizeError,
)

# A cohesiveness within this relative distance of the global value counts
# as a tie, and ties are rejected (the conservative reading of the strict
# gate); without the guard the mathematically-tied boundary case would be
# decided by the last rounding error.
GATE_TIE_TOL = 1e-12


@dataclass(frozen=True)
class ScodResult:
    """Partition of the vertices into clusters and outlier sets.

    clusters and outlier_sets are disjoint and together cover every vertex;
    each cluster passed both cohesiveness gates against
    global_cohesiveness, each outlier set failed at least one.
    """

    clusters: list[Cluster] = field(default_factory=list)
    outlier_sets: list[np.ndarray] = field(default_factory=list)
    global_cohesiveness: float = 0.0

    @property
    def outliers(self) -> np.ndarray:
        """All outlier vertices pooled into one sorted id array."""
        if not self.outlier_sets:
            return np.empty(0, dtype=np.intp)
        return np.sort(np.concatenate(self.outlier_sets))


def _square(A) -> np.ndarray:
    a = np.asarray(A, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("expected a square matrix")
    if a.shape[0] == 0:
        raise ZeroSizeError("matrix must be nonempty")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix entries must be finite")
    return a


def learn_robust_affinity(A, neighbor_fraction: float) -> np.ndarray:
    """Reweight an affinity by each vertex's local neighborhood strength.

    w(i) is the mean of the N strongest off-diagonal entries in row i,
    N = max(1, round(neighbor_fraction * n)) clamped to the n - 1 entries
    a row actually has, and the output is S(i,j) = w(i) w(j) A(i,j).
    Vertices that are only weakly tied to their best neighbors get their
    rows and columns shrunk quadratically, which is what lets a compact
    knot of mutually-similar outliers fail the cluster gate.
    """
    a = _square(A)
    if not 0.0 < neighbor_fraction <= 1.0:
        raise ValidationError(
            f"neighbor_fraction must be in (0, 1], got {neighbor_fraction:g}"
        )
    n = a.shape[0]
    if n == 1:
        return np.zeros_like(a)
    top = max(1, round(neighbor_fraction * n))
    top = min(top, n - 1)
    off = a.copy()
    np.fill_diagonal(off, -np.inf)
    w = np.partition(off, n - top - 1, axis=1)[:, n - top:].mean(axis=1)
    return np.outer(w, w) * a


def global_cohesiveness(A) -> float:
    """Quadratic value at the barycenter: the mean entry of the matrix."""
    a = _square(A)
    n = a.shape[0]
    return float(a.sum()) / float(n * n)


def gaussian_affinity(D, sigma: float | None = None) -> np.ndarray:
    """Turn pairwise distances into a Gaussian affinity.

    Off-diagonal entries become exp(-D_ij / (2 sigma^2)) and the diagonal
    is zero. When sigma is omitted it defaults to the median off-diagonal
    distance; a zero median (all points identical) is degenerate.
    """
    d = _square(D)
    gap = float(np.abs(d - d.T).max(initial=0.0))
    if gap > 1e-12 * max(1.0, float(np.abs(d).max())):
        raise ValidationError("distance matrix must be symmetric")
    d = (d + d.T) / 2.0
    if np.any(d < 0.0):
        raise NegativeWeightError("distances must be nonnegative")
    if np.any(np.diag(d) != 0.0):
        raise ValidationError("distance matrix must have a zero diagonal")
    n = d.shape[0]
    mask = ~np.eye(n, dtype=bool)
    if sigma is None:
        sigma = float(np.median(d[mask])) if n > 1 else 0.0
    sigma = float(sigma)
    if sigma <= 0.0:
        raise DegenerateSigmaError(
            "kernel bandwidth is zero; all points are identical"
        )
    a = np.exp(-d / (2.0 * sigma * sigma))
    a[~mask] = 0.0
    return a


def _local_solution(sub, config, solver, seed):
    """One StQP solution on the active submatrix (indices local)."""
    if not np.any(sub > 0.0):
        # a flat payoff leaves the dynamics exactly where they start, so
        # the whole remainder is one (maximally incohesive) support
        m = sub.shape[0]
        return np.full(m, 1.0 / m), np.arange(m, dtype=np.intp)
    res = solve_stable(sub, perturbed_barycenter(sub.shape[0], seed), config, solver, seed=seed)
    return res.x, support(res.x, config.zero_tol)


def scod(
    A,
    neighbor_fraction: float = 0.10,
    config: SolverConfig | None = None,
    solver: str = "inimdyn",
    seed: int = 0,
) -> ScodResult:
    """Partition a graph into cohesive clusters and outlier sets.

    The robust affinity S and the global cohesiveness GC are computed once
    on the full input and held fixed. Each round extracts one local StQP
    solution on the surviving submatrix, maps it back to original ids, and
    admits it as a cluster only if its cohesiveness exceeds GC in both A
    and S (ties reject); either way its support leaves the active set, so
    the loop always terminates. Rows of S are never rebuilt on the
    shrunken matrix; that would quietly change what GC measures.
    """
    a = _square(A)
    config = config or SolverConfig()
    n = a.shape[0]
    s = learn_robust_affinity(a, neighbor_fraction)
    gc = global_cohesiveness(a)
    bar = gc + GATE_TIE_TOL * max(1.0, abs(gc))
    alive = np.arange(n, dtype=np.intp)
    clusters: list[Cluster] = []
    outlier_sets: list[np.ndarray] = []
    while alive.size:
        sub = a[np.ix_(alive, alive)]
        if float(sub.max(initial=0.0)) <= bar:
            # No distribution on the remainder can push its cohesiveness
            # past the bar (x'Ax <= max entry on the simplex), so every
            # surviving vertex is an outlier no matter how it is grouped.
            outlier_sets.append(alive.copy())
            break
        x_local, sup_local = _local_solution(sub, config, solver, seed)
        ids = alive[sup_local]
        x = np.zeros(n)
        x[alive] = x_local
        coh_a = quadratic_value(a, x)
        coh_s = quadratic_value(s, x)
        if coh_a > bar and coh_s > bar:
            clusters.append(Cluster(support=ids, characteristic=x, cohesiveness=coh_a))
        else:
            outlier_sets.append(ids)
        alive = np.setdiff1d(alive, ids)
    return ScodResult(
        clusters=clusters, outlier_sets=outlier_sets, global_cohesiveness=gc
    )
