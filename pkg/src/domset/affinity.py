"""Affinity construction toolbox.

Everything here turns raw measurements into the symmetric zero-diagonal
matrices the solvers consume: covariance descriptors compared by the
log-generalized-eigenvalue metric, kernel-trick similarities, joint
appearance/location distances, linear-term homogenization, the three
tracklet-merging affinities, prior-link pinning, and co-association
consensus over an ensemble of clusterings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .core import Cluster
from .dsets import peel_off_enumerate
from .dynamics import SolverConfig, perturbed_barycenter, solve_stable
from .exceptions import (
    DegenerateSigmaError,
    DimensionMismatchError,
    EmptyTrackletError,
    LengthMismatchError,
    NegativeWeightError,
    NonNormalizedKernelError,
    OverlappingPriorsError,
    SingularAfterRegularizationError,
    TooFewSamplesError,
    ValidationError,
    ZeroSizeError,
)

# Relative scale of the identity nudge applied to a covariance matrix that
# fails its Cholesky test before the generalized eigensolve.
REGULARIZER_SCALE = 1e-6

# Default bandwidth for exp(-D / 2 gamma^2) edge weights built from global
# feature distances; callers working at other scales pass their own.
DEFAULT_GAMMA = 2.0**7

# Default appearance/location mixing weights for joint_distance.
DEFAULT_KAPPA = 1.0
DEFAULT_IOTA = 1.25


@dataclass(frozen=True)
class CovarianceDescriptor:
    """A d x d feature covariance with its dimension.

    Symmetric and numerically positive semi-definite; rank deficiency is
    fine (covariance_distance regularizes before inverting).
    """

    c: np.ndarray
    d: int

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValidationError("covariance matrix must be square")
        if c.shape[0] != self.d:
            raise DimensionMismatchError(
                f"matrix is {c.shape[0]}x{c.shape[0]} but d={self.d}"
            )
        scale = max(1.0, float(np.abs(c).max(initial=0.0)))
        if not np.allclose(c, c.T, atol=1e-8 * scale):
            raise ValidationError("covariance matrix must be symmetric")
        c = (c + c.T) / 2.0
        if np.linalg.eigvalsh(c).min(initial=0.0) < -1e-10 * scale:
            raise ValidationError("covariance matrix has a negative eigenvalue")
        c.flags.writeable = False
        object.__setattr__(self, "c", c)


def covariance_descriptor(features) -> CovarianceDescriptor:
    """Sample covariance (1/(M-1) normalizer) of an M x d feature matrix."""
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2:
        raise ValidationError("features must be a 2-d array")
    m, d = f.shape
    if m < 2:
        raise TooFewSamplesError(f"need at least 2 samples, got {m}")
    centered = f - f.mean(axis=0)
    c = centered.T @ centered / (m - 1)
    return CovarianceDescriptor((c + c.T) / 2.0, d)


def _cov_matrix(obj) -> np.ndarray:
    if isinstance(obj, CovarianceDescriptor):
        return np.asarray(obj.c, dtype=np.float64)
    c = np.asarray(obj, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValidationError("covariance matrix must be square")
    return c


def _ensure_spd(c: np.ndarray, what: str) -> np.ndarray:
    """Return a strictly positive definite version of c.

    Leaves a matrix that already passes Cholesky untouched, so clean inputs
    keep their exact eigenstructure (the affine-invariance property of the
    metric depends on that). A failing matrix gets the epsilon-identity
    nudge sized by its mean eigenvalue; if that still cannot be factored
    the matrix is hopeless.
    """

    c = (c + c.T) / 2.0
    try:
        np.linalg.cholesky(c)
        return c
    except np.linalg.LinAlgError:
        pass
    eps = REGULARIZER_SCALE * float(np.trace(c)) / c.shape[0]
    if eps > 0.0:
        nudged = c + eps * np.eye(c.shape[0])
        try:
            np.linalg.cholesky(nudged)
            return nudged
        except np.linalg.LinAlgError:
            pass
    raise SingularAfterRegularizationError(
        f"{what} is singular even after the epsilon-identity nudge"
    )


def covariance_distance(c1, c2) -> float:
    """Distance between covariances: sqrt of summed squared log generalized
    eigenvalues.

    Zero for identical inputs, symmetric in its arguments, and invariant
    under a common congruence M' C M for any invertible M. Inputs that are
    not strictly positive definite are nudged by epsilon I (epsilon scaled
    to the mean eigenvalue) before the eigensolve; a matrix that stays
    singular raises SingularAfterRegularization.
    """

    a = _cov_matrix(c1)
    b = _cov_matrix(c2)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} differ")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)), float(np.abs(b).max(initial=0.0)))
    if not np.allclose(a, a.T, atol=1e-8 * scale) or not np.allclose(
        b, b.T, atol=1e-8 * scale
    ):
        raise ValidationError("covariance matrices must be symmetric")
    a = _ensure_spd(a, "first covariance")
    b = _ensure_spd(b, "second covariance")
    lam = eigh(a, b, eigvals_only=True)
    if lam.min(initial=np.inf) <= 0.0:
        raise SingularAfterRegularizationError(
            "generalized eigenvalues are not all positive"
        )
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))


def joint_distance(
    desc_dist: float,
    loc_dist: float,
    kappa: float = DEFAULT_KAPPA,
    iota: float = DEFAULT_IOTA,
) -> float:
    """Blend appearance and location distances: sqrt(kappa d^2 + iota l^2)."""
    if desc_dist < 0.0 or loc_dist < 0.0:
        raise ValidationError("distances must be nonnegative")
    if kappa < 0.0 or iota < 0.0:
        raise ValidationError("mixing weights must be nonnegative")
    return float(np.sqrt(kappa * desc_dist**2 + iota * loc_dist**2))


def similarity(dist: float, gamma: float = DEFAULT_GAMMA) -> float:
    """Distance to edge weight: exp(-dist / (2 gamma^2))."""
    if dist < 0.0:
        raise ValidationError("distance must be nonnegative")
    if gamma <= 0.0:
        raise ValidationError("gamma must be positive")
    return float(np.exp(-dist / (2.0 * gamma * gamma)))


def laplacian_kernel(points, gamma: float | None = None) -> np.ndarray:
    """Normalized Laplacian kernel exp(-gamma * L1 distance) on row vectors.

    gamma defaults to the inverse of the median pairwise distance, the
    scale-free choice; identical points leave no scale to work with.
    """

    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValidationError("need a 2-d array with at least two points")
    d1 = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
    if gamma is None:
        n = d1.shape[0]
        med = float(np.median(d1[~np.eye(n, dtype=bool)]))
        if med <= 0.0:
            raise DegenerateSigmaError("median pairwise distance is zero")
        gamma = 1.0 / med
    elif gamma <= 0.0:
        raise ValidationError("gamma must be positive")
    return np.exp(-gamma * d1)


def kernel_trick_affinity(kernel) -> np.ndarray:
    """Affinity from a normalized kernel: 1 - sqrt((K_ii + K_jj - 2K_ij)/2).

    The square root is the kernel-induced distance, rescaled so identical
    items map to affinity 1 and orthogonal ones to 0; values past the
    nominal kernel range are clamped into [0, 1]. Requires unit diagonal.
    """

    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValidationError("kernel matrix must be square")
    if not np.allclose(k, k.T, atol=1e-10):
        raise ValidationError("kernel matrix must be symmetric")
    if not np.allclose(np.diag(k), 1.0, atol=1e-12):
        raise NonNormalizedKernelError("kernel diagonal must be all ones")
    diag = np.diag(k)
    sq = (diag[:, None] + diag[None, :] - 2.0 * k) / 2.0
    a = 1.0 - np.sqrt(np.clip(sq, 0.0, None))
    a = np.clip(a, 0.0, 1.0)
    a = (a + a.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return a


def homogenize(a, b) -> np.ndarray:
    """Fold a linear payoff into the matrix: B_ij = a_ij + b_i + b_j.

    On the simplex, x'Bx = x'Ax + 2 b'x, so maximizing the homogenized
    quadratic solves the affine program with the same machinery. The
    result is symmetric with diagonal 2 b_i.
    """

    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("affinity matrix must be square")
    if b.size != a.shape[0]:
        raise DimensionMismatchError(
            f"matrix is {a.shape[0]}x{a.shape[0]} but scores have length {b.size}"
        )
    if np.any(b < 0.0):
        raise NegativeWeightError("node scores must be nonnegative")
    return a + b[None, :] + b[:, None]


def _tracklet_matrices(tracklet, what: str) -> list[np.ndarray]:
    mats = [_cov_matrix(c) for c in tracklet]
    if not mats:
        raise EmptyTrackletError(f"{what} tracklet is empty")
    return mats


def _distance_table(t_i, t_j) -> np.ndarray:
    a = _tracklet_matrices(t_i, "first")
    b = _tracklet_matrices(t_j, "second")
    table = np.empty((len(a), len(b)))
    for i, ci in enumerate(a):
        for j, cj in enumerate(b):
            table[i, j] = covariance_distance(ci, cj)
    return table


def tracklet_affinity_mean(t_i, t_j) -> float:
    """exp(-mean over both tracklets of pairwise descriptor distances)."""
    return float(np.exp(-_distance_table(t_i, t_j).mean()))


def tracklet_affinity_min(t_i, t_j) -> float:
    """exp(-min over the first tracklet of its mean distance to the second).

    Note the asymmetry: the minimum scans elements of t_i only, each scored
    by its mean distance to all of t_j. One well-matched element of t_i is
    enough for a high affinity.
    """

    table = _distance_table(t_i, t_j)
    return float(np.exp(-table.mean(axis=1).min()))


def _representative(mats: list[np.ndarray], config: SolverConfig, solver: str, seed: int) -> int:
    """Index of the element with the largest converged membership weight.

    Runs the dynamics on the tracklet's internal affinity (pairwise
    exp(-distance)) and takes the argmax of the strict local solution,
    the weight-share reading of centrality. An internal affinity with no
    positive entry carries no preference; the first element stands in.
    """

    n = len(mats)
    if n == 1:
        return 0
    aff = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            aff[i, j] = aff[j, i] = np.exp(-covariance_distance(mats[i], mats[j]))
    if not np.any(aff > 0.0):
        return 0
    res = solve_stable(aff, perturbed_barycenter(n, seed), config, solver, seed=seed)
    return int(np.argmax(res.x))


def tracklet_affinity_representative(
    t_i,
    t_j,
    config: SolverConfig | None = None,
    solver: str = "inimdyn",
    seed: int = 0,
) -> float:
    """exp(-distance) between the two tracklets' representative elements."""
    a = _tracklet_matrices(t_i, "first")
    b = _tracklet_matrices(t_j, "second")
    config = config or SolverConfig()
    ri = _representative(a, config, solver, seed)
    rj = _representative(b, config, solver, seed)
    return float(np.exp(-covariance_distance(a[ri], b[rj])))


def update_with_priors(a, prior_clusters, forbidden_pairs=frozenset()) -> np.ndarray:
    """Copy of the affinity with prior co-memberships pinned to 1 and
    forbidden pairs to 0.

    Pinned ones may well exceed every data-driven weight around them; that
    is the point, earlier decisions should dominate the next round. A pair
    that is both co-clustered and forbidden is contradictory input.
    """

    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("affinity matrix must be square")
    n = a.shape[0]
    out = a.copy()

    seen: set[int] = set()
    pinned: set[tuple[int, int]] = set()
    for cluster in prior_clusters:
        ids = [int(i) for i in np.asarray(cluster, dtype=np.intp).ravel()]
        for i in ids:
            if not 0 <= i < n:
                raise ValidationError(f"prior vertex {i} out of range")
            if i in seen:
                raise OverlappingPriorsError(f"vertex {i} appears in two prior clusters")
            seen.add(i)
        for pos, i in enumerate(ids):
            for j in ids[pos + 1 :]:
                pinned.add((min(i, j), max(i, j)))

    forbidden: set[tuple[int, int]] = set()
    for pair in forbidden_pairs:
        i, j = (int(pair[0]), int(pair[1]))
        if not (0 <= i < n and 0 <= j < n):
            raise ValidationError(f"forbidden pair {(i, j)} out of range")
        if i == j:
            raise ValidationError(f"forbidden pair {(i, j)} is a self-loop")
        forbidden.add((min(i, j), max(i, j)))

    clash = pinned & forbidden
    if clash:
        raise OverlappingPriorsError(
            f"pairs {sorted(clash)} are both co-clustered and forbidden"
        )
    for i, j in pinned:
        out[i, j] = out[j, i] = 1.0
    for i, j in forbidden:
        out[i, j] = out[j, i] = 0.0
    return out


@dataclass(frozen=True)
class CoassociationMatrix:
    """Fraction of ensemble runs that co-clustered each pair; zero diagonal."""

    matrix: np.ndarray
    ensemble_size: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("co-association matrix must be square")
        if self.ensemble_size < 1:
            raise ZeroSizeError("ensemble must contain at least one clustering")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


def coassociation(clusterings) -> CoassociationMatrix:
    """Evidence accumulation over an ensemble of label vectors.

    Entry (i, j) is the fraction of clusterings that put i and j in the
    same cluster; labels only need to be consistent within one vector, so
    ints, strings, and mixtures across vectors all work.
    """

    runs = list(clusterings)
    if not runs:
        raise ZeroSizeError("ensemble must contain at least one clustering")
    first = np.asarray(runs[0]).ravel()
    n = first.size
    counts = np.zeros((n, n))
    for labels in runs:
        arr = np.asarray(labels).ravel()
        if arr.size != n:
            raise LengthMismatchError(
                f"label vectors of length {arr.size} and {n} in one ensemble"
            )
        _, codes = np.unique(arr, return_inverse=True)
        counts += codes[:, None] == codes[None, :]
    phi = counts / len(runs)
    np.fill_diagonal(phi, 0.0)
    return CoassociationMatrix(phi, len(runs))


def consensus(
    coassoc,
    min_cluster_size: int = 2,
    config: SolverConfig | None = None,
    solver: str = "inimdyn",
    seed: int = 0,
) -> list[Cluster]:
    """Consensus clusters: peel-off enumeration on the co-association matrix."""
    matrix = coassoc.matrix if isinstance(coassoc, CoassociationMatrix) else coassoc
    return peel_off_enumerate(
        matrix,
        min_cluster_size=min_cluster_size,
        config=config,
        solver=solver,
        seed=seed,
    )
