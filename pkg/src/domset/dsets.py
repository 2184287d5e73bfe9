"""Dominant sets: combinatorial weights, membership tests, and extraction.

For a vertex set S and vertex i in S, the weight w_S(i) measures how much
support i receives from S relative to the set's internal coherence:

    w_{i}(i) = 1
    w_S(i)  = sum_{j in S\\{i}} phi_{S\\{i}}(j, i) * w_{S\\{i}}(j)

with phi_T(j, i) = a_ji - awdeg_T(j) and awdeg_T(j) the mean affinity of j
into T. S is a dominant set when every member has strictly positive weight
and every outside vertex j has w_{S + j}(j) strictly negative. Dominant
sets are in one-to-one correspondence with strict local maximizers of x'Ax
on the simplex through x_i = w_S(i) / W(S).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Cluster, as_index_set, quadratic_value, support
from .dynamics import SolverConfig, perturbed_barycenter, solve_stable
from .exceptions import (
    AllZeroMatrixError,
    DimensionMismatchError,
    NotDominantError,
    TooLargeError,
    ZeroSizeError,
)

MAX_EXACT_SET = 20
MAX_BRUTE_FORCE = 15

_KKT_TOL = 1e-8


def weighted_degree(A, S, i) -> float:
    """Mean affinity from vertex i into the set S."""
    A = np.asarray(A, dtype=np.float64)
    idx = as_index_set(S, A.shape[0])
    return float(A[i, idx].mean())


def phi(A, S, i, j) -> float:
    """Relative affinity of j seen from i against i's average tie into S.

    Defined for i in S and j outside it.
    """
    A = np.asarray(A, dtype=np.float64)
    idx = as_index_set(S, A.shape[0])
    if i not in idx:
        raise DimensionMismatchError(f"vertex {i} is not in the set")
    if j in idx:
        raise DimensionMismatchError(f"vertex {j} must lie outside the set")
    return float(A[i, j]) - weighted_degree(A, idx, i)


class _WeightTable:
    """Memoized w_S(i) recursion over bitmask subsets of one fixed matrix."""

    def __init__(self, A):
        self.a = np.asarray(A, dtype=np.float64)
        self._w: dict[tuple[int, int], float] = {}
        self._rs: dict[tuple[int, int], float] = {}

    def rowsum(self, mask: int, j: int) -> float:
        if mask == 0:
            return 0.0
        key = (mask, j)
        val = self._rs.get(key)
        if val is None:
            low = mask & -mask
            k = low.bit_length() - 1
            val = self.rowsum(mask ^ low, j) + float(self.a[j, k])
            self._rs[key] = val
        return val

    def w(self, mask: int, i: int) -> float:
        key = (mask, i)
        val = self._w.get(key)
        if val is not None:
            return val
        rest = mask & ~(1 << i)
        if rest == 0:
            val = 1.0
        else:
            size = rest.bit_count()
            total = 0.0
            m = rest
            while m:
                low = m & -m
                j = low.bit_length() - 1
                m ^= low
                rel = float(self.a[j, i]) - self.rowsum(rest, j) / size
                total += rel * self.w(rest, j)
            val = total
        self._w[key] = val
        return val

    def total(self, mask: int) -> float:
        acc = 0.0
        m = mask
        while m:
            low = m & -m
            acc += self.w(mask, low.bit_length() - 1)
            m ^= low
        return acc


def _mask_of(idx: np.ndarray) -> int:
    mask = 0
    for i in idx:
        mask |= 1 << int(i)
    return mask


def _guard_size(k: int, bound: int, what: str):
    if k > bound:
        raise TooLargeError(f"{what} is exponential in the set size; limit is {bound}, got {k}")


def node_weight(A, S, i) -> float:
    """w_S(i), computed exactly (memoized recursion, |S| <= 20)."""
    A = np.asarray(A, dtype=np.float64)
    idx = as_index_set(S, A.shape[0])
    _guard_size(idx.size, MAX_EXACT_SET, "node_weight")
    if int(i) not in set(int(v) for v in idx):
        raise DimensionMismatchError(f"vertex {i} is not in the set")
    return _WeightTable(A).w(_mask_of(idx), int(i))


def total_weight(A, S) -> float:
    """W(S) = sum of w_S(i) over members."""
    A = np.asarray(A, dtype=np.float64)
    idx = as_index_set(S, A.shape[0])
    _guard_size(idx.size, MAX_EXACT_SET, "total_weight")
    if idx.size == 0:
        raise ZeroSizeError("total_weight needs a nonempty set")
    return _WeightTable(A).total(_mask_of(idx))


@dataclass(frozen=True)
class DominantSetReport:
    """Outcome of the two strict dominance conditions for one set.

    internal_weights aligns with the sorted member ids, external_weights
    with the sorted outside ids; dominant means all internal weights are
    positive and all external ones negative.
    """

    members: np.ndarray
    outsiders: np.ndarray
    internal_weights: np.ndarray
    external_weights: np.ndarray
    dominant: bool


def is_dominant_set(A, S) -> DominantSetReport:
    """Check both dominance conditions, reporting every weight involved."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    idx = as_index_set(S, n)
    if idx.size == 0:
        raise ZeroSizeError("the empty set cannot be dominant")
    _guard_size(idx.size, MAX_EXACT_SET, "is_dominant_set")
    table = _WeightTable(A)
    mask = _mask_of(idx)
    internal = np.array([table.w(mask, int(i)) for i in idx])
    outsiders = np.setdiff1d(np.arange(n, dtype=np.intp), idx)
    external = np.array([table.w(mask | (1 << int(j)), int(j)) for j in outsiders])
    ok = bool(np.all(internal > 0.0) and np.all(external < 0.0))
    return DominantSetReport(
        members=idx,
        outsiders=outsiders,
        internal_weights=internal,
        external_weights=external if outsiders.size else np.empty(0),
        dominant=ok,
    )


def characteristic_vector(A, S) -> np.ndarray:
    """The simplex vector x_i = w_S(i)/W(S) of a dominant set.

    Raises NotDominantError if S fails the dominance conditions, and
    verifies the result is a KKT point of max x'Ax (equal payoffs on the
    support, no larger payoff off it).
    """
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    report = is_dominant_set(A, S)
    if not report.dominant:
        raise NotDominantError(f"set {report.members.tolist()} is not a dominant set")
    x = np.zeros(n)
    x[report.members] = report.internal_weights / report.internal_weights.sum()
    g = A @ x
    lam = quadratic_value(A, x)
    tol = _KKT_TOL * max(1.0, float(np.max(np.abs(g))))
    if np.max(np.abs(g[report.members] - lam)) > tol:
        raise NotDominantError("characteristic vector failed the KKT equality check")
    if report.outsiders.size and np.max(g[report.outsiders]) > lam + tol:
        raise NotDominantError("characteristic vector failed the KKT inequality check")
    return x


def extract_dominant_set(
    A,
    config: SolverConfig | None = None,
    solver: str = "inimdyn",
    seed: int = 0,
) -> Cluster:
    """Extract one dominant set by running dynamics from a perturbed barycenter."""
    A = np.asarray(A, dtype=np.float64)
    if not np.any(A > 0):
        raise AllZeroMatrixError("cannot extract from an all-zero affinity")
    config = config or SolverConfig()
    res = solve_stable(A, perturbed_barycenter(A.shape[0], seed), config, solver, seed=seed)
    sup = support(res.x, config.zero_tol)
    return Cluster(support=sup, characteristic=res.x, cohesiveness=res.objective)


def peel_off_enumerate(
    A,
    min_cluster_size: int = 2,
    max_clusters: int | None = None,
    config: SolverConfig | None = None,
    solver: str = "inimdyn",
    seed: int = 0,
) -> list[Cluster]:
    """Enumerate clusters by repeated extraction and removal.

    Extracts a dominant set, removes its vertices, and repeats until fewer
    than min_cluster_size vertices remain, the remaining affinity is all
    zero, or max_clusters is reached. Supports smaller than
    min_cluster_size are dropped from the active set without being
    reported. Cluster fields are expressed in original vertex ids; the
    input matrix is never modified.
    """
    A = np.asarray(A, dtype=np.float64)
    config = config or SolverConfig()
    active = np.arange(A.shape[0], dtype=np.intp)
    clusters: list[Cluster] = []
    n = A.shape[0]
    while active.size >= max(min_cluster_size, 1):
        if max_clusters is not None and len(clusters) >= max_clusters:
            break
        sub = A[np.ix_(active, active)]
        if not np.any(sub > 0):
            break
        local = extract_dominant_set(sub, config, solver, seed)
        ids = active[local.support]
        if ids.size >= min_cluster_size:
            full = np.zeros(n)
            full[active] = local.characteristic
            clusters.append(Cluster(support=np.sort(ids), characteristic=full, cohesiveness=local.cohesiveness))
        active = np.setdiff1d(active, ids)
    return clusters


def brute_force_dominant_sets(A) -> list[np.ndarray]:
    """All dominant sets by exhaustive subset enumeration (n <= 15)."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    if n > MAX_BRUTE_FORCE:
        raise TooLargeError(f"exhaustive enumeration is limited to n <= {MAX_BRUTE_FORCE}, got {n}")
    table = _WeightTable(A)
    found: list[np.ndarray] = []
    for mask in range(1, 1 << n):
        ok = True
        m = mask
        while m:
            low = m & -m
            m ^= low
            if table.w(mask, low.bit_length() - 1) <= 0.0:
                ok = False
                break
        if not ok:
            continue
        for j in range(n):
            if mask & (1 << j):
                continue
            if table.w(mask | (1 << j), j) >= 0.0:
                ok = False
                break
        if ok:
            found.append(np.array([i for i in range(n) if mask & (1 << i)], dtype=np.intp))
    return found
