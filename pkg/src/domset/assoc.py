"""Association-layer algorithms on top of the constrained solver.

Covers the query-side selection rules (dynamic nearest-neighbor prefix,
uninformative-query pruning), multi-group track association by running the
constrained enumeration once per group, the two duplicate-resolution
constraints applied afterwards, inverse-area feature-weight fusion, and
boolean gating of cross-group blocks with path closure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cdsc import enumerate_all_constrained
from .dynamics import SolverConfig
from .exceptions import (
    DimensionMismatchError,
    EmptyGroupError,
    EmptyListError,
    LengthMismatchError,
    TooFewNeighborsError,
    ValidationError,
    ZeroAreaError,
)

# Default thresholds for the neighbor-ratio rules; both compare consecutive
# or end-to-end distance ratios against the same empirical 0.7.
DEFAULT_THETA = 0.7
DEFAULT_BETA = 0.7


@dataclass(frozen=True)
class RankedNeighborList:
    """A query's neighbors sorted by ascending distance."""

    query_id: int
    ids: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.intp).ravel()
        dist = np.asarray(self.distances, dtype=np.float64).ravel()
        if ids.size == 0:
            raise EmptyListError("ranked neighbor list is empty")
        if ids.size != dist.size:
            raise DimensionMismatchError(
                f"{ids.size} ids but {dist.size} distances"
            )
        if np.any(np.diff(dist) < 0.0):
            raise ValidationError("distances must be non-decreasing")
        if dist[0] < 0.0:
            raise ValidationError("distances must be nonnegative")
        ids.flags.writeable = False
        dist.flags.writeable = False
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "distances", dist)

    @property
    def size(self) -> int:
        return int(self.ids.size)


def dynamic_nn_select(nns: RankedNeighborList, theta: float = DEFAULT_THETA) -> np.ndarray:
    """Adaptive-length neighbor selection: extend while ratios stay close.

    Starts with the nearest neighbor and keeps admitting the next one while
    the ratio of consecutive distances exceeds theta (near-ties carry no
    rank information, so the tie group travels together); the first
    distinctive gap ends the scan. The result is always a prefix of the
    ranked list.
    """

    d = nns.distances
    if d.size > 1 and np.any(d[1:] <= 0.0):
        raise ValidationError("distances beyond the first must be positive")
    take = 1
    while take < d.size and d[take - 1] / d[take] > theta:
        take += 1
    return nns.ids[:take].copy()


def prune_query(nns: RankedNeighborList, beta: float = DEFAULT_BETA) -> bool:
    """True when the query is worth keeping, False when it is uninformative.

    A list whose first and last distances are nearly equal ranks nothing;
    such queries are dropped. An all-zero list is maximally ambiguous and
    is dropped too.
    """

    if nns.size < 2:
        raise TooFewNeighborsError("pruning needs at least two neighbors")
    first = float(nns.distances[0])
    last = float(nns.distances[-1])
    if last <= 0.0:
        return False
    return first / last <= beta


class GroupedAffinity:
    """An affinity over all entities plus a partition into groups.

    Groups model cameras or sources: each must be nonempty, together they
    cover every vertex, and no vertex belongs to two of them.
    """

    def __init__(self, a, groups):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("affinity matrix must be square")
        if not np.allclose(a, a.T, atol=1e-10):
            raise ValidationError("affinity matrix must be symmetric")
        n = a.shape[0]
        parsed = []
        seen = np.zeros(n, dtype=bool)
        for g, members in enumerate(groups):
            ids = np.asarray(members, dtype=np.intp).ravel()
            if ids.size == 0:
                raise EmptyGroupError(f"group {g} is empty")
            if np.any(ids < 0) or np.any(ids >= n):
                raise ValidationError(f"group {g} has out-of-range vertices")
            if np.any(seen[ids]):
                raise ValidationError(f"group {g} overlaps an earlier group")
            seen[ids] = True
            parsed.append(np.sort(ids))
        if not np.all(seen):
            missing = np.flatnonzero(~seen)
            raise ValidationError(f"vertices {missing.tolist()} belong to no group")
        self.a = a
        self.a.flags.writeable = False
        self.groups = parsed
        self._group_of = np.empty(n, dtype=np.intp)
        for g, ids in enumerate(parsed):
            self._group_of[ids] = g

    @property
    def n(self) -> int:
        return int(self.a.shape[0])

    @property
    def group_count(self) -> int:
        return len(self.groups)

    def group_of(self, ids) -> np.ndarray:
        return self._group_of[np.asarray(ids, dtype=np.intp)]

    def block(self, i: int, j: int) -> np.ndarray:
        """The A^{i x j} cross-group view (copy)."""
        return self.a[np.ix_(self.groups[i], self.groups[j])]


@dataclass(frozen=True)
class AssociationSet:
    """One association cluster tagged with the constraint group it answers.

    members are sorted vertex ids; memberships is the converged full-length
    weight vector (zero off the set), consulted by the refinement rules.
    """

    group: int
    members: np.ndarray
    memberships: np.ndarray

    def __post_init__(self):
        members = np.asarray(self.members, dtype=np.intp).ravel()
        memberships = np.asarray(self.memberships, dtype=np.float64).ravel()
        members.flags.writeable = False
        memberships.flags.writeable = False
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "memberships", memberships)

    @property
    def size(self) -> int:
        return int(self.members.size)

    def score_of(self, entity: int) -> float:
        return float(self.memberships[int(entity)])

    def without(self, entity: int) -> "AssociationSet":
        keep = self.members[self.members != int(entity)]
        memberships = self.memberships.copy()
        memberships[int(entity)] = 0.0
        return AssociationSet(self.group, keep, memberships)


@dataclass(frozen=True)
class AssociationResult:
    """All association sets, the entity-to-group map, and the group count."""

    sets: tuple
    group_of: np.ndarray
    group_count: int

    def __post_init__(self):
        group_of = np.asarray(self.group_of, dtype=np.intp).ravel()
        group_of.flags.writeable = False
        object.__setattr__(self, "group_of", group_of)
        object.__setattr__(self, "sets", tuple(self.sets))

    @property
    def n(self) -> int:
        return int(self.group_of.size)

    def sets_of_group(self, p: int) -> list[AssociationSet]:
        return [s for s in self.sets if s.group == p]

    def containing(self, entity: int) -> list[int]:
        """Indices (into sets) of every set holding the entity."""
        entity = int(entity)
        return [k for k, s in enumerate(self.sets) if entity in s.members]


def track_association(
    ga: GroupedAffinity,
    config: SolverConfig | None = None,
    solver: str = "inimdyn",
    seed: int = 0,
    bound_mode: str = "max_degree",
) -> AssociationResult:
    """Associate entities across groups via per-group constrained sweeps.

    Each group in turn becomes the constraint pool: the constrained
    enumeration covers it while freely recruiting members from other
    groups, so within-group and cross-group association happen in the same
    solve. The input affinity is never modified. Run the refinement pair
    afterwards if single-membership guarantees are needed.
    """

    sets: list[AssociationSet] = []
    for p, pool in enumerate(ga.groups):
        clusters = enumerate_all_constrained(
            ga.a,
            config=config,
            solver=solver,
            seed=seed,
            bound_mode=bound_mode,
            within=pool,
        )
        for cluster in clusters:
            memberships = np.where(
                np.isin(np.arange(ga.n), cluster.support),
                cluster.memberships,
                0.0,
            )
            sets.append(
                AssociationSet(
                    group=p,
                    members=np.sort(cluster.support),
                    memberships=memberships,
                )
            )
    return AssociationResult(
        sets=tuple(sets),
        group_of=ga.group_of(np.arange(ga.n)),
        group_count=ga.group_count,
    )


def refine_constraint1(result: AssociationResult) -> AssociationResult:
    """Resolve duplicates within each constraint group's collection.

    An entity found by the same group's sweep more than once stays only in
    the set maximizing set size times its membership score; ties go to the
    earliest set. All verdicts are computed against the incoming sets and
    applied together, so the outcome does not depend on entity order.
    """

    removals: list[set[int]] = [set() for _ in result.sets]
    for p in range(result.group_count):
        indices = [k for k, s in enumerate(result.sets) if s.group == p]
        holders: dict[int, list[int]] = {}
        for k in indices:
            for entity in result.sets[k].members:
                holders.setdefault(int(entity), []).append(k)
        for entity, where in holders.items():
            if len(where) <= 1:
                continue
            products = [result.sets[k].size * result.sets[k].score_of(entity) for k in where]
            winner = where[int(np.argmax(products))]
            for k in where:
                if k != winner:
                    removals[k].add(entity)
    return _apply_removals(result, removals)


def refine_constraint2(
    result: AssociationResult, group_count: int | None = None
) -> AssociationResult:
    """Cap every entity's total membership at the number of groups.

    An entity over budget keeps its home set (the one produced by its own
    group, earliest first) plus the best remaining sets ranked by how many
    other members they share with home; sets sharing nothing are never
    kept. Verdicts are computed against the incoming sets and applied
    together.
    """

    cap = result.group_count if group_count is None else int(group_count)
    removals: list[set[int]] = [set() for _ in result.sets]
    holders: dict[int, list[int]] = {}
    for k, s in enumerate(result.sets):
        for entity in s.members:
            holders.setdefault(int(entity), []).append(k)
    for entity, where in sorted(holders.items()):
        if len(where) <= cap:
            continue
        own_group = int(result.group_of[entity])
        home = next(
            (k for k in where if result.sets[k].group == own_group), where[0]
        )
        home_others = set(result.sets[home].members.tolist()) - {entity}
        scored = []
        for k in where:
            if k == home:
                continue
            others = set(result.sets[k].members.tolist()) - {entity}
            scored.append((-len(others & home_others), k))
        scored.sort()
        keep = {home}
        for neg_overlap, k in scored[: max(cap - 1, 0)]:
            if neg_overlap < 0:
                keep.add(k)
        for k in where:
            if k not in keep:
                removals[k].add(entity)
    return _apply_removals(result, removals)


def _apply_removals(
    result: AssociationResult, removals: list[set[int]]
) -> AssociationResult:
    new_sets = []
    for s, gone in zip(result.sets, removals):
        for entity in sorted(gone):
            s = s.without(entity)
        new_sets.append(s)
    return AssociationResult(
        sets=tuple(new_sets),
        group_of=result.group_of,
        group_count=result.group_count,
    )


def feature_weights(score_curves) -> np.ndarray:
    """Fuse features by inverse area under their normalized score curves.

    A flat low curve means scores drop off a cliff, the mark of a
    discriminative feature, so weights are proportional to 1/area and sum
    to one. Zero-area curves are infinitely discriminative by that reading
    and take all the mass, split equally among themselves.
    """

    curves = [np.asarray(c, dtype=np.float64).ravel() for c in score_curves]
    if not curves:
        raise ZeroAreaError("no curves to weigh")
    length = curves[0].size
    if length < 2:
        raise ValidationError("curves need at least two samples")
    for c in curves[1:]:
        if c.size != length:
            raise LengthMismatchError(
                f"curves of length {c.size} and {length} in one fusion"
            )
    for c in curves:
        if c.min(initial=0.0) < 0.0 or c.max(initial=0.0) > 1.0:
            raise ValidationError("curves must be min-max normalized to [0, 1]")
    areas = np.array([np.trapezoid(c) for c in curves])
    zero = areas <= 0.0
    weights = np.zeros(len(curves))
    if np.any(zero):
        weights[zero] = 1.0 / zero.sum()
        return weights
    inv = 1.0 / areas
    return inv / inv.sum()


def transitive_closure(allowed) -> np.ndarray:
    """Boolean closure of a group-level permission matrix.

    Permissions are undirected (the affinity is symmetric) and every group
    may always see itself, so the input is symmetrized and made reflexive
    first; then any chain of allowed hops connects its endpoints.
    """

    m = np.asarray(allowed, dtype=bool)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("permission mask must be square")
    closed = m | m.T
    np.fill_diagonal(closed, True)
    for k in range(closed.shape[0]):
        closed = closed | (closed[:, k : k + 1] & closed[k : k + 1, :])
    return closed


def gate_grouped_affinity(ga: GroupedAffinity, allowed, close_paths: bool = True) -> np.ndarray:
    """Copy of the affinity with disallowed cross-group blocks zeroed.

    allowed is a group-count square boolean mask; with close_paths (the
    default) its transitive closure is used, so two groups connected
    through an intermediary stay visible to each other.
    """

    m = np.asarray(allowed, dtype=bool)
    if m.shape != (ga.group_count, ga.group_count):
        raise DimensionMismatchError(
            f"mask is {m.shape}, expected {(ga.group_count, ga.group_count)}"
        )
    if close_paths:
        m = transitive_closure(m)
    else:
        m = m | m.T
        np.fill_diagonal(m, True)
    out = ga.a.copy()
    for i in range(ga.group_count):
        for j in range(ga.group_count):
            if not m[i, j]:
                out[np.ix_(ga.groups[i], ga.groups[j])] = 0.0
    return out
