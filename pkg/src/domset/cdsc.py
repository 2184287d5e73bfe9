"""Constrained dominant sets: query-seeded clusters via a penalized program.

The constrained program maximizes x'(A - alpha*P)x over the simplex, where P
is the diagonal indicator of the vertices outside the constraint set Q. For
alpha above the largest eigenvalue of the principal submatrix on V minus Q,
every local maximizer has support meeting Q, which turns dominant-set
extraction into a query tool. A localized variant grows a small working
subgraph around the query instead of running dynamics on the whole matrix.
"""

from __future__ import annotations

import numpy as np

from .core import as_index_set, quadratic_value, support
from .dynamics import SolverConfig, run_dynamics, solve_stable
from .exceptions import (
    ConstraintUnsatisfiedError,
    UnassignedVertexError,
    ValidationError,
    ZeroSizeError,
)

# Margin over the certified lower bound when alpha is chosen automatically.
ALPHA_MARGIN = 1.01

# Fallback alpha when the bound degenerates to zero (empty or edgeless
# complement); the penalty then multiplies a zero or irrelevant matrix and
# any positive value keeps the program well formed.
ALPHA_FLOOR = 1.0

# Relative mass placed outside the query face when starting the full solver,
# so the dynamics can see off-face payoffs at all.
OFF_FACE_MASS = 1e-4

# A dominant-distribution violation below this is numerical noise, not a
# direction worth growing the working set for.
_VIOLATION_TOL = 1e-12


def alpha_lower_bound(A, Q, mode: str = "eigen") -> float:
    """Penalty threshold for the constraint set Q.

    eigen mode returns the largest eigenvalue of the principal submatrix on
    V minus Q; max_degree returns that submatrix's largest row sum, a
    certified upper bound on the eigenvalue that needs no eigensolve.
    Returns 0.0 when Q covers every vertex.
    """
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    q = as_index_set(Q, n)
    rest = np.setdiff1d(np.arange(n), q)
    if rest.size == 0:
        return 0.0
    sub = A[np.ix_(rest, rest)]
    if mode == "eigen":
        return float(np.linalg.eigvalsh(sub)[-1])
    if mode == "max_degree":
        return float(sub.sum(axis=1).max())
    raise ValueError(f"unknown bound mode {mode!r}")


class ConstrainedProgram:
    """The penalized quadratic program for one affinity and constraint set.

    Holds the affinity A, the constraint ids Q, and the penalty alpha.
    When alpha is omitted it defaults to ALPHA_MARGIN times the max_degree
    bound (or ALPHA_FLOOR if that bound is zero), which certifies the
    support guarantee without an eigensolve.
    """

    def __init__(self, A, Q, alpha: float | None = None, bound_mode: str = "max_degree"):
        self.a = np.asarray(A, dtype=np.float64)
        if self.a.ndim != 2 or self.a.shape[0] != self.a.shape[1]:
            raise ValidationError("affinity must be a square matrix")
        if self.a.shape[0] == 0:
            raise ZeroSizeError("affinity must be nonempty")
        n = self.a.shape[0]
        self.q = as_index_set(Q, n)
        self.bound = alpha_lower_bound(self.a, self.q, mode=bound_mode)
        if alpha is None:
            alpha = ALPHA_MARGIN * self.bound if self.bound > 0.0 else ALPHA_FLOOR
        alpha = float(alpha)
        if not alpha > 0.0:
            raise ValidationError(f"alpha must be positive, got {alpha:g}")
        self.alpha = alpha
        self.penalized = np.ones(n, dtype=bool)
        self.penalized[self.q] = False
        self._payoff: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def meets_bound(self) -> bool:
        """Whether alpha certifies the support guarantee."""
        return self.alpha > self.bound

    def payoff(self) -> np.ndarray:
        """A - alpha * diag(indicator of V minus Q), cached."""
        if self._payoff is None:
            b = self.a.copy()
            idx = np.flatnonzero(self.penalized)
            b[idx, idx] -= self.alpha
            b.flags.writeable = False
            self._payoff = b
        return self._payoff

    def objective(self, x) -> float:
        return quadratic_value(self.payoff(), np.asarray(x, dtype=np.float64))


class ConstrainedCluster:
    """A converged constrained solution.

    support: sorted vertex ids with positive membership; memberships: the
    full-length converged simplex vector; satisfied_constraints: support
    intersected with Q; objective: the penalized quadratic value.
    """

    def __init__(self, support, memberships, satisfied_constraints, objective):
        self.support = np.asarray(support, dtype=np.intp)
        self.memberships = np.asarray(memberships, dtype=np.float64)
        self.satisfied_constraints = np.asarray(satisfied_constraints, dtype=np.intp)
        self.objective = float(objective)

    @property
    def size(self) -> int:
        return int(self.support.size)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"ConstrainedCluster(support={self.support.tolist()}, "
            f"objective={self.objective:.6g})"
        )


def _face_start(n: int, q: np.ndarray, off_mass: float) -> np.ndarray:
    """Uniform mass on the query face, a whiff of mass elsewhere."""
    x = np.zeros(n)
    x[q] = 1.0 / q.size
    rest = n - q.size
    if rest and off_mass > 0.0:
        x[np.setdiff1d(np.arange(n), q)] = off_mass / rest
        x /= x.sum()
    return x


def _finish(prog: ConstrainedProgram, x, objective: float, zero_tol: float) -> ConstrainedCluster:
    sup = support(x, zero_tol)
    satisfied = np.intersect1d(sup, prog.q)
    if satisfied.size == 0:
        raise ConstraintUnsatisfiedError(
            f"support misses the constraint set (alpha={prog.alpha:g}, "
            f"bound={prog.bound:g}); raise alpha",
            alpha=prog.alpha,
        )
    return ConstrainedCluster(
        support=sup,
        memberships=x,
        satisfied_constraints=satisfied,
        objective=objective,
    )


def solve_cdsc(
    prog: ConstrainedProgram,
    solver: str = "inimdyn",
    config: SolverConfig | None = None,
    seed: int = 0,
) -> ConstrainedCluster:
    """Maximize the penalized program from the query face of the simplex.

    Starts from uniform mass over Q plus a small uniform leak outside it
    (dynamics started exactly on the face could never leave it). Raises
    ConstraintUnsatisfied, reporting the alpha used, if the converged
    support misses Q, the telltale of an alpha below the true bound.
    """
    config = config or SolverConfig()
    x0 = _face_start(prog.n, prog.q, OFF_FACE_MASS)
    res = solve_stable(prog.payoff(), x0, config, solver, seed=seed)
    return _finish(prog, res.x, res.objective, config.zero_tol)


def enumerate_all_constrained(
    A,
    config: SolverConfig | None = None,
    solver: str = "inimdyn",
    seed: int = 0,
    bound_mode: str = "max_degree",
    within=None,
) -> list[ConstrainedCluster]:
    """Cover the constraint pool with constrained clusters, never removing
    nodes.

    The constraint set starts at the pool (all of V when ``within`` is
    omitted) and shrinks by each cluster's support; because every solution
    must intersect the current constraint set, the loop terminates after
    at most pool-size rounds. The graph itself is left intact, so clusters
    may overlap earlier ones and may recruit vertices outside the pool.
    """
    A = np.asarray(A, dtype=np.float64)
    config = config or SolverConfig()
    n = A.shape[0]
    if within is None:
        remaining = np.arange(n)
    else:
        remaining = as_index_set(within, n)
        if remaining.size == 0:
            raise ZeroSizeError("constraint pool is empty")
    clusters: list[ConstrainedCluster] = []
    while remaining.size:
        prog = ConstrainedProgram(A, remaining, bound_mode=bound_mode)
        cluster = solve_cdsc(prog, solver=solver, config=config, seed=seed)
        clusters.append(cluster)
        remaining = np.setdiff1d(remaining, cluster.support)
    return clusters


def resolve_overlaps(clusters: list[ConstrainedCluster]) -> np.ndarray:
    """Assign each vertex to one cluster by cardinality-weighted membership.

    A vertex claimed by several clusters goes to the one maximizing
    |cluster| * membership; exact ties go to the lowest cluster index.
    Returns an integer array of cluster indices over all vertices.
    """
    if not clusters:
        raise ZeroSizeError("no clusters to assign from")
    n = clusters[0].memberships.size
    best = np.full(n, -np.inf)
    assignment = np.full(n, -1, dtype=np.intp)
    for cid, cluster in enumerate(clusters):
        score = np.full(n, -np.inf)
        score[cluster.support] = cluster.size * cluster.memberships[cluster.support]
        wins = score > best
        best = np.where(wins, score, best)
        assignment = np.where(wins, cid, assignment)
    missing = np.flatnonzero(assignment < 0)
    if missing.size:
        raise UnassignedVertexError(
            f"vertices {missing.tolist()} belong to no cluster"
        )
    return assignment


def kkt_check(prog: ConstrainedProgram, x, tol: float = 1e-8) -> bool:
    """First-order stationarity of x for the penalized program.

    Payoffs must equal the quadratic value on the (strictly positive)
    support and not exceed it elsewhere, both within tol.
    """
    x = np.asarray(x, dtype=np.float64)
    b = prog.payoff()
    g = b @ x
    half_lambda = float(x @ g)
    on = x > 0.0
    if on.any() and float(np.max(np.abs(g[on] - half_lambda))) > tol:
        return False
    off = ~on
    if off.any() and float(np.max(g[off] - half_lambda)) > tol:
        return False
    return True


def _improvement_margins(prog: ConstrainedProgram, x) -> np.ndarray:
    """Payoff margin of every off-support vertex over the current value.

    Positive entries mark vertices whose pure strategy strictly improves
    the penalized objective, (Ax)_i > x'Ax - alpha * m with m the squared
    mass on penalized coordinates; support positions are set to -inf.
    """
    x = np.asarray(x, dtype=np.float64)
    on = np.flatnonzero(x > 0.0)
    g = prog.a[:, on] @ x[on]
    pen_mass = float(np.sum(x[prog.penalized] ** 2))
    rhs = float(x[on] @ g[on]) - prog.alpha * pen_mass
    margins = g - rhs
    margins[on] = -np.inf
    return margins


def find_dominant_distribution(prog: ConstrainedProgram, x) -> int | None:
    """Best vertex outside the support whose payoff beats the current value.

    Implements the improvement criterion (Ax)_i > x'Ax - alpha * m, with m
    the squared mass on penalized coordinates: any such vertex is a strictly
    improving pure strategy, and its absence certifies the off-support side
    of the KKT conditions. Returns the largest violator, or None.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.all(x > 0.0):
        return None
    margins = _improvement_margins(prog, x)
    i = int(np.argmax(margins))
    if margins[i] > _VIOLATION_TOL * max(1.0, float(np.abs(prog.a).max()) + prog.alpha):
        return i
    return None


def _infect(B, x, i):
    """One monotone infection step toward pure strategy i."""
    g = B[:, np.flatnonzero(x > 0.0)] @ x[x > 0.0]
    q = float(x @ g)
    gi = float(g[i])
    curv = float(B[i, i]) - 2.0 * gi + q
    if curv < 0.0:
        delta = min((q - gi) / curv, 1.0)
    else:
        delta = 1.0
    out = (1.0 - delta) * x
    out[i] += delta
    return out


def _snap_small(x, zero_tol: float) -> np.ndarray:
    """Zero out numerically-dead coordinates so supports stay honest."""
    top = float(x.max(initial=0.0))
    if top <= 0.0:
        return x
    x = np.where(x < zero_tol * top, 0.0, x)
    return x / x.sum()


def fast_cdsc(
    A,
    Q,
    config: SolverConfig | None = None,
    alpha: float | None = None,
    solver: str = "inimdyn",
    seed: int = 0,
    trace: list | None = None,
    bound_mode: str = "max_degree",
) -> ConstrainedCluster:
    """Constrained solve that grows a small working subgraph from the query.

    Starts on the barycenter of the query face. Each round: look for a
    vertex outside the current support that improves the penalized value
    (a dominant distribution); if found, take one infection step toward it;
    then re-solve the program restricted to the support plus Q and scatter
    the local solution back. Inner rounds run the raw dynamics (they only
    steer the growth of the working set); the full polish-and-probe solve
    happens once, on the terminal working set, and the loop resumes if it
    unlocks further progress. Stops when no improving vertex remains and
    the stabilized solve gained nothing. One penalty alpha, derived from
    the full graph, is used throughout so the working subproblems optimize
    the same function the full solver does. If ``trace`` is a list, the
    working-set size of every round is appended to it.
    """
    A = np.asarray(A, dtype=np.float64)
    config = config or SolverConfig()
    n = A.shape[0]
    q_idx = as_index_set(Q, n)
    prog = ConstrainedProgram(A, q_idx, alpha=alpha, bound_mode=bound_mode)
    B = prog.payoff()
    x = _face_start(n, q_idx, 0.0)
    obj = prog.objective(x)
    lift = max(config.tolerance, 1e-10)

    def local_solve(h, stable):
        sub = B[np.ix_(h, h)]
        warm = x[h]
        # a dash of uniform mass keeps vertex starts movable
        warm = (1.0 - OFF_FACE_MASS) * warm + OFF_FACE_MASS / h.size
        warm /= warm.sum()
        if stable:
            return solve_stable(sub, warm, config, solver, seed=seed)
        return run_dynamics(sub, warm, config, solver)

    thr = _VIOLATION_TOL * max(1.0, float(np.abs(A).max()) + prog.alpha)
    for _ in range(4 * n + 8):
        margins = _improvement_margins(prog, x)
        violators = np.flatnonzero(margins > thr)
        i = None
        batch = violators
        if violators.size:
            # infect toward the strongest violator; bring along the best of
            # the rest, doubling the working set at most, so the set grows
            # geometrically instead of one vertex per round
            order = np.argsort(margins[violators])[::-1]
            cap = max(1, int(np.count_nonzero(x > 0.0)))
            batch = violators[order[:cap]]
            i = int(batch[0])
            x = _infect(B, x, i)
        h = np.union1d(np.flatnonzero(x > 0.0), q_idx)
        h = np.union1d(h, batch)
        if trace is not None:
            trace.append(int(h.size))
        if h.size == 1:
            new_obj = prog.objective(x)
        else:
            res = local_solve(h, stable=False)
            if res.objective >= obj - 1e-12:
                x = np.zeros(n)
                x[h] = _snap_small(res.x, config.zero_tol)
                new_obj = prog.objective(x)
            else:
                new_obj = obj
        if i is None and new_obj <= obj + lift:
            # would stop here; give the terminal working set one polished,
            # stability-probed solve in case the raw pass parked on a
            # saddle, and only stop if that gains nothing either
            if h.size > 1:
                res = local_solve(h, stable=True)
                if res.objective > max(obj, new_obj) + lift:
                    x = np.zeros(n)
                    x[h] = res.x
                    obj = res.objective
                    continue
                if res.objective >= max(obj, new_obj) - 1e-12:
                    x = np.zeros(n)
                    x[h] = res.x
                    obj = max(obj, new_obj, res.objective)
                    break
            obj = max(obj, new_obj)
            break
        obj = max(obj, new_obj)
    return _finish(prog, x, obj, config.zero_tol)
