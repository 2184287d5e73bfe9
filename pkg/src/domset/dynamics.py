"""Evolutionary game dynamics for simplex-constrained quadratic programs.

Two solvers maximize x'Bx over the standard simplex: classic replicator
dynamics (multiplicative, quadratic cost per step) and an
infection-immunization scheme (additive steps toward pure strategies,
linear cost per step after one initial matvec). Both stop on the
equilibrium gap

    eps(x) = sum_i min{x_i, x'Bx - (Bx)_i}^2

which is zero exactly at Nash equilibria of the payoff B: on the support
the payoffs (Bx)_i match x'Bx, off the support they do not exceed it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import as_simplex, quadratic_value
from .exceptions import NegativeWeightError, ZeroDenominatorError

_RESYNC_EVERY = 256


@dataclass(frozen=True)
class SolverConfig:
    """Stopping and support-reading knobs shared by both solvers.

    tolerance: equilibrium-gap (and step-norm) threshold.
    max_iterations: hard iteration cap.
    zero_tol: relative threshold (to the max component) for reading a
        support out of a converged iterate; raw dynamics park residual mass
        of order sqrt(tolerance) on dead coordinates, so this is looser than
        the exact-arithmetic default in ``core.support``.
    """

    tolerance: float = 1e-7
    max_iterations: int = 10_000
    zero_tol: float = 1e-3


@dataclass(frozen=True)
class FixedPointResult:
    x: np.ndarray
    objective: float
    iterations: int
    converged: bool
    residual: float


def epsilon(B, x) -> float:
    """Equilibrium gap of ``x`` for payoff matrix ``B`` (0 iff Nash)."""
    B = np.asarray(B, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    g = B @ x
    q = float(x @ g)
    d = np.minimum(x, q - g)
    return float(d @ d)


def replicator_step(A, x) -> np.ndarray:
    """One replicator update x_i * (Ax)_i / x'Ax.

    Requires nonnegative payoffs and x'Ax > 0.
    """
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if np.any(A < 0):
        raise NegativeWeightError("replicator payoffs must be nonnegative")
    return _replicator_step(A, x)


def _replicator_step(A, x) -> np.ndarray:
    g = A @ x
    q = float(x @ g)
    if q == 0.0:
        raise ZeroDenominatorError("x'Ax is zero; replicator step undefined")
    return x * g / q


def run_replicator(A, x0, config: SolverConfig | None = None) -> FixedPointResult:
    """Iterate replicator dynamics until the gap or step norm is small.

    Stops when eps(x) <= tolerance, when the infinity-norm step falls to
    tolerance, or at max_iterations. ``converged`` reports whether the
    final residual (the gap) met the tolerance.
    """
    config = config or SolverConfig()
    A = np.asarray(A, dtype=np.float64)
    if np.any(A < 0):
        raise NegativeWeightError("replicator payoffs must be nonnegative")
    x = as_simplex(x0)
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        g = A @ x
        q = float(x @ g)
        if q == 0.0:
            raise ZeroDenominatorError("x'Ax is zero; replicator step undefined")
        d = np.minimum(x, q - g)
        gap = float(d @ d)
        if gap <= config.tolerance:
            iterations -= 1
            break
        nxt = x * g / q
        step = float(np.max(np.abs(nxt - x)))
        x = nxt
        if step <= config.tolerance:
            break
    residual = epsilon(A, x)
    return FixedPointResult(
        x=x,
        objective=quadratic_value(A, x),
        iterations=iterations,
        converged=residual <= config.tolerance,
        residual=residual,
    )


def select_infective(B, x) -> int | None:
    """Best infective pure strategy, or None at a (pure-strategy) equilibrium.

    Returns the index maximizing (Bx)_i - x'Bx when that excess is positive.
    """
    B = np.asarray(B, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    g = B @ x
    q = float(x @ g)
    i = int(np.argmax(g))
    return i if g[i] > q else None


def inimdyn(B, x0, config: SolverConfig | None = None) -> FixedPointResult:
    """Infection-immunization dynamics restricted to pure-strategy infections.

    While the gap exceeds the tolerance, infect the population with the best
    pure strategy e_i: move x by delta * (e_i - x) with delta chosen as the
    segment maximizer (capped at 1), which never decreases x'Bx. Stops early
    when no pure strategy is infective. Handles signed payoffs.

    The per-iteration cost is linear: Bx and x'Bx are updated incrementally
    from the changed coordinate and resynced periodically.
    """
    config = config or SolverConfig()
    B = np.asarray(B, dtype=np.float64)
    x = as_simplex(x0)
    g = B @ x
    q = float(x @ g)
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        d = np.minimum(x, q - g)
        gap = float(d @ d)
        if gap <= config.tolerance:
            iterations -= 1
            break
        i = int(np.argmax(g))
        if g[i] <= q:
            iterations -= 1
            break
        col = B[:, i]
        curv = float(col[i]) - 2.0 * float(g[i]) + q
        if curv < 0.0:
            delta = min((q - float(g[i])) / curv, 1.0)
        else:
            delta = 1.0
        keep = 1.0 - delta
        q = keep * keep * q + 2.0 * delta * keep * float(g[i]) + delta * delta * float(col[i])
        x = keep * x
        x[i] += delta
        g = keep * g + delta * col
        if iterations % _RESYNC_EVERY == 0:
            x = x / x.sum()
            g = B @ x
            q = float(x @ g)
    x = x / x.sum()
    residual = epsilon(B, x)
    return FixedPointResult(
        x=x,
        objective=quadratic_value(B, x),
        iterations=iterations,
        converged=residual <= config.tolerance,
        residual=residual,
    )


def perturbed_barycenter(n: int, seed: int = 0, magnitude: float = 1e-4) -> np.ndarray:
    """Barycenter nudged by a seeded per-index perturbation, renormalized.

    Deterministic in (n, seed, magnitude); used to start solvers off exact
    symmetry without true randomness.
    """
    rng = np.random.default_rng(seed)
    x = np.full(n, 1.0 / n) + magnitude * rng.random(n) / n
    return as_simplex(x)


def run_dynamics(B, x0, config: SolverConfig | None = None, solver: str = "inimdyn") -> FixedPointResult:
    """Dispatch to a solver by name, accepting signed payoff matrices.

    Replicator requires nonnegative payoffs, so for signed B it runs on
    B + c * ones (c the smallest shift making entries nonnegative), which
    adds the constant c to the objective on the simplex and preserves
    equilibria; the reported objective and residual refer to B itself.
    """
    config = config or SolverConfig()
    B = np.asarray(B, dtype=np.float64)
    if solver == "inimdyn":
        return inimdyn(B, x0, config)
    if solver != "replicator":
        raise ValueError(f"unknown solver {solver!r}")
    lo = float(B.min(initial=0.0))
    if lo >= 0.0:
        return run_replicator(B, x0, config)
    shifted = B - lo
    res = run_replicator(shifted, x0, config)
    return FixedPointResult(
        x=res.x,
        objective=quadratic_value(B, res.x),
        iterations=res.iterations,
        converged=res.converged,
        residual=epsilon(B, res.x),
    )


def _snap(x, cutoff: float):
    mask = x > cutoff
    if not mask.any():
        return None
    if not np.any(x[~mask] > 0.0):
        return None
    xs = np.where(mask, x, 0.0)
    return xs / xs.sum()


def _reconverge(B, xs, polish: SolverConfig) -> FixedPointResult:
    """Re-converge a snapped iterate on its face.

    Replicator dynamics keep exact zeros at zero, so running it from a
    truncated vector confines the trajectory to the face while residual
    mass on dying coordinates decays geometrically (the pure-infection
    scheme only thins such mass harmonically, which is what parks it there
    in the first place). Single-coordinate faces are already stationary.
    """
    if int(np.count_nonzero(xs)) == 1:
        return FixedPointResult(
            x=xs,
            objective=quadratic_value(B, xs),
            iterations=0,
            converged=True,
            residual=epsilon(B, xs),
        )
    return run_dynamics(B, xs, polish, solver="replicator")


def solve_polished(B, x0, config: SolverConfig | None = None, solver: str = "inimdyn") -> FixedPointResult:
    """Run a solver, then snap near-zero coordinates and verify.

    Dynamics leave stray mass on dead coordinates (inflating supports read at
    tight thresholds), so after the raw run: truncate coordinates below a
    threshold, re-converge on the face at a tighter tolerance, and accept the
    result only if the full-matrix gap still meets the tolerance and the
    objective did not drop. A rejected snap (it removed a coordinate the
    equilibrium needs) falls back to a more conservative threshold, then to
    the unsnapped iterate.
    """
    config = config or SolverConfig()
    B = np.asarray(B, dtype=np.float64)
    res = run_dynamics(B, x0, config, solver)
    if not res.converged and solver != "replicator":
        # hand the stalled iterate to replicator, whose multiplicative step
        # drains dying coordinates geometrically
        rescue = run_dynamics(B, res.x, config, solver="replicator")
        if rescue.residual < res.residual and rescue.objective >= res.objective - 1e-12:
            res = replace(rescue, iterations=res.iterations + rescue.iterations)
    polish = replace(config, tolerance=min(config.tolerance, 1e-13))
    for _ in range(4):
        x = res.x
        top = float(x.max(initial=0.0))
        aggressive = max(config.zero_tol * top, np.sqrt(config.tolerance))
        improved = False
        for cutoff in (aggressive, config.zero_tol * top):
            xs = _snap(x, cutoff)
            if xs is None:
                continue
            try:
                cand = _reconverge(B, xs, polish)
            except ZeroDenominatorError:
                continue
            gap = epsilon(B, cand.x)
            if gap <= config.tolerance and cand.objective >= res.objective - 1e-12:
                res = FixedPointResult(
                    x=cand.x,
                    objective=cand.objective,
                    iterations=res.iterations + cand.iterations,
                    converged=True,
                    residual=gap,
                )
                improved = True
                break
        if not improved:
            break
    # final interior pass: tighten the equilibrium on the face we ended on,
    # which the snap ladder skips when there was nothing left to truncate
    try:
        cand = _reconverge(B, res.x, polish)
    except ZeroDenominatorError:
        return res
    gap = epsilon(B, cand.x)
    if (
        gap <= max(config.tolerance, res.residual)
        and gap <= res.residual
        and cand.objective >= res.objective - 1e-12
    ):
        res = FixedPointResult(
            x=cand.x,
            objective=cand.objective,
            iterations=res.iterations + cand.iterations,
            converged=gap <= config.tolerance,
            residual=gap,
        )
    return res


def strict_maximizer_check(B, x, config: SolverConfig | None = None) -> bool:
    """Second-order test that ``x`` is a strict local StQP maximizer.

    Sufficient conditions at an interior-of-face equilibrium: every
    off-support payoff strictly below the value (no flat escape along an
    edge), and the support block strictly concave on zero-sum directions
    (checked on the double-centered block, whose spectrum on that subspace
    matches; the centering itself contributes one zero eigenvalue). Any
    doubt returns False, so callers fall back to probing. Saddles that sit
    on symmetry axes (two balanced cliques) have an improving zero-sum
    direction and fail the concavity half.
    """
    config = config or SolverConfig()
    B = np.asarray(B, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    sup = np.flatnonzero(x > 0.0)
    if sup.size == 0:
        return False
    scale = max(1.0, float(np.abs(B).max(initial=0.0)))
    g = B @ x
    q = float(x @ g)
    if float(np.max(np.abs(g[sup] - q))) > 1e-6 * scale:
        return False
    ext = np.ones(x.size, dtype=bool)
    ext[sup] = False
    if np.any(ext) and float(np.min(q - g[ext])) <= 1e-9 * scale:
        return False
    if sup.size == 1:
        return bool(np.any(ext))
    block = B[np.ix_(sup, sup)]
    centered = (
        block
        - block.mean(axis=1, keepdims=True)
        - block.mean(axis=0, keepdims=True)
        + block.mean()
    )
    centered = (centered + centered.T) / 2.0
    eig = np.linalg.eigvalsh(centered)
    tol = 1e-10 * scale * max(1.0, float(sup.size))
    near_zero = int(np.sum(np.abs(eig) <= tol))
    positive = int(np.sum(eig > tol))
    return positive == 0 and near_zero == 1


def solve_stable(
    B,
    x0,
    config: SolverConfig | None = None,
    solver: str = "inimdyn",
    seed: int = 0,
    probes: int = 6,
    nudge: float = 1e-3,
) -> FixedPointResult:
    """Solve, then keep kicking the result until it survives a kick.

    The equilibrium-gap stop accepts any Nash point, including unstable ones
    that sit on symmetry axes of the payoff (two identical cliques, say,
    balanced from a near-uniform start). A strict local maximizer is
    asymptotically stable: perturb it and the dynamics come back with the
    same objective. An unstable equilibrium lets the perturbation grow, and
    re-solving strictly improves the objective. So: probe with a seeded
    nudge, re-solve, accept improvements, and stop at the first probe that
    fails to improve. A result that already passes the second-order
    maximality test skips the probes outright. Deterministic in (x0, seed).
    """
    config = config or SolverConfig()
    B = np.asarray(B, dtype=np.float64)
    res = solve_polished(B, x0, config, solver)
    if res.converged and strict_maximizer_check(B, res.x, config):
        return res
    rng = np.random.default_rng(seed)
    lift = max(config.tolerance, 1e-10)
    for _ in range(max(probes, 0)):
        bump = res.x + nudge * float(res.x.max(initial=0.0)) * rng.random(res.x.size)
        cand = solve_polished(B, bump / bump.sum(), config, solver)
        better = cand.objective > res.objective + lift
        if not better and cand.converged and not res.converged:
            res = replace(cand, iterations=res.iterations + cand.iterations)
            break
        if not better:
            break
        res = replace(cand, iterations=res.iterations + cand.iterations)
    return res
