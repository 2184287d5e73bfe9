"""Synthetic benchmark harness: data generation, metrics, and suites.

The generator plants k Gaussian blobs plus uniform clutter in the unit
cube. Metrics are the three the clustering-with-outliers literature leans
on: Jaccard overlap of the predicted and true outlier sets, V-measure of
the full labeling (outliers form one extra class), and purity. The suites
at the bottom are what the CLI's bench command runs.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cdsc import ConstrainedProgram, fast_cdsc, solve_cdsc
from .dynamics import SolverConfig
from .exceptions import (
    DegenerateSigmaError,
    LengthMismatchError,
    ValidationError,
)
from .scod import ScodResult, scod

# Label value marking an outlier point wherever integer labels are used.
OUTLIER = -1


@dataclass(frozen=True)
class LabeledDataset:
    """Synthetic points with ground-truth cluster and outlier labels."""

    points: np.ndarray
    labels: np.ndarray
    gen_params: dict

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def true_outliers(self) -> np.ndarray:
        return np.flatnonzero(self.labels == OUTLIER)


def gen_synthetic(k: int, m: int, d: int, sigma: float, l: int, seed: int) -> LabeledDataset:
    """Plant k clusters of m points plus l uniform outliers in [0,1]^d.

    Cluster centers and outliers are uniform over the cube; members are
    their center plus coordinatewise Normal(0, sigma) noise (and may land
    outside the cube; they are not clipped). Three independent, named RNG
    streams (centers, members, outliers) spawn from the seed, so the same
    seed always reproduces the same dataset bit for bit.
    """
    if min(k, m, l) < 0 or d < 1:
        raise ValidationError("counts must be nonnegative and d at least 1")
    if sigma < 0:
        raise ValidationError("sigma must be nonnegative")
    centers_rng, members_rng, outliers_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )
    centers = centers_rng.random((k, d))
    members = np.repeat(centers, m, axis=0)
    if members.size:
        members = members + members_rng.normal(0.0, sigma, size=members.shape)
    outliers = outliers_rng.random((l, d))
    points = np.vstack([members, outliers])
    labels = np.concatenate(
        [np.repeat(np.arange(k), m), np.full(l, OUTLIER)]
    ).astype(np.intp)
    return LabeledDataset(
        points=points,
        labels=labels,
        gen_params={"k": k, "m": m, "d": d, "sigma": sigma, "l": l, "seed": seed},
    )


def jaccard(pred_outliers, true_outliers) -> float:
    """Overlap of two vertex sets: |intersection| / |union|, empty/empty = 1."""
    pred = np.unique(np.asarray(pred_outliers, dtype=np.intp))
    true = np.unique(np.asarray(true_outliers, dtype=np.intp))
    union = np.union1d(pred, true)
    if union.size == 0:
        return 1.0
    return float(np.intersect1d(pred, true).size) / float(union.size)


def _contingency(pred, true) -> np.ndarray:
    pred = np.asarray(pred).ravel()
    true = np.asarray(true).ravel()
    if pred.size != true.size:
        raise LengthMismatchError(
            f"labelings differ in length: {pred.size} vs {true.size}"
        )
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(true, return_inverse=True)
    table = np.zeros((ti.max() + 1, pi.max() + 1)) if pred.size else np.zeros((0, 0))
    np.add.at(table, (ti, pi), 1.0)
    return table


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def v_measure(pred_labels, true_labels) -> float:
    """Harmonic mean of homogeneity and completeness, in [0, 1].

    Computed from the contingency table with the 0 log 0 = 0 convention; a
    degenerate side (single class or single cluster) counts as perfectly
    homogeneous or complete respectively.
    """
    table = _contingency(pred_labels, true_labels)
    n = int(table.sum())
    if n == 0:
        return 1.0
    h_class = _entropy(table.sum(axis=1), n)
    h_cluster = _entropy(table.sum(axis=0), n)
    joint = table / n
    cluster_marginal = joint.sum(axis=0)
    class_marginal = joint.sum(axis=1)
    nz = joint > 0
    h_class_given_cluster = float(
        -(joint[nz] * (np.log(joint[nz]) - np.log(np.broadcast_to(cluster_marginal, joint.shape)[nz]))).sum()
    )
    h_cluster_given_class = float(
        -(joint[nz] * (np.log(joint[nz]) - np.log(np.broadcast_to(class_marginal[:, None], joint.shape)[nz]))).sum()
    )
    homogeneity = 1.0 if h_class == 0 else 1.0 - h_class_given_cluster / h_class
    completeness = 1.0 if h_cluster == 0 else 1.0 - h_cluster_given_class / h_cluster
    if homogeneity + completeness == 0.0:
        return 0.0
    return 2.0 * homogeneity * completeness / (homogeneity + completeness)


def purity(pred_labels, true_labels) -> float:
    """Fraction of points sitting in their predicted cluster's majority class."""
    table = _contingency(pred_labels, true_labels)
    n = int(table.sum())
    if n == 0:
        return 1.0
    return float(table.max(axis=0).sum()) / n


def squared_distances(points) -> np.ndarray:
    """Dense pairwise squared Euclidean distances, exactly symmetric."""
    pts = np.asarray(points, dtype=np.float64)
    sq = (pts * pts).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    np.maximum(d2, 0.0, out=d2)
    d2 = (d2 + d2.T) / 2.0
    np.fill_diagonal(d2, 0.0)
    return d2


def _logistic_step(d2: np.ndarray, theta: float, tau: float) -> np.ndarray:
    z = np.clip((d2 - theta) / tau, -60.0, 60.0)
    a = 1.0 / (1.0 + np.exp(z))
    np.fill_diagonal(a, 0.0)
    return a


def point_affinity(points, grid: int = 200, window: tuple = (0.02, 0.60)) -> np.ndarray:
    """Contrast affinity for point clouds, calibrated on distance quantiles.

    A plain Gaussian kernel cannot give the robust-affinity cluster gate
    enough contrast on high-dimensional blob data, so this builds the
    affinity in stages. A provisional logistic step planted at the steepest
    jump of the squared-distance quantile curve (the valley between the
    within-cluster band and everything farther) gives every point a strong
    neighbor count. The largest gap low in the sorted counts splits sparse
    points from dense ones; sparse points get their rows damped toward
    zero so they cannot form spurious knots. One mean-shift step under the
    provisional kernel then contracts each dense neighborhood onto its
    local mode, which collapses same-cluster distances by orders of
    magnitude while leaving stragglers out in the open. The final step is
    placed from the neighbor counts themselves: the median count over
    kept points, divided by their number, estimates the fraction of
    same-cluster pairs, and the step lands just past that quantile of the
    contracted distances, with a wide plateau when the curve shows a
    clean chasm there. Degenerates (all points identical) raise
    DegenerateSigma.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValidationError("need a 2-d array with at least two points")
    d2 = squared_distances(pts)
    n = d2.shape[0]
    off = d2[~np.eye(n, dtype=bool)]
    if off.max(initial=0.0) <= 0.0:
        raise DegenerateSigmaError("all points are identical")
    lo, hi = window
    qs = np.quantile(off, np.linspace(lo, hi, grid))
    jumps = np.diff(qs)
    j = int(np.argmax(jumps))
    theta1 = float((qs[j] + qs[j + 1]) / 2.0)
    tau1 = max(float(jumps[j]) / 4.0, 0.02 * theta1)
    if theta1 <= 0.0 or tau1 <= 0.0:
        raise DegenerateSigmaError("distance spread too degenerate to calibrate")
    a1 = _logistic_step(d2, theta1, tau1)

    deg = a1.sum(axis=1)
    med_deg = float(np.median(deg))
    order = np.sort(deg)
    g_lo = int(0.02 * n)
    g_hi = max(int(0.45 * n), g_lo + 2)
    if g_hi <= order.size and g_hi - g_lo >= 2:
        gaps = np.diff(order[g_lo:g_hi])
        g = int(np.argmax(gaps))
        thr = float(order[g_lo + g] + order[g_lo + g + 1]) / 2.0
        width = max(float(gaps[g]) / 8.0, 0.01 * max(med_deg, 1e-12))
        low = np.clip((deg - thr) / width, -60.0, 60.0)
        damp = np.where(deg >= thr, 1.0, 1.0 / (1.0 + np.exp(-low)))
        keep = deg >= thr
    else:
        damp = np.ones(n)
        keep = np.ones(n, dtype=bool)

    shift_w = a1 + np.eye(n)
    contracted = (shift_w @ pts) / shift_w.sum(axis=1)[:, None]
    d2s = squared_distances(contracted)

    kn = int(keep.sum())
    use_d2, theta, tau = d2, theta1, tau1
    if kn >= 3:
        sub = d2s[np.ix_(keep, keep)]
        m2 = sub[~np.eye(kn, dtype=bool)]
        f = min(max(float(np.median(deg[keep])) / max(kn - 1, 1), 0.01), 0.95)
        lo_q = float(np.quantile(m2, f * 0.98))
        hi_q = float(np.quantile(m2, min(f + 0.01, 0.97)))
        eps = 1e-12 * max(1.0, float(m2.max(initial=0.0)))
        if hi_q >= 2.0 * max(lo_q, eps):
            theta2 = lo_q + 0.15 * (hi_q - lo_q)
            tau2 = max((hi_q - lo_q) / 30.0, 0.01 * theta2)
        else:
            theta2 = float(np.quantile(m2, min(f + 0.002, 0.97)))
            inner = float(np.quantile(m2, f * 0.90))
            tau2 = max((theta2 - inner) / 3.0, 0.015 * theta2)
        if theta2 > 0.0 and tau2 > 0.0:
            use_d2, theta, tau = d2s, theta2, tau2

    a = _logistic_step(use_d2, theta, tau) * np.outer(damp, damp)
    np.fill_diagonal(a, 0.0)
    return a


def scod_labels(result: ScodResult, n: int) -> np.ndarray:
    """Flatten a scod partition into per-point labels (OUTLIER = -1)."""
    labels = np.full(n, OUTLIER, dtype=np.intp)
    for cid, cluster in enumerate(result.clusters):
        labels[cluster.support] = cid
    return labels


def evaluate_scod(result: ScodResult, labels) -> dict:
    """Jaccard / V-measure / purity of a scod partition against truth."""
    labels = np.asarray(labels)
    pred = scod_labels(result, labels.size)
    return {
        "jaccard": jaccard(np.flatnonzero(pred == OUTLIER), np.flatnonzero(labels == OUTLIER)),
        "v_measure": v_measure(pred, labels),
        "purity": purity(pred, labels),
    }


def run_scod_synthetic(
    k: int = 10,
    m: int = 100,
    d: int = 32,
    sigma: float = 0.2,
    l: int = 100,
    runs: int = 30,
    seed: int = 0,
    neighbor_fraction: float = 0.10,
    config: SolverConfig | None = None,
    solver: str = "inimdyn",
    jobs: int = 1,
) -> dict:
    """The synthetic clustering-plus-outliers suite: per-run metrics + medians.

    Run r regenerates the dataset with seed + r, builds the contrast
    affinity, runs scod, and scores it against the planted labels. With
    jobs > 1 the runs execute on a thread pool (each run owns its data and
    rng state); results are collected in run order either way, so the
    report is identical no matter the level of parallelism.
    """

    def one_run(r: int) -> dict:
        data = gen_synthetic(k, m, d, sigma, l, seed + r)
        result = scod(
            point_affinity(data.points),
            neighbor_fraction=neighbor_fraction,
            config=config,
            solver=solver,
            seed=seed,
        )
        row = {"run": r, "seed": seed + r}
        row.update(evaluate_scod(result, data.labels))
        row["clusters"] = len(result.clusters)
        row["outliers"] = int(result.outliers.size)
        return row

    if runs <= 0:
        return {"rows": [], "medians": {}}
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one_run, range(runs)))
    else:
        rows = [one_run(r) for r in range(runs)]
    medians = {
        metric: float(np.median([row[metric] for row in rows]))
        for metric in ("jaccard", "v_measure", "purity")
    }
    return {"rows": rows, "medians": medians}


def clique_grid(cliques: int, size: int, weight: float = 1.0) -> np.ndarray:
    """Block-diagonal graph of disjoint uniform cliques."""
    n = cliques * size
    a = np.zeros((n, n))
    block = weight * (np.ones((size, size)) - np.eye(size))
    for c in range(cliques):
        lo = c * size
        a[lo:lo + size, lo:lo + size] = block
    return a


def run_fastcdsc_speed(
    cliques: int = 20,
    size: int = 100,
    queries: int = 100,
    seed: int = 0,
    config: SolverConfig | None = None,
    solver: str = "inimdyn",
) -> dict:
    """Wall-time comparison of the full and localized constrained solvers.

    Each query vertex is solved twice on the clique-grid graph: once with
    the whole-matrix program and once with the working-set solver. Rows
    report both times, their ratio, whether the supports agree, and the
    largest working set the fast run touched.
    """
    a = clique_grid(cliques, size)
    n = a.shape[0]
    rng = np.random.default_rng(seed)
    picks = rng.choice(n, size=min(queries, n), replace=False)
    rows = []
    for q in picks:
        t0 = time.perf_counter()
        full = solve_cdsc(ConstrainedProgram(a, [q]), solver=solver, config=config)
        t1 = time.perf_counter()
        trace: list[int] = []
        fast = fast_cdsc(a, [q], config=config, solver=solver, trace=trace)
        t2 = time.perf_counter()
        rows.append(
            {
                "query": int(q),
                "full_s": t1 - t0,
                "fast_s": t2 - t1,
                "ratio": (t1 - t0) / max(t2 - t1, 1e-12),
                "same_support": bool(np.array_equal(full.support, fast.support)),
                "max_working_set": max(trace),
            }
        )
    if not rows:
        return {
            "rows": [],
            "min_ratio": float("nan"),
            "median_ratio": float("nan"),
            "all_supports_match": True,
            "max_working_set": 0,
        }
    ratios = np.array([row["ratio"] for row in rows])
    return {
        "rows": rows,
        "min_ratio": float(ratios.min()),
        "median_ratio": float(np.median(ratios)),
        "all_supports_match": all(row["same_support"] for row in rows),
        "max_working_set": max(row["max_working_set"] for row in rows),
    }
