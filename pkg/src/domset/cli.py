"""Command-line surface: cluster, cdsc, scod, bench, consensus.

Assignment commands print one ``id cluster_id`` line per vertex (-1 means
unassigned or outlier); bench prints ``row ...`` and ``median ...`` lines.
Every command ends with a ``#``-prefixed summary block naming the command,
the sha256 of the input file, the effective configuration, and per-cluster
facts. Stdout is a pure function of input, flags, and seed; wall-clock
timings and other diagnostics go to stderr.

Exit codes: 0 success, 2 input error, 3 internal invariant violation,
4 constraint set left unsatisfied.

Configuration precedence: command-line flags beat the JSON file named by
the DOMSET_CONFIG environment variable, which beats built-in defaults.
The file holds a single object; recognized keys are solver, seed,
min_size, neighbor_fraction, alpha, jobs, tolerance, max_iterations.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .affinity import coassociation, consensus
from .bench import (
    evaluate_scod,
    point_affinity,
    run_fastcdsc_speed,
    run_scod_synthetic,
    scod_labels,
)
from .cdsc import (
    ConstrainedProgram,
    enumerate_all_constrained,
    fast_cdsc,
    resolve_overlaps,
    solve_cdsc,
)
from .core import build_affinity
from .dsets import peel_off_enumerate
from .dynamics import SolverConfig
from .exceptions import (
    ConstraintUnsatisfiedError,
    DomsetError,
    ParseError,
    ValidationError,
)
from .io import load_matrix, read_clusterings, read_labeled_points
from .scod import scod

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3
EXIT_UNSATISFIED = 4

CONFIG_ENV = "DOMSET_CONFIG"

_DEFAULTS = {
    "solver": "inimdyn",
    "seed": 0,
    "min_size": 2,
    "neighbor_fraction": 0.10,
    "alpha": "auto",
    "jobs": 1,
    "tolerance": None,
    "max_iterations": None,
}
_SOLVERS = ("replicator", "inimdyn")


def _fmt(x) -> str:
    return "%.12g" % float(x)


def _render(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt(v)
    return str(v)


@dataclass(frozen=True)
class RunReport:
    """Everything one command run produced, split by output stream.

    body and summary render to stdout (deterministic for a fixed input,
    flags, and seed); diagnostics and per-phase timings go to stderr.
    """

    command: str
    input_digest: str
    config: tuple
    body: tuple
    summary: tuple
    diagnostics: tuple
    timings: tuple

    def stdout_text(self) -> str:
        head = (
            f"# command {self.command}",
            f"# input {self.input_digest}",
            "# config " + " ".join(f"{k}={v}" for k, v in self.config),
        )
        return "".join(f"{line}\n" for line in (*self.body, *head, *self.summary))

    def stderr_text(self) -> str:
        lines = list(self.diagnostics)
        lines.extend(f"time {name} {secs:.6f}" for name, secs in self.timings)
        return "".join(f"{line}\n" for line in lines)


class _Phases:
    """Wall-clock bookkeeping; mark() closes the phase begun by the last call."""

    def __init__(self):
        self._t0 = time.perf_counter()
        self._last = self._t0
        self.rows: list[tuple[str, float]] = []

    def mark(self, name: str):
        now = time.perf_counter()
        self.rows.append((name, now - self._last))
        self._last = now

    def done(self) -> tuple:
        self.rows.append(("total", time.perf_counter() - self._t0))
        return tuple(self.rows)


def _report(command, digest, echo: dict, body, summary, phases, diagnostics=()):
    pairs = tuple(sorted((k, _render(v)) for k, v in echo.items()))
    return RunReport(
        command, digest, pairs, tuple(body), tuple(summary), tuple(diagnostics), phases.done()
    )


def _check_config_value(key, value):
    if key == "solver":
        if value not in _SOLVERS:
            raise ParseError(f"config solver must be one of {_SOLVERS}, got {value!r}")
    elif key in ("seed", "min_size", "jobs", "max_iterations"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"config {key} must be an integer, got {value!r}")
    elif key in ("neighbor_fraction", "tolerance"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"config {key} must be a number, got {value!r}")
    elif key == "alpha":
        if value != "auto" and (isinstance(value, bool) or not isinstance(value, (int, float))):
            raise ParseError(f"config alpha must be 'auto' or a number, got {value!r}")


def _load_env_config() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    unknown = sorted(set(obj) - set(_DEFAULTS))
    if unknown:
        raise ParseError(f"{path}: unknown config keys: {', '.join(unknown)}")
    for key, value in obj.items():
        _check_config_value(key, value)
    return obj


def _effective(args, cfg: dict, key: str):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    return cfg.get(key, _DEFAULTS[key])


def _solver_config(cfg: dict) -> SolverConfig | None:
    tol = cfg.get("tolerance")
    cap = cfg.get("max_iterations")
    if tol is None and cap is None:
        return None
    base = SolverConfig()
    return SolverConfig(
        tolerance=base.tolerance if tol is None else float(tol),
        max_iterations=base.max_iterations if cap is None else int(cap),
    )


def _digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _assignment_lines(labels) -> tuple:
    return tuple(f"{i} {int(v)}" for i, v in enumerate(labels))


def _parse_constraints(text: str) -> list[int]:
    tokens = [t for t in text.replace(",", " ").split() if t]
    if not tokens:
        raise ParseError("constraint list is empty")
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"constraint ids must be integers, got {text!r}") from None


def _parse_number_list(text, name: str, cast) -> list:
    try:
        values = [cast(t) for t in str(text).split(",") if t != ""]
    except ValueError:
        raise ParseError(f"{name} must be a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise ParseError(f"{name} list is empty")
    return values


def cmd_cluster(args, cfg, phases) -> RunReport:
    digest = _digest(args.matrix)
    a = build_affinity(load_matrix(args.matrix), mode="strict")
    phases.mark("load")
    solver = _effective(args, cfg, "solver")
    seed = _effective(args, cfg, "seed")
    min_size = _effective(args, cfg, "min_size")
    scfg = _solver_config(cfg)
    n = a.shape[0]
    summary = []
    if args.mode == "peel":
        clusters = peel_off_enumerate(
            a, min_cluster_size=min_size, config=scfg, solver=solver, seed=seed
        )
        phases.mark("solve")
        labels = np.full(n, -1, dtype=int)
        for k, cl in enumerate(clusters):
            labels[cl.support] = k
        summary.append(f"# clusters {len(clusters)}")
        for k, cl in enumerate(clusters):
            summary.append(f"# cluster {k} size {cl.size} cohesiveness {_fmt(cl.cohesiveness)}")
    else:
        clusters = enumerate_all_constrained(a, config=scfg, solver=solver, seed=seed)
        labels = resolve_overlaps(clusters)
        phases.mark("solve")
        summary.append(f"# clusters {len(clusters)}")
        for k, cl in enumerate(clusters):
            assigned = int((labels == k).sum())
            summary.append(f"# cluster {k} size {assigned} objective {_fmt(cl.objective)}")
    summary.append(f"# unassigned {int((labels == -1).sum())}")
    echo = {"mode": args.mode, "min_size": min_size, "seed": seed, "solver": solver}
    return _report("cluster", digest, echo, _assignment_lines(labels), summary, phases)


def cmd_cdsc(args, cfg, phases) -> RunReport:
    digest = _digest(args.matrix)
    a = build_affinity(load_matrix(args.matrix), mode="strict")
    phases.mark("load")
    solver = _effective(args, cfg, "solver")
    seed = _effective(args, cfg, "seed")
    scfg = _solver_config(cfg)
    alpha_req = args.alpha if args.alpha is not None else cfg.get("alpha", _DEFAULTS["alpha"])
    if alpha_req == "auto":
        alpha_val = None
    else:
        try:
            alpha_val = float(alpha_req)
        except (TypeError, ValueError):
            raise ParseError(f"alpha must be 'auto' or a number, got {alpha_req!r}") from None
    q = _parse_constraints(args.constraints)
    prog = ConstrainedProgram(a, q, alpha=alpha_val)
    if args.fast:
        trace: list[int] = []
        cluster = fast_cdsc(
            a, q, config=scfg, alpha=alpha_val, solver=solver, seed=seed, trace=trace
        )
    else:
        cluster = solve_cdsc(prog, solver=solver, config=scfg, seed=seed)
    phases.mark("solve")
    n = a.shape[0]
    labels = np.full(n, -1, dtype=int)
    labels[cluster.support] = 0
    summary = [f"# alpha {_fmt(prog.alpha)}"]
    if args.fast:
        summary.append("# working_set " + " ".join(str(s) for s in trace))
    summary.append(f"# cluster 0 size {cluster.size} objective {_fmt(cluster.objective)}")
    summary.append(f"# unassigned {n - cluster.size}")
    echo = {
        "alpha": "auto" if alpha_val is None else _fmt(alpha_val),
        "fast": bool(args.fast),
        "seed": seed,
        "solver": solver,
    }
    return _report("cdsc", digest, echo, _assignment_lines(labels), summary, phases)


def _sniff_scod_input(path: str) -> str:
    """Labeled point files start with an `n d` header, matrices do not."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tokens = line.split()
            if not tokens:
                continue
            return "points" if len(tokens) == 2 else "matrix"
    raise ParseError(f"{path}: file has no content")


def cmd_scod(args, cfg, phases) -> RunReport:
    digest = _digest(args.input)
    fraction = float(_effective(args, cfg, "neighbor_fraction"))
    if fraction <= 0.0:
        raise ValidationError(f"neighbor fraction must be positive, got {_fmt(fraction)}")
    solver = _effective(args, cfg, "solver")
    seed = _effective(args, cfg, "seed")
    scfg = _solver_config(cfg)
    if _sniff_scod_input(args.input) == "points":
        points, truth = read_labeled_points(args.input)
        phases.mark("load")
        a = point_affinity(points)
        phases.mark("affinity")
    else:
        a = build_affinity(load_matrix(args.input), mode="strict")
        truth = None
        phases.mark("load")
    result = scod(a, neighbor_fraction=fraction, config=scfg, solver=solver, seed=seed)
    phases.mark("solve")
    n = a.shape[0]
    summary = [
        f"# global_cohesiveness {_fmt(result.global_cohesiveness)}",
        f"# clusters {len(result.clusters)}",
    ]
    for k, cl in enumerate(result.clusters):
        summary.append(f"# cluster {k} size {cl.size} cohesiveness {_fmt(cl.cohesiveness)}")
    summary.append(f"# outlier_sets {len(result.outlier_sets)}")
    summary.append(f"# outliers {int(result.outliers.size)}")
    if truth is not None:
        metrics = evaluate_scod(result, truth)
        for key in ("jaccard", "v_measure", "purity"):
            summary.append(f"# {key} {_fmt(metrics[key])}")
    echo = {"neighbor_fraction": fraction, "seed": seed, "solver": solver}
    return _report(
        "scod", digest, echo, _assignment_lines(scod_labels(result, n)), summary, phases
    )


def cmd_bench(args, cfg, phases) -> RunReport:
    solver = _effective(args, cfg, "solver")
    seed = _effective(args, cfg, "seed")
    jobs = _effective(args, cfg, "jobs")
    scfg = _solver_config(cfg)
    if args.suite == "scod-synthetic":
        runs = args.runs if args.runs is not None else 30
        fraction = float(_effective(args, cfg, "neighbor_fraction"))
        ls = _parse_number_list(args.l, "l", int)
        ds = _parse_number_list(args.d, "d", int)
        sigmas = _parse_number_list(args.sigma, "sigma", float)
        body = []
        for l in ls:
            for d in ds:
                for sigma in sigmas:
                    out = run_scod_synthetic(
                        k=args.k,
                        m=args.m,
                        d=d,
                        sigma=sigma,
                        l=l,
                        runs=runs,
                        seed=seed,
                        neighbor_fraction=fraction,
                        config=scfg,
                        solver=solver,
                        jobs=jobs,
                    )
                    prefix = f"l={l} d={d} sigma={_fmt(sigma)}"
                    for row in out["rows"]:
                        body.append(
                            f"row {prefix} run={row['run']} seed={row['seed']}"
                            f" jaccard={_fmt(row['jaccard'])}"
                            f" v_measure={_fmt(row['v_measure'])}"
                            f" purity={_fmt(row['purity'])}"
                            f" clusters={row['clusters']} outliers={row['outliers']}"
                        )
                    if out["medians"]:
                        md = out["medians"]
                        body.append(
                            f"median {prefix} jaccard={_fmt(md['jaccard'])}"
                            f" v_measure={_fmt(md['v_measure'])} purity={_fmt(md['purity'])}"
                        )
                    phases.mark(f"cell {prefix}")
        summary = [f"# rows {sum(1 for ln in body if ln.startswith('row '))}"]
        echo = {
            "suite": args.suite,
            "runs": runs,
            "jobs": jobs,
            "k": args.k,
            "m": args.m,
            "d": str(args.d),
            "sigma": str(args.sigma),
            "l": str(args.l),
            "neighbor_fraction": fraction,
            "seed": seed,
            "solver": solver,
        }
        return _report("bench", "-", echo, body, summary, phases)
    queries = args.runs if args.runs is not None else 100
    out = run_fastcdsc_speed(
        cliques=args.cliques,
        size=args.size,
        queries=queries,
        seed=seed,
        config=scfg,
        solver=solver,
    )
    phases.mark("suite")
    body = [
        f"row query={r['query']} match={'yes' if r['same_support'] else 'no'}"
        f" working={r['max_working_set']}"
        for r in out["rows"]
    ]
    summary = [
        f"# queries {len(out['rows'])}",
        f"# supports_match {'true' if out['all_supports_match'] else 'false'}",
        f"# max_working_set {out['max_working_set']}",
    ]
    diagnostics = [
        f"query {r['query']} full {r['full_s']:.4f} fast {r['fast_s']:.4f} ratio {r['ratio']:.1f}"
        for r in out["rows"]
    ]
    if out["rows"]:
        diagnostics.append(f"ratio_min {out['min_ratio']:.1f}")
        diagnostics.append(f"ratio_median {out['median_ratio']:.1f}")
    echo = {
        "suite": args.suite,
        "runs": queries,
        "cliques": args.cliques,
        "size": args.size,
        "seed": seed,
        "solver": solver,
    }
    return _report("bench", "-", echo, body, summary, phases, diagnostics)


def cmd_consensus(args, cfg, phases) -> RunReport:
    digest = _digest(args.labelings)
    vectors = read_clusterings(args.labelings)
    phases.mark("load")
    solver = _effective(args, cfg, "solver")
    seed = _effective(args, cfg, "seed")
    min_size = _effective(args, cfg, "min_size")
    scfg = _solver_config(cfg)
    co = coassociation(vectors)
    clusters = consensus(co, min_cluster_size=min_size, config=scfg, solver=solver, seed=seed)
    phases.mark("solve")
    n = vectors[0].size
    labels = np.full(n, -1, dtype=int)
    for k, cl in enumerate(clusters):
        labels[cl.support] = k
    leftovers = np.flatnonzero(labels == -1)
    for j, i in enumerate(leftovers):
        labels[i] = len(clusters) + j
    summary = [
        f"# ensemble {co.ensemble_size}",
        f"# clusters {len(clusters) + leftovers.size}",
    ]
    for k, cl in enumerate(clusters):
        summary.append(f"# cluster {k} size {cl.size} cohesiveness {_fmt(cl.cohesiveness)}")
    summary.append(f"# singletons {leftovers.size}")
    echo = {"min_size": min_size, "seed": seed, "solver": solver}
    return _report("consensus", digest, echo, _assignment_lines(labels), summary, phases)


def _add_common(sp):
    sp.add_argument(
        "--solver", choices=_SOLVERS, default=None, help="dynamics used for every solve"
    )
    sp.add_argument("--seed", type=int, default=None, help="rng seed for start perturbations")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="domset",
        description="Dominant-set clustering: peel-off enumeration, constrained "
        "queries, outlier-aware partitioning, consensus, and benchmarks.",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    c = sub.add_parser("cluster", help="enumerate clusters of an affinity file")
    c.add_argument("matrix", help="dense-matrix or edge-list file")
    _add_common(c)
    c.add_argument(
        "--mode",
        choices=("peel", "constrained"),
        default="peel",
        help="peel-off enumeration or constrained full cover",
    )
    c.add_argument("--min-size", dest="min_size", type=int, default=None)
    c.set_defaults(func=cmd_cluster)

    d = sub.add_parser("cdsc", help="constrained dominant-set query")
    d.add_argument("matrix", help="dense-matrix or edge-list file")
    _add_common(d)
    d.add_argument("--constraints", required=True, help="comma-separated vertex ids")
    d.add_argument("--alpha", default=None, help="'auto' or a positive penalty value")
    d.add_argument(
        "--fast", action="store_true", help="localized solver; emits working-set sizes"
    )
    d.set_defaults(func=cmd_cdsc)

    s = sub.add_parser("scod", help="clusters plus outlier detection")
    s.add_argument("input", help="labeled point file or affinity matrix file")
    _add_common(s)
    s.add_argument("--neighbor-fraction", dest="neighbor_fraction", type=float, default=None)
    s.set_defaults(func=cmd_scod)

    b = sub.add_parser("bench", help="synthetic benchmark suites")
    _add_common(b)
    b.add_argument("--suite", choices=("scod-synthetic", "fastcdsc-speed"), required=True)
    b.add_argument("--runs", type=int, default=None, help="runs per cell / query count")
    b.add_argument("--jobs", type=int, default=None, help="concurrent runs (scod-synthetic)")
    b.add_argument("--k", type=int, default=10, help="planted clusters")
    b.add_argument("--m", type=int, default=100, help="points per cluster")
    b.add_argument("--d", default="32", help="dimensions, comma list sweeps")
    b.add_argument("--sigma", default="0.2", help="cluster spread, comma list sweeps")
    b.add_argument("--l", default="50,100,200", help="clutter points, comma list sweeps")
    b.add_argument("--neighbor-fraction", dest="neighbor_fraction", type=float, default=None)
    b.add_argument("--cliques", type=int, default=20, help="cliques in the speed graph")
    b.add_argument("--size", type=int, default=100, help="vertices per clique")
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("consensus", help="combine an ensemble of labelings")
    e.add_argument("labelings", help="file with one label vector per line")
    _add_common(e)
    e.add_argument("--min-size", dest="min_size", type=int, default=None)
    e.set_defaults(func=cmd_consensus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    phases = _Phases()
    try:
        file_cfg = _load_env_config()
        report = args.func(args, file_cfg, phases)
    except ConstraintUnsatisfiedError as exc:
        print(f"domset: constraint unsatisfied: {exc}", file=sys.stderr)
        return EXIT_UNSATISFIED
    except (ValidationError, OSError, UnicodeDecodeError) as exc:
        print(f"domset: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomsetError as exc:
        print(f"domset: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    sys.stdout.write(report.stdout_text())
    sys.stderr.write(report.stderr_text())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
