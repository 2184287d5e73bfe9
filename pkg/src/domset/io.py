"""Readers and writers for the package's line-oriented file formats.

All formats are UTF-8 text with LF endings and whitespace-separated
fields; blank lines are skipped everywhere. Errors carry the offending
line number.

- dense matrix: first line ``n``, then n rows of n decimals
- edge list: lines ``i j w`` (0-based, undirected, no duplicates)
- labeled points: header ``n d``, then d coordinates + label token
  (``C<k>`` or ``OUT``) per line
- descriptors: lines ``id v1 .. vd``; consecutive ids group into one
  feature matrix per id
- clusterings: one whitespace-separated label vector per line
- groups: lines ``entity_id group_id``
"""

from __future__ import annotations

import numpy as np

from .bench import OUTLIER
from .exceptions import ParseError


def _content_lines(path) -> list[tuple[int, list[str]]]:
    """Numbered, tokenized, non-blank lines of a text file."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if tokens:
                out.append((lineno, tokens))
    return out


def _float(token: str, path, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{path}:{lineno}: expected a number, got {token!r}") from None


def _int(token: str, path, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{path}:{lineno}: expected an integer, got {token!r}") from None


def read_dense_matrix(path) -> np.ndarray:
    """Dense matrix file: a size header, then one row per line."""
    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty matrix file")
    lineno, header = lines[0]
    if len(header) != 1:
        raise ParseError(f"{path}:{lineno}: header must be a single count")
    n = _int(header[0], path, lineno)
    if n < 1:
        raise ParseError(f"{path}:{lineno}: matrix size must be positive")
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"{path}: expected {n} matrix rows, found {len(rows)}")
    a = np.empty((n, n))
    for r, (lineno, tokens) in enumerate(rows):
        if len(tokens) != n:
            raise ParseError(
                f"{path}:{lineno}: row {r} has {len(tokens)} entries, expected {n}"
            )
        a[r] = [_float(t, path, lineno) for t in tokens]
    return a


def write_dense_matrix(path, a) -> None:
    a = np.asarray(a, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{a.shape[0]}\n")
        for row in a:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_edge_list(path) -> np.ndarray:
    """Edge-list file: ``i j w`` per line, undirected, duplicates rejected.

    The vertex count is the largest id plus one, so isolated top-numbered
    vertices need the dense format instead.
    """

    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty edge list")
    edges = []
    top = -1
    seen: set[tuple[int, int]] = set()
    for lineno, tokens in lines:
        if len(tokens) != 3:
            raise ParseError(
                f"{path}:{lineno}: expected 'i j w', got {len(tokens)} fields"
            )
        i = _int(tokens[0], path, lineno)
        j = _int(tokens[1], path, lineno)
        w = _float(tokens[2], path, lineno)
        if i < 0 or j < 0:
            raise ParseError(f"{path}:{lineno}: vertex ids must be nonnegative")
        if i == j:
            raise ParseError(f"{path}:{lineno}: self-loop on vertex {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ParseError(f"{path}:{lineno}: duplicate edge {key}")
        seen.add(key)
        edges.append((i, j, w))
        top = max(top, i, j)
    a = np.zeros((top + 1, top + 1))
    for i, j, w in edges:
        a[i, j] = a[j, i] = w
    return a


def load_matrix(path) -> np.ndarray:
    """Load either documented matrix format, telling them apart by shape.

    A single-token first line is a dense header; three tokens are an edge.
    Anything else is malformed.
    """

    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty matrix file")
    width = len(lines[0][1])
    if width == 1:
        return read_dense_matrix(path)
    if width == 3:
        return read_edge_list(path)
    lineno = lines[0][0]
    raise ParseError(
        f"{path}:{lineno}: first line has {width} fields; "
        "expected a dense header (1) or an edge (3)"
    )


def read_labeled_points(path) -> tuple[np.ndarray, np.ndarray]:
    """Labeled point cloud: ``n d`` header, then coordinates + label token."""
    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty point file")
    lineno, header = lines[0]
    if len(header) != 2:
        raise ParseError(f"{path}:{lineno}: header must be 'n d'")
    n = _int(header[0], path, lineno)
    d = _int(header[1], path, lineno)
    if n < 1 or d < 1:
        raise ParseError(f"{path}:{lineno}: counts must be positive")
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"{path}: expected {n} points, found {len(rows)}")
    points = np.empty((n, d))
    labels = np.empty(n, dtype=np.intp)
    for r, (lineno, tokens) in enumerate(rows):
        if len(tokens) != d + 1:
            raise ParseError(
                f"{path}:{lineno}: expected {d} coordinates + label, "
                f"got {len(tokens)} fields"
            )
        points[r] = [_float(t, path, lineno) for t in tokens[:d]]
        token = tokens[d]
        if token == "OUT":
            labels[r] = OUTLIER
        elif token.startswith("C") and token[1:].isdigit():
            labels[r] = int(token[1:])
        else:
            raise ParseError(f"{path}:{lineno}: unknown label token {token!r}")
    return points, labels


def write_labeled_points(path, points, labels) -> None:
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.intp)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{points.shape[0]} {points.shape[1]}\n")
        for row, label in zip(points, labels):
            coords = " ".join(f"{v:.17g}" for v in row)
            token = "OUT" if label == OUTLIER else f"C{int(label)}"
            fh.write(f"{coords} {token}\n")


def read_descriptors(path) -> dict[str, np.ndarray]:
    """Descriptor file: rows sharing an id stack into one feature matrix.

    Returns ids in first-appearance order; all rows must agree on width.
    """

    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty descriptor file")
    rows: dict[str, list[list[float]]] = {}
    width = None
    for lineno, tokens in lines:
        if len(tokens) < 2:
            raise ParseError(f"{path}:{lineno}: expected 'id v1 ..', got one field")
        values = [_float(t, path, lineno) for t in tokens[1:]]
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(
                f"{path}:{lineno}: {len(values)} values, earlier rows had {width}"
            )
        rows.setdefault(tokens[0], []).append(values)
    return {key: np.asarray(vals) for key, vals in rows.items()}


def read_clusterings(path) -> list[np.ndarray]:
    """Clustering ensemble: one label vector per line, tokens kept verbatim."""
    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty clusterings file")
    return [np.asarray(tokens) for _, tokens in lines]


def read_groups(path) -> list[np.ndarray]:
    """Group file: ``entity_id group_id`` lines to sorted per-group id lists.

    Groups come back ordered by ascending group id; every entity may appear
    once.
    """

    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty group file")
    assigned: dict[int, int] = {}
    for lineno, tokens in lines:
        if len(tokens) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'entity_id group_id'")
        entity = _int(tokens[0], path, lineno)
        group = _int(tokens[1], path, lineno)
        if entity in assigned:
            raise ParseError(f"{path}:{lineno}: entity {entity} assigned twice")
        assigned[entity] = group
    order = sorted(set(assigned.values()))
    return [
        np.asarray(sorted(e for e, g in assigned.items() if g == gid), dtype=np.intp)
        for gid in order
    ]
