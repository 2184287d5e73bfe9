"""Core affinity and simplex primitives.

An affinity matrix here is a plain ``(n, n)`` float64 ndarray that is
square, symmetric, nonnegative, and zero on the diagonal. ``build_affinity``
is the validating constructor; everything downstream assumes (and never
mutates) arrays it produced. Simplex vectors are length-``n`` float64
arrays, nonnegative and summing to one within 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    NegativeWeightError,
    NonSquareError,
    AsymmetryError,
    ValidationError,
    ZeroDenominatorError,
    ZeroSizeError,
)

# Relative threshold (to the max component) below which a simplex entry is
# treated as zero when reading a support out of exact arithmetic.
DEFAULT_ZERO_TOL = 1e-6

SIMPLEX_ATOL = 1e-12


def _as_square(raw) -> np.ndarray:
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ZeroSizeError("affinity matrix must have at least one vertex")
    if not np.all(np.isfinite(arr)):
        raise NegativeWeightError("affinity entries must be finite")
    return arr


def symmetrize(raw) -> tuple[np.ndarray, float]:
    """Force a square matrix into a valid affinity.

    Averages the matrix with its transpose, zeroes the diagonal, and clamps
    negative entries to zero.

    Returns
    -------
    (affinity, correction)
        ``affinity`` is the repaired read-only matrix and ``correction`` the
        largest absolute change applied to any entry. Applying the repair to
        its own output is a bit-identical no-op with correction 0.
    """
    arr = _as_square(raw)
    fixed = (arr + arr.T) / 2.0
    np.fill_diagonal(fixed, 0.0)
    np.maximum(fixed, 0.0, out=fixed)
    correction = float(np.max(np.abs(fixed - arr)))
    fixed.flags.writeable = False
    return fixed, correction


def build_affinity(raw, mode: str = "strict", tol: float = 0.0) -> np.ndarray:
    """Validate (or repair) a raw matrix into an affinity matrix.

    Parameters
    ----------
    raw : array-like, shape (n, n)
    mode : {"strict", "symmetrize"}
        ``strict`` raises on any violation; ``symmetrize`` repairs by
        averaging with the transpose, zeroing the diagonal, and clamping
        negatives.
    tol : float
        Largest absolute asymmetry ``|a_ij - a_ji|`` accepted in strict mode.

    Returns
    -------
    ndarray
        A read-only float64 copy.
    """
    if mode == "symmetrize":
        fixed, _ = symmetrize(raw)
        return fixed
    if mode != "strict":
        raise ValueError(f"unknown mode {mode!r}")
    arr = _as_square(raw).copy()
    gap = float(np.max(np.abs(arr - arr.T)))
    if gap > tol:
        raise AsymmetryError(f"asymmetry {gap:g} exceeds tolerance {tol:g}")
    if gap > 0.0:
        # within tolerance: average the halves so the result is exactly
        # symmetric for downstream numerics
        arr = (arr + arr.T) / 2.0
    if np.any(arr < 0):
        raise NegativeWeightError("affinity entries must be nonnegative")
    if np.any(np.diagonal(arr) != 0):
        raise ValidationError("affinity diagonal must be zero")
    arr.flags.writeable = False
    return arr


def barycenter(n: int) -> np.ndarray:
    """Uniform simplex vector of length ``n``."""
    if n <= 0:
        raise ZeroSizeError("barycenter needs n >= 1")
    return np.full(n, 1.0 / n)


def as_simplex(values) -> np.ndarray:
    """Renormalize a nonnegative vector onto the standard simplex."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ZeroSizeError("simplex vector must be 1-d and nonempty")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise NegativeWeightError("simplex entries must be finite and nonnegative")
    total = float(x.sum())
    if total <= 0.0:
        raise ZeroDenominatorError("cannot normalize a zero vector")
    x = x / total
    # One more pass kills the last-ulp drift so the 1e-12 invariant holds.
    x = x / x.sum()
    return x


def is_simplex(x, atol: float = SIMPLEX_ATOL) -> bool:
    x = np.asarray(x, dtype=np.float64)
    return bool(x.ndim == 1 and x.size > 0 and np.all(x >= 0) and abs(x.sum() - 1.0) <= atol)


def support(x, zero_tol: float | None = None) -> np.ndarray:
    """Indices of the nonzero components of ``x``.

    ``zero_tol`` is relative to the max component; entries at or below
    ``zero_tol * max(x)`` are treated as zero. Default 1e-6.
    """
    x = np.asarray(x, dtype=np.float64)
    if zero_tol is None:
        zero_tol = DEFAULT_ZERO_TOL
    cutoff = zero_tol * float(x.max(initial=0.0))
    return np.flatnonzero(x > cutoff).astype(np.intp)


def quadratic_value(A, x) -> float:
    """The quadratic form x'Ax (the double sum over all entry pairs)."""
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {A.shape}")
    if x.shape != (A.shape[0],):
        raise DimensionMismatchError(
            f"vector of length {x.shape} does not match matrix of order {A.shape[0]}"
        )
    return float(x @ (A @ x))


def as_index_set(ids, n: int | None = None) -> np.ndarray:
    """Sorted unique vertex ids as an intp array; bounds-checked against n."""
    idx = np.unique(np.asarray(ids, dtype=np.intp))
    if idx.size == 0:
        raise ZeroSizeError("vertex set must be nonempty")
    if idx[0] < 0:
        raise DimensionMismatchError(f"vertex ids must be nonnegative, got {int(idx[0])}")
    if n is not None and idx[-1] >= n:
        raise DimensionMismatchError(f"vertex id {int(idx[-1])} out of range for n={n}")
    return idx


@dataclass(frozen=True)
class Cluster:
    """One extracted cluster.

    support: sorted vertex ids; characteristic: full-length simplex vector
    supported on them; cohesiveness: its quadratic value in the affinity it
    was extracted from.
    """

    support: np.ndarray
    characteristic: np.ndarray
    cohesiveness: float

    def __post_init__(self):
        object.__setattr__(self, "support", np.asarray(self.support, dtype=np.intp))
        object.__setattr__(self, "characteristic", np.asarray(self.characteristic, dtype=np.float64))

    @property
    def size(self) -> int:
        return int(self.support.size)
