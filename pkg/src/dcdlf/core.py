"""Shared matrix types, validation, and deterministic SVD conventions.

Everything downstream works on dense float64 arrays with rows = variables
and columns = samples.  All result objects are immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DcdlfError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(DcdlfError):
    """Invalid run configuration (missing or inconsistent options)."""


class InputError(DcdlfError):
    """Malformed input data (shapes, non-finite entries, bad files)."""


class NumericalError(DcdlfError):
    """A numerical precondition failed (rank bounds, degenerate spectra)."""


def _as_float_matrix(values, what: str = "matrix") -> np.ndarray:
    arr = np.array(values, dtype=float, order="C")
    if arr.ndim != 2:
        raise InputError(f"{what} must be 2-dimensional, got shape {arr.shape}")
    return arr


def _check_finite(arr: np.ndarray, what: str = "matrix") -> None:
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise InputError(
            f"{what} has a non-finite entry at row {bad[0]}, column {bad[1]}"
        )


@dataclass(frozen=True)
class ViewMatrix:
    """One data view: a dense p x n matrix (rows = variables, columns = samples).

    Parameters
    ----------
    values : array_like, shape (p, n)
        Finite real entries; p >= 1 and n >= 2.
    names : tuple of str, optional
        Variable labels, used only for output annotation.
    """

    values: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = _as_float_matrix(self.values, "view matrix")
        _check_finite(arr, "view matrix")
        if arr.shape[0] < 1:
            raise InputError("view matrix needs at least one variable (row)")
        if arr.shape[1] < 2:
            raise InputError(
                f"view matrix needs at least 2 samples (columns), got {arr.shape[1]}"
            )
        if self.names is not None and len(self.names) != arr.shape[0]:
            raise InputError(
                f"got {len(self.names)} variable names for {arr.shape[0]} rows"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RankTriple:
    """Signal ranks of the two views and of their cross-covariance."""

    r1: int
    r2: int
    rc: int

    def __post_init__(self):
        for name in ("r1", "r2", "rc"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise InputError(f"rank {name} must be a non-negative integer")
            object.__setattr__(self, name, int(value))
        if self.rc > min(self.r1, self.r2):
            raise InputError(
                f"rc={self.rc} exceeds min(r1, r2)={min(self.r1, self.r2)}"
            )

    def check_against(self, p: int, n: int, which: int) -> None:
        r = self.r1 if which == 1 else self.r2
        if r > min(p, n):
            raise InputError(
                f"r{which}={r} exceeds min(p, n)={min(p, n)} for a {p} x {n} view"
            )


@dataclass(frozen=True)
class SvdFactors:
    """Compact SVD factors under the fixed sign convention.

    The convention: in each left singular vector the entry of largest
    absolute value is non-negative (ties broken by lowest index), with the
    matching right vector's sign flipped along.  Under repeated singular
    values only the spanned subspaces are contractual, not the individual
    vectors.
    """

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = np.asarray(self.left, dtype=float)
        sing = np.asarray(self.singulars, dtype=float)
        right = np.asarray(self.right, dtype=float)
        if left.ndim != 2 or right.ndim != 2 or sing.ndim != 1:
            raise InputError("SVD factors have inconsistent dimensions")
        k = sing.shape[0]
        if left.shape[1] != k or right.shape[1] != k:
            raise InputError("SVD factors have inconsistent dimensions")
        if np.any(sing < 0) or np.any(np.diff(sing) > 0):
            raise InputError("singular values must be non-negative and descending")
        for arr in (left, sing, right):
            arr.setflags(write=False)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "singulars", sing)
        object.__setattr__(self, "right", right)

    @property
    def rank(self) -> int:
        return self.singulars.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singulars) @ self.right.T


def apply_sign_convention(u: np.ndarray, vt: np.ndarray) -> None:
    """Flip singular-vector pairs in place so each left vector's largest-magnitude
    entry is non-negative (first occurrence wins on ties)."""
    for j in range(u.shape[1]):
        anchor = np.argmax(np.abs(u[:, j]))
        if u[anchor, j] < 0:
            u[:, j] *= -1.0
            if j < vt.shape[0]:
                vt[j, :] *= -1.0


def compact_svd(matrix, k: int) -> SvdFactors:
    """Top-k singular value decomposition with the deterministic sign convention.

    Parameters
    ----------
    matrix : array_like, shape (m, n)
        Finite real matrix.
    k : int
        Number of factors to keep, 1 <= k <= min(m, n).

    Returns
    -------
    SvdFactors
        left (m, k), singulars (k,) descending, right (n, k).
    """
    arr = _as_float_matrix(matrix)
    _check_finite(arr)
    m, n = arr.shape
    if not 1 <= k <= min(m, n):
        raise InputError(f"k={k} must satisfy 1 <= k <= min(m, n) = {min(m, n)}")
    u, s, vt = np.linalg.svd(arr, full_matrices=False)
    apply_sign_convention(u, vt)
    return SvdFactors(left=u[:, :k].copy(), singulars=s[:k].copy(),
                      right=vt[:k].T.copy())


def full_svd(matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD M = U1 diag(s) U2^T with square orthogonal U1 (m x m), U2 (n x n).

    Sign convention: for the first min(m, n) columns the left vector is
    anchored (largest-magnitude entry non-negative) and the right vector
    flipped along with it; the remaining null-space columns of each factor
    are anchored independently.
    """
    arr = _as_float_matrix(matrix)
    _check_finite(arr)
    u, s, vt = np.linalg.svd(arr, full_matrices=True)
    k = s.shape[0]
    apply_sign_convention(u[:, :k], vt[:k, :])
    for factor in (u[:, k:], vt[k:, :].T):
        for j in range(factor.shape[1]):
            anchor = np.argmax(np.abs(factor[:, j]))
            if factor[anchor, j] < 0:
                factor[:, j] *= -1.0
    return u, s, vt.T


def validate_view_pair(y1, y2) -> tuple[ViewMatrix, ViewMatrix]:
    """Check that two views share the sample count and wrap them as ViewMatrix.

    Accepts arrays or ViewMatrix instances.  Raises InputError on a sample
    count mismatch, n < 2, or non-finite entries (reported with indices).
    """
    v1 = y1 if isinstance(y1, ViewMatrix) else ViewMatrix(y1)
    v2 = y2 if isinstance(y2, ViewMatrix) else ViewMatrix(y2)
    if v1.n != v2.n:
        raise InputError(
            f"sample-count mismatch between views: n={v1.n} vs n={v2.n}"
        )
    return v1, v2
