"""Low-rank signal recovery by soft-thresholding singular values.

The signal estimate keeps the top-r singular subspace of the noisy view and
shrinks each retained squared singular value by an estimate of the noise
energy, tau * p, where tau is the average tail variance per matrix entry.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    InputError,
    NumericalError,
    SvdFactors,
    ViewMatrix,
    apply_sign_convention,
)


@dataclass(frozen=True)
class SignalEstimate:
    """Denoised view together with its retained spectrum.

    Attributes
    ----------
    xhat : ViewMatrix
        The estimated signal matrix.
    rank : int
        Number of strictly positive soft-thresholded singular values
        (may be smaller than the requested rank).
    soft_singulars : ndarray, shape (rank,)
        sqrt(max(sigma_l^2 - tau * p, 0)) for the retained factors.
    tau : float
        Per-entry noise variance proxy estimated from the singular tail.
    raw_singulars : ndarray
        All singular values of the input view, descending.
    factors : SvdFactors or None
        Compact SVD of xhat (None when rank is 0).
    """

    xhat: ViewMatrix
    rank: int
    soft_singulars: np.ndarray
    tau: float
    raw_singulars: np.ndarray
    factors: SvdFactors | None

    @property
    def p(self) -> int:
        return self.xhat.p

    @property
    def n(self) -> int:
        return self.xhat.n


@dataclass(frozen=True)
class CovEstimate:
    """Symmetric PSD covariance estimate with a cached eigenpair set."""

    matrix: np.ndarray
    rank: int
    eigvecs: np.ndarray | None = None
    eigvals: np.ndarray | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


def soft_threshold_signal(y, r: int) -> SignalEstimate:
    """Estimate the rank-r signal of a noisy view by singular value shrinkage.

    Parameters
    ----------
    y : ViewMatrix or array_like, shape (p, n)
    r : int
        Requested signal rank, 1 <= r <= min(p, n).  The dimensions must
        satisfy n*p - n*r - p*r > 0 so the tail noise level is estimable.

    Returns
    -------
    SignalEstimate
        If shrinkage zeroes trailing singular values, the stored rank is
        the reduced count and a warning is emitted.
    """
    view = y if isinstance(y, ViewMatrix) else ViewMatrix(y)
    p, n = view.p, view.n
    if not 1 <= r <= min(p, n):
        raise InputError(f"rank r={r} must satisfy 1 <= r <= min(p, n) = {min(p, n)}")
    denom = n * p - n * r - p * r
    if denom <= 0:
        raise NumericalError(
            f"cannot estimate noise level: n*p - n*r - p*r = {denom} <= 0; "
            f"rank r={r} is too large for a {p} x {n} view "
            f"(need r < n*p/(n + p) = {n * p / (n + p):.3f})"
        )

    u, s, vt = np.linalg.svd(view.values, full_matrices=False)
    apply_sign_convention(u, vt)

    tau = float(np.sum(s[r:] ** 2) / denom)
    soft = np.sqrt(np.maximum(s[:r] ** 2 - tau * p, 0.0))
    rank = int(np.count_nonzero(soft > 0.0))
    if rank < r and s[0] > 0.0:
        warnings.warn(
            f"soft-thresholding reduced the signal rank from {r} to {rank}",
            stacklevel=2,
        )

    if rank == 0:
        xhat = ViewMatrix(np.zeros((p, n)), names=view.names)
        return SignalEstimate(xhat, 0, soft[:0], tau, s, None)

    left = u[:, :rank].copy()
    right = vt[:rank].T.copy()
    xhat_values = (left * soft[:rank]) @ right.T
    factors = SvdFactors(left=left, singulars=soft[:rank].copy(), right=right)
    xhat = ViewMatrix(xhat_values, names=view.names)
    return SignalEstimate(xhat, rank, soft[:rank].copy(), tau, s, factors)


def signal_covariance(x: SignalEstimate) -> CovEstimate:
    """Covariance estimate n^-1 X X^T of a denoised signal.

    The eigenpairs are derived from the SVD of X/sqrt(n) rather than by
    eigen-solving the p x p matrix, which is better conditioned when p > n.
    """
    n = x.n
    values = x.xhat.values
    cov = values @ values.T / n
    cov = (cov + cov.T) / 2.0
    if x.rank == 0 or x.factors is None:
        return CovEstimate(cov, 0, np.zeros((x.p, 0)), np.zeros(0))
    eigvals = x.factors.singulars**2 / n
    return CovEstimate(cov, x.rank, x.factors.left, eigvals)
