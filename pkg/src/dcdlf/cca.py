"""Sample canonical correlation analysis of two denoised signals.

The construction whitens each signal with the eigenpairs of its covariance
estimate, takes the full SVD of the cross matrix of the whitened scores, and
rotates the scores into canonical coordinates.  The resulting augmented
score matrices satisfy, up to rounding,

    n^-1 Z_k Z_k^T = I          (each view's scores are orthonormal)
    n^-1 Z_1 Z_2^T = diag(rho)  (rectangular-diagonal cross covariance)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InputError, NumericalError, full_svd
from .denoise import CovEstimate, SignalEstimate, signal_covariance

# Relative eigenvalue cutoff for the pseudo-inverse in the whitening step.
EIG_CUTOFF = 1e-12


@dataclass(frozen=True)
class CanonicalSystem:
    """Canonical correlations, score matrices, and coefficient matrices.

    Attributes
    ----------
    rho : ndarray, shape (min(r1, r2),)
        Canonical correlations, descending, clamped into [0, 1].
    z1, z2 : ndarray, shape (r_k, n)
        Augmented canonical variable samples.
    b1, b2 : ndarray, shape (p_k, r_k)
        Coefficient matrices mapping canonical factors back to variables.
    theta : ndarray, shape (r1, r2)
        Cross matrix of the whitened scores.
    u_theta1, u_theta2 : ndarray
        Square orthogonal factors of theta's full SVD.
    """

    rho: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    theta: np.ndarray
    u_theta1: np.ndarray
    u_theta2: np.ndarray
    n: int

    @property
    def r1(self) -> int:
        return self.z1.shape[0]

    @property
    def r2(self) -> int:
        return self.z2.shape[0]


def _kept_eigenpairs(cov: CovEstimate) -> tuple[np.ndarray, np.ndarray]:
    if cov.eigvecs is None or cov.eigvals is None:
        raise InputError("covariance estimate lacks cached eigenpairs")
    lam = np.asarray(cov.eigvals, dtype=float)
    if lam.size == 0:
        return np.zeros((cov.p, 0)), lam
    keep = lam > EIG_CUTOFF * lam.max()
    return np.asarray(cov.eigvecs)[:, keep], lam[keep]


def whitened_scores(x: SignalEstimate, cov: CovEstimate) -> np.ndarray:
    """Whitened score matrix H = pinv(Lambda)^(1/2) V^T X, shape (r, n).

    Rows are orthonormal in the sample inner product: n^-1 H H^T = I.
    Eigendirections with eigenvalues below a relative cutoff are dropped.
    """
    vecs, lam = _kept_eigenpairs(cov)
    if lam.size == 0:
        raise NumericalError("cannot whiten a rank-0 signal")
    return (vecs / np.sqrt(lam)).T @ x.xhat.values


def cross_matrix(h1: np.ndarray, h2: np.ndarray, n: int) -> np.ndarray:
    """Cross matrix of two whitened score sets, n^-1 H1 H2^T."""
    if h1.shape[1] != h2.shape[1] or h1.shape[1] != n:
        raise InputError("whitened scores disagree on the sample count")
    return h1 @ h2.T / n


def canonical_system(
    x1: SignalEstimate,
    x2: SignalEstimate,
    cov1: CovEstimate | None = None,
    cov2: CovEstimate | None = None,
) -> CanonicalSystem:
    """Estimate the canonical system of two denoised signals.

    Raises NumericalError when either view has rank 0, in which case the
    decomposition is empty and there is nothing to correlate.
    """
    if x1.n != x2.n:
        raise InputError(f"views disagree on sample count: {x1.n} vs {x2.n}")
    if x1.rank == 0 or x2.rank == 0:
        raise NumericalError(
            "a view has signal rank 0; the decomposition is empty "
            "(denoising removed all structure)"
        )
    n = x1.n
    cov1 = cov1 if cov1 is not None else signal_covariance(x1)
    cov2 = cov2 if cov2 is not None else signal_covariance(x2)

    h1 = whitened_scores(x1, cov1)
    h2 = whitened_scores(x2, cov2)
    theta = cross_matrix(h1, h2, n)

    u1, svals, u2 = full_svd(theta)
    rho = np.clip(svals, 0.0, 1.0)

    z1 = u1.T @ h1
    z2 = u2.T @ h2

    b1 = _coefficients(x1, cov1, u1, z1, n)
    b2 = _coefficients(x2, cov2, u2, z2, n)

    return CanonicalSystem(
        rho=rho, z1=z1, z2=z2, b1=b1, b2=b2,
        theta=theta, u_theta1=u1, u_theta2=u2, n=n,
    )


def _coefficients(
    x: SignalEstimate,
    cov: CovEstimate,
    u_theta: np.ndarray,
    z: np.ndarray,
    n: int,
) -> np.ndarray:
    """B = V Lambda^(1/2) U_theta, cross-checked against n^-1 X Z^T."""
    vecs, lam = _kept_eigenpairs(cov)
    b = (vecs * np.sqrt(lam)) @ u_theta
    b_direct = x.xhat.values @ z.T / n
    scale = max(1.0, float(np.abs(b).max()))
    if not np.allclose(b, b_direct, atol=1e-8 * scale, rtol=0.0):
        raise NumericalError(
            "coefficient matrix mismatch between the eigen formula and the "
            "direct cross-covariance; the whitening step is inconsistent"
        )
    return b
