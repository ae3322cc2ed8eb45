"""Synthetic two-view factor-model data with known ground truth.

Each canonical pair is built constructively: with independent standard
Gaussians g_c, g_1, g_2 the latent scores

    z_k = sqrt(rho) * g_c + sqrt(1 - rho) * g_k

have unit variance and correlation exactly rho across views.  Extra
distinctive factors beyond the shared block are fresh independent Gaussians.
The observed views are Y_k = B_k F_k + E_k with i.i.d. Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InputError, RankTriple, ViewMatrix
from .population import PopulationModel


@dataclass(frozen=True)
class FactorModelSpec:
    """Generator description for a two-view factor model.

    rho holds the population canonical correlations of the shared block,
    sorted descending with entries in (0, 1].
    """

    p1: int
    p2: int
    ranks: RankTriple
    rho: tuple[float, ...]
    loading_scale: float = 1.0
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self):
        rho = tuple(float(v) for v in self.rho)
        object.__setattr__(self, "rho", rho)
        if len(rho) != self.ranks.rc:
            raise InputError(
                f"rho has {len(rho)} entries but rc = {self.ranks.rc}"
            )
        if any(not 0.0 < v <= 1.0 for v in rho):
            raise InputError("rho entries must lie in (0, 1]")
        if any(a < b for a, b in zip(rho, rho[1:])):
            raise InputError("rho must be sorted descending")
        if self.p1 < self.ranks.r1 or self.p2 < self.ranks.r2:
            raise InputError("view dimensions must be at least the ranks")
        if self.loading_scale <= 0.0:
            raise InputError("loading_scale must be positive")
        if self.noise_sd < 0.0:
            raise InputError("noise_sd must be non-negative")


@dataclass(frozen=True)
class GroundTruth:
    """Exact signal structure behind a generated dataset."""

    x1: ViewMatrix
    x2: ViewMatrix
    c1: ViewMatrix
    c2: ViewMatrix
    d1: ViewMatrix
    d2: ViewMatrix
    z1: np.ndarray
    z2: np.ndarray
    loadings1: np.ndarray
    loadings2: np.ndarray
    cov_c1: np.ndarray
    cov_c2: np.ndarray
    cov_d1: np.ndarray
    cov_d2: np.ndarray
    rho: np.ndarray


def _loadings(rng: np.random.Generator, p: int, r: int, rc: int,
              scale: float) -> np.ndarray:
    b = rng.uniform(-scale, scale, size=(p, r))
    if rc:
        # Orthonormalize the shared columns and restore the typical column
        # norm of uniform draws so the factor basis stays well conditioned.
        q, _ = np.linalg.qr(b[:, :rc])
        b[:, :rc] = q * (scale * np.sqrt(p / 3.0))
    return b


def generate(spec: FactorModelSpec, n: int) -> tuple[ViewMatrix, ViewMatrix, GroundTruth]:
    """Draw a dataset of n samples plus its exact ground truth.

    All draws are deterministic given spec.seed; replicate studies should
    derive per-replicate seeds as seed + replicate index.
    """
    if n < 2:
        raise InputError("need at least 2 samples")
    r1, r2, rc = spec.ranks.r1, spec.ranks.r2, spec.ranks.rc
    for p, r, k in ((spec.p1, r1, 1), (spec.p2, r2, 2)):
        if n * p - n * r - p * r <= 0:
            raise InputError(
                f"view {k}: n*p - n*r - p*r <= 0 at n={n}, p={p}, r={r}; "
                "denoising would be infeasible downstream"
            )

    rng = np.random.default_rng(spec.seed)
    g_c = rng.standard_normal((rc, n))
    g_1 = rng.standard_normal((r1, n))
    g_2 = rng.standard_normal((r2, n))
    b1 = _loadings(rng, spec.p1, r1, rc, spec.loading_scale)
    b2 = _loadings(rng, spec.p2, r2, rc, spec.loading_scale)

    rho = np.asarray(spec.rho)
    z1 = g_1.copy()
    z2 = g_2.copy()
    if rc:
        shared = np.sqrt(rho)[:, None] * g_c
        z1[:rc] = shared + np.sqrt(1.0 - rho)[:, None] * g_1[:rc]
        z2[:rc] = shared + np.sqrt(1.0 - rho)[:, None] * g_2[:rc]

    x1 = b1 @ z1
    x2 = b2 @ z2

    # Ground-truth common factors in the real-part convention: the shared
    # factor is known directly, so no auxiliary samples are needed.
    c_re = (rho / (1.0 + rho))[:, None] * (z1[:rc] + z2[:rc]) if rc \
        else np.zeros((0, n))
    c1 = b1[:, :rc] @ c_re
    c2 = b2[:, :rc] @ c_re

    rho1 = np.concatenate([rho, np.zeros(r1 - rc)])
    rho2 = np.concatenate([rho, np.zeros(r2 - rc)])
    truth = GroundTruth(
        x1=ViewMatrix(x1), x2=ViewMatrix(x2),
        c1=ViewMatrix(c1), c2=ViewMatrix(c2),
        d1=ViewMatrix(x1 - c1), d2=ViewMatrix(x2 - c2),
        z1=z1, z2=z2, loadings1=b1, loadings2=b2,
        cov_c1=(b1[:, :rc] * rho) @ b1[:, :rc].T,
        cov_c2=(b2[:, :rc] * rho) @ b2[:, :rc].T,
        cov_d1=(b1 * (1.0 - rho1)) @ b1.T,
        cov_d2=(b2 * (1.0 - rho2)) @ b2.T,
        rho=rho,
    )

    e1 = spec.noise_sd * rng.standard_normal((spec.p1, n))
    e2 = spec.noise_sd * rng.standard_normal((spec.p2, n))
    return ViewMatrix(x1 + e1), ViewMatrix(x2 + e2), truth


def implied_population_model(truth: GroundTruth) -> PopulationModel:
    """Population covariance blocks implied by the generating loadings."""
    b1, b2, rho = truth.loadings1, truth.loadings2, truth.rho
    rc = rho.shape[0]
    sigma12 = (b1[:, :rc] * rho) @ b2[:, :rc].T
    return PopulationModel(sigma1=b1 @ b1.T, sigma2=b2 @ b2.T, sigma12=sigma12)


def recovery_metrics(
    truth: GroundTruth,
    xhat1: np.ndarray,
    xhat2: np.ndarray,
    cov_c1: np.ndarray,
    cov_c2: np.ndarray,
    cov_d1: np.ndarray,
    cov_d2: np.ndarray,
    rho: np.ndarray,
) -> dict[str, float]:
    """Relative Frobenius errors of the estimates against the ground truth.

    All metrics are non-negative and zero exactly when the estimate equals
    the truth; a zero estimate of a nonzero target scores 1.
    """
    metrics = {
        "x1_rel_error": _rel_fro(xhat1, truth.x1.values),
        "x2_rel_error": _rel_fro(xhat2, truth.x2.values),
        "cov_c1_rel_error": _rel_fro(cov_c1, truth.cov_c1),
        "cov_c2_rel_error": _rel_fro(cov_c2, truth.cov_c2),
        "cov_d1_rel_error": _rel_fro(cov_d1, truth.cov_d1),
        "cov_d2_rel_error": _rel_fro(cov_d2, truth.cov_d2),
        "rho_abs_error": _rho_error(np.asarray(rho), truth.rho),
    }
    return metrics


def _rel_fro(estimate: np.ndarray, target: np.ndarray) -> float:
    target_norm = float(np.linalg.norm(target))
    diff = float(np.linalg.norm(np.asarray(estimate) - target))
    if target_norm == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return diff / target_norm


def _rho_error(estimate: np.ndarray, target: np.ndarray) -> float:
    k = max(estimate.shape[0], target.shape[0])
    a = np.zeros(k)
    b = np.zeros(k)
    a[:estimate.shape[0]] = estimate
    b[:target.shape[0]] = target
    return float(np.abs(a - b).max()) if k else 0.0
