"""Proportions of variance explained by common and distinctive factors.

Variable-level PVEs are ratios of covariance diagonals; view-level PVEs are
trace ratios, equal to the variance-weighted average of the variable-level
values.  Both levels obey the rule of sum PVE_c + PVE_d = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InputError
from .denoise import CovEstimate, SignalEstimate


@dataclass(frozen=True)
class PveTable:
    """Per-variable and per-view variance-explained proportions.

    Variables with zero estimated signal variance get PVE 0 on both sides,
    weight 0, and are flagged in ``zero_variance``.
    """

    variable_pve_c: np.ndarray
    variable_pve_d: np.ndarray
    view_pve_c: float
    view_pve_d: float
    weights: np.ndarray
    zero_variance: np.ndarray


def pve_from_covs(
    cov_x: CovEstimate, cov_c: CovEstimate, cov_d: CovEstimate
) -> PveTable:
    """PVE table from the three covariance estimates (the primary route)."""
    var_x = np.diag(cov_x.matrix).copy()
    var_c = np.diag(cov_c.matrix).copy()
    var_d = np.diag(cov_d.matrix).copy()
    if var_x.shape != var_c.shape or var_x.shape != var_d.shape:
        raise InputError("covariance estimates disagree on dimension")
    if np.any(var_x < 0):
        raise InputError("signal covariance has a negative diagonal entry")

    zero = var_x <= 0.0
    safe = np.where(zero, 1.0, var_x)
    pve_c = np.where(zero, 0.0, var_c / safe)
    pve_d = np.where(zero, 0.0, var_d / safe)

    total = float(var_x.sum())
    weights = var_x / total if total > 0.0 else np.zeros_like(var_x)
    view_c = float(var_c.sum() / total) if total > 0.0 else 0.0
    view_d = float(var_d.sum() / total) if total > 0.0 else 0.0
    return PveTable(pve_c, pve_d, view_c, view_d, weights, zero)


def pve_correlation_form(
    x: SignalEstimate,
    c_factors: np.ndarray,
    d_factors: np.ndarray,
) -> PveTable:
    """PVE table as sums of squared sample correlations (cross-check route).

    Agrees with :func:`pve_from_covs` when the factor sample moments match
    the covariance estimates exactly, i.e. under the projected auxiliary
    mode.  Zero-variance factor rows contribute correlation 0.
    """
    values = x.xhat.values
    n = x.n
    var_x = np.einsum("ij,ij->i", values, values) / n

    pve_c = _squared_correlation_sum(values, var_x, c_factors, n)
    pve_d = _squared_correlation_sum(values, var_x, d_factors, n)

    zero = var_x <= 0.0
    total = float(var_x.sum())
    weights = var_x / total if total > 0.0 else np.zeros_like(var_x)
    view_c = float(weights @ pve_c)
    view_d = float(weights @ pve_d)
    return PveTable(pve_c, pve_d, view_c, view_d, weights, zero)


def _squared_correlation_sum(
    values: np.ndarray, var_x: np.ndarray, factors: np.ndarray, n: int
) -> np.ndarray:
    out = np.zeros(var_x.shape[0])
    if factors.size == 0:
        return out
    var_f = np.einsum("ij,ij->i", factors, factors) / n
    cross = values @ factors.T / n  # p x L
    for ell in range(factors.shape[0]):
        if var_f[ell] <= 0.0:
            continue
        denom = var_x * var_f[ell]
        with np.errstate(divide="ignore", invalid="ignore"):
            corr2 = np.where(denom > 0.0, cross[:, ell] ** 2 / denom, 0.0)
        out += corr2
    return out
