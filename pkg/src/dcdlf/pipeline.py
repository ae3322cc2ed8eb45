"""End-to-end orchestration: denoise -> CCA -> decomposition -> PVE.

Also houses rank selection (explicit or eigengap per view, explicit or
correlation-cutoff for the shared rank) and the invariant check suite used
to audit a finished run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .cca import CanonicalSystem, canonical_system
from .core import ConfigError, NumericalError, RankTriple, ViewMatrix, validate_view_pair
from .decompose import Decomposition, decompose
from .denoise import SignalEstimate, signal_covariance, soft_threshold_signal
from .pve import PveTable, pve_from_covs

RANK_RULES = ("explicit", "eigengap")
RC_RULES = ("explicit", "rho_cutoff")


@dataclass(frozen=True)
class PipelineResult:
    """Everything a run produces, in memory."""

    x1: SignalEstimate
    x2: SignalEstimate
    decomposition: Decomposition
    pve1: PveTable
    pve2: PveTable
    ranks: RankTriple
    effective_ranks: RankTriple
    rho: np.ndarray
    seed: int
    aux_mode: str
    version: str


def eigengap_rank(y: ViewMatrix) -> int:
    """Pick the rank maximizing the squared singular-value ratio.

    Searches l in [1, min(p, n) / 2]; raises when the spectrum is flat or
    zero, in which case explicit ranks must be supplied.
    """
    s = np.linalg.svd(y.values, compute_uv=False)
    limit = min(y.p, y.n) // 2
    if limit < 1 or s[0] <= 0.0:
        raise NumericalError(
            "eigengap rank selection is undefined for this view "
            "(degenerate spectrum); supply explicit ranks"
        )
    head = s[:limit] ** 2
    tail = s[1:limit + 1] ** 2
    with np.errstate(divide="ignore"):
        ratios = np.where(tail > 0.0, head / np.where(tail > 0.0, tail, 1.0),
                          np.where(head > 0.0, np.inf, np.nan))
    finite = ratios[np.isfinite(ratios)]
    if np.isinf(ratios).any():
        return int(np.argmax(np.isinf(ratios)) + 1)
    if finite.size == 0 or np.nanmax(ratios) <= 1.0 + 1e-12:
        raise NumericalError(
            "eigengap rank selection found a flat spectrum; "
            "supply explicit ranks"
        )
    return int(np.nanargmax(ratios) + 1)


def choose_ranks(
    y1: ViewMatrix,
    y2: ViewMatrix,
    r1: int | None = None,
    r2: int | None = None,
    rc: int | None = None,
    rank_rule: str = "explicit",
    rc_rule: str = "explicit",
    rho_cutoff: float = 0.05,
    seed: int = 0,
) -> RankTriple:
    """Resolve the rank triple per the configured rules.

    The rho_cutoff rule runs denoising and the canonical system once and
    counts correlations above the cutoff.
    """
    _validate_rules(rank_rule, rc_rule, r1, r2, rc, rho_cutoff)
    y1, y2 = validate_view_pair(y1, y2)
    if rank_rule == "eigengap":
        r1, r2 = eigengap_rank(y1), eigengap_rank(y2)
    if rc_rule == "rho_cutoff":
        x1 = soft_threshold_signal(y1, r1)
        x2 = soft_threshold_signal(y2, r2)
        system = canonical_system(x1, x2)
        rc = int(np.count_nonzero(system.rho > rho_cutoff))
    return RankTriple(r1=r1, r2=r2, rc=rc)


def _validate_rules(rank_rule, rc_rule, r1, r2, rc, rho_cutoff) -> None:
    if rank_rule not in RANK_RULES:
        raise ConfigError(f"rank_rule must be one of {RANK_RULES}, got {rank_rule!r}")
    if rc_rule not in RC_RULES:
        raise ConfigError(f"rc_rule must be one of {RC_RULES}, got {rc_rule!r}")
    if rank_rule == "explicit" and (r1 is None or r2 is None):
        raise ConfigError("rank_rule 'explicit' requires both r1 and r2")
    if rc_rule == "explicit" and rc is None:
        raise ConfigError("rc_rule 'explicit' requires rc")
    if not 0.0 < rho_cutoff < 1.0:
        raise ConfigError(f"rho_cutoff must lie in (0, 1), got {rho_cutoff}")


def run_decomposition(
    y1,
    y2,
    r1: int | None = None,
    r2: int | None = None,
    rc: int | None = None,
    rank_rule: str = "explicit",
    rc_rule: str = "explicit",
    rho_cutoff: float = 0.05,
    aux_mode: str = "projected",
    seed: int = 0,
) -> PipelineResult:
    """Run the full two-view decomposition pipeline on raw data views."""
    _validate_rules(rank_rule, rc_rule, r1, r2, rc, rho_cutoff)
    y1, y2 = validate_view_pair(y1, y2)
    if rank_rule == "eigengap":
        r1, r2 = eigengap_rank(y1), eigengap_rank(y2)
    ranks_requested_r = (r1, r2)
    y1_ranks = RankTriple(r1=r1, r2=r2, rc=0)
    y1_ranks.check_against(y1.p, y1.n, 1)
    y1_ranks.check_against(y2.p, y2.n, 2)

    x1 = soft_threshold_signal(y1, r1)
    x2 = soft_threshold_signal(y2, r2)
    cov_x1 = signal_covariance(x1)
    cov_x2 = signal_covariance(x2)
    system = canonical_system(x1, x2, cov_x1, cov_x2)

    if rc_rule == "rho_cutoff":
        rc = int(np.count_nonzero(system.rho > rho_cutoff))
    ranks = RankTriple(r1=ranks_requested_r[0], r2=ranks_requested_r[1], rc=rc)

    result = decompose(x1, x2, ranks.rc, seed=seed, aux_mode=aux_mode,
                       system=system, cov_x1=cov_x1, cov_x2=cov_x2)
    pve1 = pve_from_covs(cov_x1, result.cov_c1, result.cov_d1)
    pve2 = pve_from_covs(cov_x2, result.cov_c2, result.cov_d2)
    effective = RankTriple(r1=system.r1, r2=system.r2, rc=result.rc)
    return PipelineResult(
        x1=x1, x2=x2, decomposition=result, pve1=pve1, pve2=pve2,
        ranks=ranks, effective_ranks=effective, rho=system.rho,
        seed=seed, aux_mode=aux_mode, version=__version__,
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    status: str  # "pass", "fail", or "info"

    @property
    def enforced(self) -> bool:
        return self.status != "info"


def run_invariant_checks(
    xhat1: np.ndarray,
    xhat2: np.ndarray,
    chat1: np.ndarray,
    chat2: np.ndarray,
    dhat1: np.ndarray,
    dhat2: np.ndarray,
    cov_c1: np.ndarray,
    cov_c2: np.ndarray,
    cov_d1: np.ndarray,
    cov_d2: np.ndarray,
    c_factors: np.ndarray,
    d_factors_1: np.ndarray,
    d_factors_2: np.ndarray,
    rho: np.ndarray,
    pve1_c: np.ndarray,
    pve1_d: np.ndarray,
    pve2_c: np.ndarray,
    pve2_d: np.ndarray,
    aux_mode: str = "projected",
    rc: int | None = None,
) -> list[CheckResult]:
    """Audit a finished decomposition against its contractual identities.

    Tri-orthogonality of the factor samples is enforced only under the
    projected auxiliary mode (under raw mode the auxiliary rows are only
    population-orthogonal, so the result is reported as informational).
    The cross-view distinctive Gram check additionally requires that every
    canonical pair was decomposed (rc = min(r1, r2)); truncated pairs keep
    their sample correlation by construction.
    """
    if rc is None:
        rc = c_factors.shape[0]
    n = xhat1.shape[1]
    checks: list[CheckResult] = []

    def rel_fro(diff, base) -> float:
        base_norm = np.linalg.norm(base)
        if base_norm == 0.0:
            return float(np.linalg.norm(diff))
        return float(np.linalg.norm(diff) / base_norm)

    checks.append(CheckResult(
        "matrix_additivity_view1",
        rel_fro(chat1 + dhat1 - xhat1, xhat1), 1e-10, ""))
    checks.append(CheckResult(
        "matrix_additivity_view2",
        rel_fro(chat2 + dhat2 - xhat2, xhat2), 1e-10, ""))

    cov_x1 = xhat1 @ xhat1.T / n
    cov_x2 = xhat2 @ xhat2.T / n
    checks.append(CheckResult(
        "covariance_additivity_view1",
        rel_fro(cov_c1 + cov_d1 - cov_x1, cov_x1), 1e-10, ""))
    checks.append(CheckResult(
        "covariance_additivity_view2",
        rel_fro(cov_c2 + cov_d2 - cov_x2, cov_x2), 1e-10, ""))

    for k, (pc, pd) in enumerate(((pve1_c, pve1_d), (pve2_c, pve2_d)), start=1):
        nonzero = (np.asarray(pc) + np.asarray(pd)) > 0.0
        worst = float(np.abs(pc + pd - 1.0)[nonzero].max()) if nonzero.any() else 0.0
        checks.append(CheckResult(f"pve_rule_of_sum_view{k}", worst, 1e-10, ""))

    rho = np.asarray(rho)
    rho_ok = 0.0
    if rho.size:
        rho_ok = max(float((-rho).max()), float((rho - 1.0).max()), 0.0)
        if np.any(np.diff(rho) > 1e-12):
            rho_ok = max(rho_ok, float(np.diff(rho).max()))
    checks.append(CheckResult("rho_sorted_in_unit_interval", rho_ok, 1e-12, ""))

    projected = aux_mode == "projected"
    factor_violation = _factor_cross_covariance(
        c_factors, d_factors_1, d_factors_2, n)
    checks.append(CheckResult(
        "factor_tri_orthogonality", factor_violation, 1e-8,
        "" if projected else "info"))

    full_rc = rc == min(d_factors_1.shape[0], d_factors_2.shape[0])
    gram = dhat1 @ dhat2.T / n
    scale = np.linalg.norm(dhat1) * np.linalg.norm(dhat2) / n
    gram_violation = float(np.abs(gram).max() / scale) if scale > 0.0 else 0.0
    checks.append(CheckResult(
        "distinct_subspace_orthogonality", gram_violation, 1e-8,
        "" if (projected and full_rc) else "info"))

    return [
        CheckResult(c.name, c.value, c.tolerance,
                    c.status or ("pass" if c.value <= c.tolerance else "fail"))
        for c in checks
    ]


def _factor_cross_covariance(c_factors, d1, d2, n: int) -> float:
    """Worst absolute sample covariance among factor rows, variances excluded.

    Pairs (d1^l, d2^l) for l >= rc are excluded: the method leaves those
    canonical pairs undecomposed, so their sample correlation is expected.
    """
    rc = c_factors.shape[0]
    worst = 0.0
    stack = [c_factors, d1, d2]
    for a_idx in range(3):
        for b_idx in range(a_idx, 3):
            a, b = stack[a_idx], stack[b_idx]
            if a.size == 0 or b.size == 0:
                continue
            cov = a @ b.T / n
            mask = np.ones_like(cov, dtype=bool)
            if a_idx == b_idx:
                np.fill_diagonal(mask, False)
            if (a_idx, b_idx) == (1, 2):
                m = min(cov.shape)
                idx = np.arange(rc, m)
                mask[idx, idx] = False
            if mask.any():
                worst = max(worst, float(np.abs(cov[mask]).max()))
    return worst
