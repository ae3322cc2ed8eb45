"""Pairwise common/distinctive decomposition of canonical variable pairs.

For each canonical pair (z1, z2) with correlation rho, the common factor is

    c = (z1 + z2) * rho / (1 + rho) + z_im * sqrt(rho * (1 - rho) / (1 + rho))

with an auxiliary standardized variable z_im orthogonal to both views, and
d_k = z_k - c.  This is the unique solution (up to the sign of z_im) with
c uncorrelated with d_1 and d_2, d_1 uncorrelated with d_2, var(c) = rho,
and var(d_k) = 1 - rho.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cca import CanonicalSystem, canonical_system
from .core import InputError, NumericalError, ViewMatrix
from .denoise import CovEstimate, SignalEstimate, signal_covariance

# Correlations below this are treated as exactly zero so no auxiliary noise
# is injected for numerically-null canonical pairs.
RHO_EPS = 1e-12

AUX_MODES = ("raw", "projected")


def _check_rho(rho: float) -> float:
    if not -1e-9 <= rho <= 1.0 + 1e-9:
        raise InputError(f"canonical correlation {rho} outside [0, 1]")
    rho = min(max(float(rho), 0.0), 1.0)
    return 0.0 if rho < RHO_EPS else rho


@dataclass(frozen=True)
class PairWeights:
    """Combination weights of one canonical pair's decomposition."""

    rho: float
    w_sum: float
    w_im: float
    var_c: float
    var_d: float


def pair_weights(rho: float) -> PairWeights:
    """Decomposition weights for a single pair with correlation rho in [0, 1].

    Values outside [0, 1] by more than 1e-9 are rejected; small excursions
    are clamped.
    """
    rho = _check_rho(rho)
    w_sum = rho / (1.0 + rho)
    w_im = np.sqrt(rho * (1.0 - rho) / (1.0 + rho))
    return PairWeights(rho=rho, w_sum=w_sum, w_im=float(w_im),
                       var_c=rho, var_d=1.0 - rho)


@dataclass(frozen=True)
class AuxiliaryBlock:
    """Samples of the auxiliary standardized variables, one row per common factor.

    mode "raw": i.i.d. standard Gaussian draws from the seeded generator.
    mode "projected": the raw draws residualized against the canonical score
    rows (and the constant vector), then rescaled to unit sample variance, so
    the population orthogonality holds exactly in the sample.
    """

    z_im: np.ndarray
    seed: int
    mode: str

    @property
    def rows(self) -> int:
        return self.z_im.shape[0]


def generate_auxiliary(
    rc: int,
    n: int,
    seed: int,
    mode: str = "projected",
    z1: np.ndarray | None = None,
    z2: np.ndarray | None = None,
) -> AuxiliaryBlock:
    """Draw the auxiliary sample block Z_im of shape (rc, n).

    Projected mode requires the score matrices z1, z2 and enough samples:
    n must exceed r1 + r2 + rc + 1 so the residuals are non-degenerate.
    """
    if mode not in AUX_MODES:
        raise InputError(f"auxiliary mode must be one of {AUX_MODES}, got {mode!r}")
    if rc < 0:
        raise InputError("rc must be non-negative")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((rc, n))
    if mode == "raw" or rc == 0:
        return AuxiliaryBlock(raw, seed, mode)

    if z1 is None or z2 is None:
        raise InputError("projected mode needs the canonical score matrices")
    r1, r2 = z1.shape[0], z2.shape[0]
    if n <= r1 + r2 + rc + 1:
        raise NumericalError(
            f"projected auxiliary block needs n > r1 + r2 + rc + 1 = "
            f"{r1 + r2 + rc + 1}, got n = {n}"
        )

    span = np.vstack([np.ones((1, n)), z1, z2])
    q, _ = np.linalg.qr(span.T)  # n x (1 + r1 + r2), orthonormal columns
    rows = np.empty((rc, n))
    for i in range(rc):
        g = raw[i] - q @ (q.T @ raw[i])
        for prev in rows[:i]:
            g = g - (prev @ g) / (prev @ prev) * prev
        norm = np.linalg.norm(g)
        if norm <= 1e-8 * np.linalg.norm(raw[i]):
            raise NumericalError(
                "auxiliary residual is degenerate; increase n or lower rc"
            )
        rows[i] = g * (np.sqrt(n) / norm)
    return AuxiliaryBlock(rows, seed, mode)


def factor_samples(
    system: CanonicalSystem,
    aux: AuxiliaryBlock,
    rc: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Assemble common and distinctive factor samples from canonical scores.

    Returns (c_factors (rc, n), d_factors_1 (r1, n), d_factors_2 (r2, n))
    with c^(l) = w_sum * (z1^(l) + z2^(l)) + w_im * z_im^(l) for l < rc and
    d_k^(l) = z_k^(l) - c^(l) there, d_k^(l) = z_k^(l) beyond rc.
    """
    r1, r2, n = system.r1, system.r2, system.n
    if rc > min(r1, r2):
        raise InputError(f"rc={rc} exceeds min(r1, r2)={min(r1, r2)}")
    if aux.rows != rc:
        raise InputError(f"auxiliary block has {aux.rows} rows, expected {rc}")
    if rc and aux.z_im.shape[1] != n:
        raise InputError("auxiliary block disagrees on the sample count")

    c_factors = np.zeros((rc, n))
    for ell in range(rc):
        w = pair_weights(system.rho[ell])
        c_factors[ell] = (
            w.w_sum * (system.z1[ell] + system.z2[ell]) + w.w_im * aux.z_im[ell]
        )
    d1 = system.z1.copy()
    d2 = system.z2.copy()
    d1[:rc] -= c_factors
    d2[:rc] -= c_factors
    return c_factors, d1, d2


def source_matrices(
    system: CanonicalSystem,
    c_factors: np.ndarray,
    rc: int,
    x1: SignalEstimate,
    x2: SignalEstimate,
) -> tuple[ViewMatrix, ViewMatrix, ViewMatrix, ViewMatrix]:
    """Common-source and distinctive-source matrices C_k = B_k[:, :rc] c, D_k = X_k - C_k."""
    c1_values = system.b1[:, :rc] @ c_factors
    c2_values = system.b2[:, :rc] @ c_factors
    d1_values = x1.xhat.values - c1_values
    d2_values = x2.xhat.values - c2_values
    names1, names2 = x1.xhat.names, x2.xhat.names
    return (
        ViewMatrix(c1_values, names=names1),
        ViewMatrix(c2_values, names=names2),
        ViewMatrix(d1_values, names=names1),
        ViewMatrix(d2_values, names=names2),
    )


def cov_common(b: np.ndarray, rho: np.ndarray, rc: int) -> CovEstimate:
    """Common-source covariance B[:, :rc] diag(rho[:rc]) B[:, :rc]^T."""
    if rc > b.shape[1]:
        raise InputError(f"rc={rc} exceeds the coefficient column count {b.shape[1]}")
    bc = b[:, :rc]
    mat = (bc * np.asarray(rho)[:rc]) @ bc.T
    mat = (mat + mat.T) / 2.0
    return CovEstimate(mat, rc)


def cov_distinct(
    cov_x: CovEstimate, cov_c: CovEstimate
) -> tuple[CovEstimate, int]:
    """Distinctive-source covariance cov(x) - cov(c).

    Negative diagonal entries produced by rounding are clipped to zero; the
    clip count is returned so callers can surface it (a large count signals
    rank misspecification).
    """
    if cov_x.matrix.shape != cov_c.matrix.shape:
        raise InputError("covariance estimates disagree on dimension")
    mat = cov_x.matrix - cov_c.matrix
    mat = (mat + mat.T) / 2.0
    diag = np.diag(mat).copy()
    clipped = int(np.count_nonzero(diag < 0.0))
    if clipped:
        np.fill_diagonal(mat, np.maximum(diag, 0.0))
    return CovEstimate(mat, cov_x.rank), clipped


def dcca_common_reference(
    z1_row: np.ndarray, z2_row: np.ndarray, rho: float
) -> tuple[np.ndarray, float]:
    """Common-factor samples as defined by the D-CCA method, for comparison.

    Returns the sample row (z1 + z2) * (1 - sqrt((1 - rho) / (1 + rho))) / 2
    (the zero row in the rho -> 0 limit) and the companion variance
    rho^2 / (1 + sqrt(1 - rho^2)), which never exceeds this package's
    common-factor variance rho.
    """
    rho = _check_rho(rho)
    var_dcca = rho**2 / (1.0 + np.sqrt(max(1.0 - rho**2, 0.0)))
    if rho == 0.0:
        return np.zeros_like(np.asarray(z1_row, dtype=float)), 0.0
    scale = (1.0 - np.sqrt((1.0 - rho) / (1.0 + rho))) / 2.0
    return scale * (np.asarray(z1_row) + np.asarray(z2_row)), float(var_dcca)


@dataclass(frozen=True)
class Decomposition:
    """Full two-view decomposition output."""

    c1: ViewMatrix
    c2: ViewMatrix
    d1: ViewMatrix
    d2: ViewMatrix
    c_factors: np.ndarray
    d_factors_1: np.ndarray
    d_factors_2: np.ndarray
    cov_c1: CovEstimate
    cov_c2: CovEstimate
    cov_d1: CovEstimate
    cov_d2: CovEstimate
    system: CanonicalSystem
    aux: AuxiliaryBlock
    rc: int
    diagnostics: dict = field(default_factory=dict)


def decompose(
    x1: SignalEstimate,
    x2: SignalEstimate,
    rc: int,
    seed: int = 0,
    aux_mode: str = "projected",
    system: CanonicalSystem | None = None,
    cov_x1: CovEstimate | None = None,
    cov_x2: CovEstimate | None = None,
) -> Decomposition:
    """Run the pairwise decomposition of two denoised signals.

    rc is capped at min(r1, r2) of the effective (post-shrinkage) ranks.
    """
    cov_x1 = cov_x1 if cov_x1 is not None else signal_covariance(x1)
    cov_x2 = cov_x2 if cov_x2 is not None else signal_covariance(x2)
    if system is None:
        system = canonical_system(x1, x2, cov_x1, cov_x2)
    if rc < 0:
        raise InputError("rc must be non-negative")
    rc_eff = min(rc, system.r1, system.r2)

    aux = generate_auxiliary(rc_eff, system.n, seed, aux_mode,
                             system.z1, system.z2)
    c_factors, d1f, d2f = factor_samples(system, aux, rc_eff)
    c1, c2, d1, d2 = source_matrices(system, c_factors, rc_eff, x1, x2)

    cov_c1 = cov_common(system.b1, system.rho, rc_eff)
    cov_c2 = cov_common(system.b2, system.rho, rc_eff)
    cov_d1, clipped1 = cov_distinct(cov_x1, cov_c1)
    cov_d2, clipped2 = cov_distinct(cov_x2, cov_c2)

    # Canonical pairs beyond rc stay undecomposed, so their contribution to
    # cov(d) enters with full unit variance: zero rho past rc in the check.
    _check_distinct_form(cov_d1, system.b1, _rho_to(system.rho, system.r1, rc_eff))
    _check_distinct_form(cov_d2, system.b2, _rho_to(system.rho, system.r2, rc_eff))

    diagnostics = {
        "negative_diag_clipped_1": clipped1,
        "negative_diag_clipped_2": clipped2,
        "rc_requested": rc,
        "rc_effective": rc_eff,
    }
    return Decomposition(
        c1=c1, c2=c2, d1=d1, d2=d2,
        c_factors=c_factors, d_factors_1=d1f, d_factors_2=d2f,
        cov_c1=cov_c1, cov_c2=cov_c2, cov_d1=cov_d1, cov_d2=cov_d2,
        system=system, aux=aux, rc=rc_eff, diagnostics=diagnostics,
    )


def _rho_to(rho: np.ndarray, r: int, rc: int) -> np.ndarray:
    out = np.zeros(r)
    out[:rc] = rho[:rc]
    return out


def _check_distinct_form(cov_d: CovEstimate, b: np.ndarray,
                         rho_padded: np.ndarray) -> None:
    """cov(d) must match its second form B diag(1 - rho) B^T."""
    alt = (b * (1.0 - rho_padded)) @ b.T
    scale = max(1.0, float(np.abs(alt).max()))
    if not np.allclose(cov_d.matrix, alt, atol=1e-8 * scale, rtol=0.0):
        raise NumericalError(
            "distinctive covariance disagrees with its coefficient form; "
            "the canonical system is inconsistent"
        )
