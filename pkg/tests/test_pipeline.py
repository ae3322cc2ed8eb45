import numpy as np
import pytest
from numpy.testing import assert_allclose

from dcdlf import (
    ConfigError,
    NumericalError,
    ViewMatrix,
    choose_ranks,
    eigengap_rank,
    run_decomposition,
    run_invariant_checks,
)
from conftest import orthonormal_score_rows
from test_denoise import matrix_with_singulars


def exact_correlation_views(rho_values, n, p1, p2, seed=0):
    """Views whose sample canonical correlations equal rho_values exactly."""
    rho = np.asarray(rho_values, dtype=float)
    r = rho.shape[0]
    base = orthonormal_score_rows(n, 2 * r, seed)
    z1 = base[:r]
    z2 = rho[:, None] * z1 + np.sqrt(1.0 - rho**2)[:, None] * base[r:]
    rng = np.random.default_rng(seed + 1)
    b1 = rng.standard_normal((p1, r))
    b2 = rng.standard_normal((p2, r))
    return ViewMatrix(b1 @ z1), ViewMatrix(b2 @ z2)


def test_explicit_ranks_pass_through():
    y1, y2 = exact_correlation_views([0.9, 0.4], 60, 8, 7, seed=1)
    ranks = choose_ranks(y1, y2, r1=2, r2=2, rc=1)
    assert (ranks.r1, ranks.r2, ranks.rc) == (2, 2, 1)


def test_eigengap_picks_dominant_ratio():
    # Squared ratios: (100/81, 81/1, ...) -> the gap after the second value.
    y = ViewMatrix(matrix_with_singulars(5, 12, [10.0, 9.0, 1.0, 0.9, 0.5],
                                         seed=3))
    assert eigengap_rank(y) == 2


def test_eigengap_rejects_flat_spectrum():
    n = 12
    rows = orthonormal_score_rows(n, 4, seed=4)
    with pytest.raises(NumericalError, match="flat spectrum"):
        eigengap_rank(ViewMatrix(rows))
    with pytest.raises(NumericalError, match="degenerate"):
        eigengap_rank(ViewMatrix(np.zeros((4, 12))))


def test_rho_cutoff_counts_strong_correlations():
    y1, y2 = exact_correlation_views([0.9, 0.4, 0.01], 80, 9, 8, seed=5)
    ranks = choose_ranks(y1, y2, r1=3, r2=3, rc_rule="rho_cutoff",
                         rho_cutoff=0.05)
    assert ranks.rc == 2


def test_rho_cutoff_full_pipeline():
    y1, y2 = exact_correlation_views([0.9, 0.4, 0.01], 80, 9, 8, seed=6)
    result = run_decomposition(y1, y2, r1=3, r2=3, rc_rule="rho_cutoff",
                               rho_cutoff=0.05, seed=2)
    assert result.ranks.rc == 2
    assert result.decomposition.c_factors.shape == (2, 80)


def test_config_validation():
    y1, y2 = exact_correlation_views([0.5], 30, 4, 4, seed=7)
    with pytest.raises(ConfigError, match="requires both r1 and r2"):
        run_decomposition(y1, y2, rc=1)
    with pytest.raises(ConfigError, match="requires rc"):
        run_decomposition(y1, y2, r1=1, r2=1)
    with pytest.raises(ConfigError, match="rho_cutoff"):
        run_decomposition(y1, y2, r1=1, r2=1, rc=1, rho_cutoff=1.5)
    with pytest.raises(ConfigError, match="rank_rule"):
        run_decomposition(y1, y2, r1=1, r2=1, rc=1, rank_rule="auto")


def test_pipeline_result_contents(noisy_views):
    y1, y2, _ = noisy_views
    result = run_decomposition(y1, y2, r1=3, r2=3, rc=2, seed=9)
    assert result.rho.shape == (3,)
    assert result.decomposition.c1.values.shape == y1.values.shape
    assert result.pve1.variable_pve_c.shape == (y1.p,)
    assert result.effective_ranks.rc == 2
    assert result.version


def test_invariant_checks_pass_on_projected_run(small_noiseless_views):
    y1, y2, _ = small_noiseless_views
    result = run_decomposition(y1, y2, r1=3, r2=3, rc=3, seed=3)
    dec = result.decomposition
    checks = run_invariant_checks(
        xhat1=result.x1.xhat.values, xhat2=result.x2.xhat.values,
        chat1=dec.c1.values, chat2=dec.c2.values,
        dhat1=dec.d1.values, dhat2=dec.d2.values,
        cov_c1=dec.cov_c1.matrix, cov_c2=dec.cov_c2.matrix,
        cov_d1=dec.cov_d1.matrix, cov_d2=dec.cov_d2.matrix,
        c_factors=dec.c_factors, d_factors_1=dec.d_factors_1,
        d_factors_2=dec.d_factors_2, rho=result.rho,
        pve1_c=result.pve1.variable_pve_c, pve1_d=result.pve1.variable_pve_d,
        pve2_c=result.pve2.variable_pve_c, pve2_d=result.pve2.variable_pve_d,
        aux_mode="projected", rc=dec.rc,
    )
    assert all(c.status == "pass" for c in checks)


def test_invariant_checks_flag_corrupted_artifacts(small_noiseless_views):
    y1, y2, _ = small_noiseless_views
    result = run_decomposition(y1, y2, r1=3, r2=3, rc=3, seed=3)
    dec = result.decomposition
    corrupted = dec.c1.values.copy()
    corrupted[0, 0] += 1.0
    checks = run_invariant_checks(
        xhat1=result.x1.xhat.values, xhat2=result.x2.xhat.values,
        chat1=corrupted, chat2=dec.c2.values,
        dhat1=dec.d1.values, dhat2=dec.d2.values,
        cov_c1=dec.cov_c1.matrix, cov_c2=dec.cov_c2.matrix,
        cov_d1=dec.cov_d1.matrix, cov_d2=dec.cov_d2.matrix,
        c_factors=dec.c_factors, d_factors_1=dec.d_factors_1,
        d_factors_2=dec.d_factors_2, rho=result.rho,
        pve1_c=result.pve1.variable_pve_c, pve1_d=result.pve1.variable_pve_d,
        pve2_c=result.pve2.variable_pve_c, pve2_d=result.pve2.variable_pve_d,
        aux_mode="projected", rc=dec.rc,
    )
    by_name = {c.name: c for c in checks}
    assert by_name["matrix_additivity_view1"].status == "fail"
    assert by_name["matrix_additivity_view2"].status == "pass"


def test_raw_mode_marks_factor_check_informational(noisy_views):
    y1, y2, _ = noisy_views
    result = run_decomposition(y1, y2, r1=3, r2=3, rc=2, seed=1,
                               aux_mode="raw")
    dec = result.decomposition
    checks = run_invariant_checks(
        xhat1=result.x1.xhat.values, xhat2=result.x2.xhat.values,
        chat1=dec.c1.values, chat2=dec.c2.values,
        dhat1=dec.d1.values, dhat2=dec.d2.values,
        cov_c1=dec.cov_c1.matrix, cov_c2=dec.cov_c2.matrix,
        cov_d1=dec.cov_d1.matrix, cov_d2=dec.cov_d2.matrix,
        c_factors=dec.c_factors, d_factors_1=dec.d_factors_1,
        d_factors_2=dec.d_factors_2, rho=result.rho,
        pve1_c=result.pve1.variable_pve_c, pve1_d=result.pve1.variable_pve_d,
        pve2_c=result.pve2.variable_pve_c, pve2_d=result.pve2.variable_pve_d,
        aux_mode="raw", rc=dec.rc,
    )
    by_name = {c.name: c for c in checks}
    assert by_name["factor_tri_orthogonality"].status == "info"
    assert by_name["matrix_additivity_view1"].status == "pass"
