import numpy as np
import pytest
from numpy.testing import assert_allclose

from dcdlf import (
    FactorModelSpec,
    InputError,
    RankTriple,
    generate,
    implied_population_model,
    population_cca,
    recovery_metrics,
    run_decomposition,
)


def spec_100():
    return FactorModelSpec(p1=100, p2=100, ranks=RankTriple(3, 3, 2),
                           rho=(0.8, 0.5), noise_sd=0.5, seed=1)


def test_spec_validation():
    with pytest.raises(InputError, match="rho has"):
        FactorModelSpec(p1=5, p2=5, ranks=RankTriple(2, 2, 1), rho=(0.5, 0.2))
    with pytest.raises(InputError, match="descending"):
        FactorModelSpec(p1=5, p2=5, ranks=RankTriple(2, 2, 2), rho=(0.2, 0.5))
    with pytest.raises(InputError, match="\\(0, 1\\]"):
        FactorModelSpec(p1=5, p2=5, ranks=RankTriple(2, 2, 1), rho=(0.0,))
    with pytest.raises(InputError):
        FactorModelSpec(p1=1, p2=5, ranks=RankTriple(2, 2, 1), rho=(0.5,))


def test_generation_is_deterministic():
    spec = spec_100()
    a1, a2, _ = generate(spec, 50)
    b1, b2, _ = generate(spec, 50)
    assert a1.values.tobytes() == b1.values.tobytes()
    assert a2.values.tobytes() == b2.values.tobytes()


def test_truth_additivity_and_shapes():
    spec = spec_100()
    y1, y2, truth = generate(spec, 60)
    assert y1.values.shape == (100, 60)
    assert_allclose(truth.c1.values + truth.d1.values, truth.x1.values,
                    atol=1e-12)
    assert_allclose(truth.cov_c1 + truth.cov_d1,
                    truth.loadings1 @ truth.loadings1.T, atol=1e-10)


def test_noiseless_views_equal_signal():
    spec = FactorModelSpec(p1=10, p2=8, ranks=RankTriple(2, 2, 0), rho=(),
                           noise_sd=0.0, seed=3)
    y1, y2, truth = generate(spec, 40)
    assert_allclose(y1.values, truth.x1.values, atol=1e-14)
    result = run_decomposition(y1, y2, r1=2, r2=2, rc=0, seed=0)
    # Independent views: estimated correlations are mere sampling noise.
    assert np.abs(result.rho).max() < 0.5
    assert_allclose(result.decomposition.c1.values, 0.0, atol=1e-12)


def test_single_shared_factor_recovered():
    spec = FactorModelSpec(p1=10, p2=9, ranks=RankTriple(1, 1, 1), rho=(1.0,),
                           noise_sd=0.0, seed=4)
    y1, y2, _ = generate(spec, 80)
    result = run_decomposition(y1, y2, r1=1, r2=1, rc=1, seed=0)
    assert_allclose(result.rho, [1.0], atol=1e-8)


def test_latent_correlations_near_population_values():
    spec = FactorModelSpec(p1=100, p2=100, ranks=RankTriple(3, 3, 2),
                           rho=(0.8, 0.5), noise_sd=0.5, seed=5)
    _, _, truth = generate(spec, 1000)
    n = truth.z1.shape[1]
    for ell, rho in enumerate((0.8, 0.5)):
        sample = truth.z1[ell] @ truth.z2[ell] / n
        sample /= np.sqrt((truth.z1[ell] ** 2).mean()
                          * (truth.z2[ell] ** 2).mean())
        assert abs(sample - rho) < 0.08


def test_implied_model_has_spec_correlations():
    spec = FactorModelSpec(p1=12, p2=10, ranks=RankTriple(3, 3, 2),
                           rho=(0.7, 0.4), noise_sd=0.2, seed=6)
    _, _, truth = generate(spec, 30)
    cca = population_cca(implied_population_model(truth))
    assert_allclose(cca.rho[:2], [0.7, 0.4], atol=1e-10)
    assert_allclose(cca.rho[2:], 0.0, atol=1e-10)


def test_recovery_metrics_zero_on_truth():
    spec = FactorModelSpec(p1=8, p2=7, ranks=RankTriple(2, 2, 1), rho=(0.6,),
                           noise_sd=0.1, seed=7)
    _, _, truth = generate(spec, 40)
    metrics = recovery_metrics(
        truth, truth.x1.values, truth.x2.values, truth.cov_c1, truth.cov_c2,
        truth.cov_d1, truth.cov_d2, truth.rho)
    for value in metrics.values():
        assert value == 0.0


def test_recovery_metrics_zero_estimate_scores_one():
    spec = FactorModelSpec(p1=8, p2=7, ranks=RankTriple(2, 2, 1), rho=(0.6,),
                           noise_sd=0.1, seed=8)
    _, _, truth = generate(spec, 40)
    metrics = recovery_metrics(
        truth, np.zeros((8, 40)), truth.x2.values, truth.cov_c1,
        truth.cov_c2, truth.cov_d1, truth.cov_d2, truth.rho)
    assert metrics["x1_rel_error"] == 1.0
    assert metrics["x2_rel_error"] == 0.0


def test_error_decreases_with_sample_size():
    errors = {}
    for n in (200, 2000):
        per_seed = []
        for seed in range(3):
            spec = FactorModelSpec(p1=100, p2=100, ranks=RankTriple(3, 3, 2),
                                   rho=(0.8, 0.5), noise_sd=0.5, seed=seed)
            y1, y2, truth = generate(spec, n)
            result = run_decomposition(y1, y2, r1=3, r2=3, rc=2, seed=seed)
            dec = result.decomposition
            metrics = recovery_metrics(
                truth, result.x1.xhat.values, result.x2.xhat.values,
                dec.cov_c1.matrix, dec.cov_c2.matrix,
                dec.cov_d1.matrix, dec.cov_d2.matrix, result.rho)
            per_seed.append(metrics["cov_c1_rel_error"])
        errors[n] = float(np.median(per_seed))
    assert errors[2000] < errors[200]


def test_generation_rejects_infeasible_dimensions():
    spec = FactorModelSpec(p1=4, p2=4, ranks=RankTriple(2, 2, 1), rho=(0.5,),
                           noise_sd=0.1, seed=9)
    with pytest.raises(InputError, match="n\\*p - n\\*r - p\\*r"):
        generate(spec, 4)
