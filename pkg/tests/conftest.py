import numpy as np
import pytest

from dcdlf import CanonicalSystem, FactorModelSpec, RankTriple, generate


def orthonormal_score_rows(n: int, k: int, seed: int = 0) -> np.ndarray:
    """k rows of length n with exact sample orthonormality n^-1 Q Q^T = I."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return np.sqrt(n) * q.T


def exact_score_system(rho_values, n: int, seed: int = 0) -> CanonicalSystem:
    """A canonical system whose score rows have exactly the requested sample
    canonical correlations; coefficients are identity-like placeholders."""
    rho = np.asarray(rho_values, dtype=float)
    r = rho.shape[0]
    base = orthonormal_score_rows(n, 2 * r, seed)
    z1 = base[:r]
    z2 = rho[:, None] * z1 + np.sqrt(1.0 - rho**2)[:, None] * base[r:]
    eye = np.eye(r)
    return CanonicalSystem(rho=rho.copy(), z1=z1, z2=z2, b1=eye, b2=eye.copy(),
                           theta=np.diag(rho), u_theta1=np.eye(r),
                           u_theta2=np.eye(r), n=n)


@pytest.fixture
def small_noiseless_views():
    spec = FactorModelSpec(p1=12, p2=9, ranks=RankTriple(3, 3, 3),
                           rho=(0.9, 0.6, 0.3), noise_sd=0.0, seed=21)
    y1, y2, truth = generate(spec, 250)
    return y1, y2, truth


@pytest.fixture
def noisy_views():
    spec = FactorModelSpec(p1=20, p2=15, ranks=RankTriple(3, 3, 2),
                           rho=(0.8, 0.5), noise_sd=0.4, seed=5)
    y1, y2, truth = generate(spec, 500)
    return y1, y2, truth
