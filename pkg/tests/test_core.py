import numpy as np
import pytest
from numpy.testing import assert_allclose

from dcdlf import InputError, RankTriple, ViewMatrix, compact_svd, full_svd, validate_view_pair
from oracles import jacobi_svd


def test_compact_svd_identity():
    factors = compact_svd(np.eye(3), 3)
    assert_allclose(factors.singulars, [1.0, 1.0, 1.0])
    assert_allclose(factors.reconstruct(), np.eye(3), atol=1e-12)


def test_compact_svd_diagonal():
    factors = compact_svd(np.diag([3.0, 1.0]), 1)
    assert_allclose(factors.singulars, [3.0])
    assert_allclose(np.abs(factors.left[:, 0]), [1.0, 0.0], atol=1e-12)
    assert factors.left[0, 0] > 0  # sign convention anchors the largest entry


def test_compact_svd_matches_jacobi_oracle():
    rng = np.random.default_rng(42)
    m = rng.standard_normal((4, 6))
    u_ref, s_ref, vt_ref = jacobi_svd(m)

    factors = compact_svd(m, 2)
    assert_allclose(factors.singulars, s_ref[:2], atol=1e-10)
    for j in range(2):
        ref_u = u_ref[:, j]
        ref_v = vt_ref[j]
        anchor = np.argmax(np.abs(ref_u))
        if ref_u[anchor] < 0:
            ref_u = -ref_u
            ref_v = -ref_v
        assert_allclose(factors.left[:, j], ref_u, atol=1e-10)
        assert_allclose(factors.right[:, j], ref_v, atol=1e-10)


def test_compact_svd_is_deterministic():
    rng = np.random.default_rng(7)
    m = rng.standard_normal((8, 5))
    a = compact_svd(m, 4)
    b = compact_svd(m.copy(), 4)
    assert a.left.tobytes() == b.left.tobytes()
    assert a.singulars.tobytes() == b.singulars.tobytes()
    assert a.right.tobytes() == b.right.tobytes()


@pytest.mark.parametrize("shape,k", [((6, 4), 2), ((4, 6), 3), ((5, 5), 1)])
def test_compact_svd_tail_energy(shape, k):
    rng = np.random.default_rng(sum(shape) + k)
    m = rng.standard_normal(shape)
    factors = compact_svd(m, k)
    s_all = np.linalg.svd(m, compute_uv=False)
    residual = np.linalg.norm(m - factors.reconstruct()) ** 2
    tail = np.sum(s_all[k:] ** 2)
    assert_allclose(residual, tail, rtol=1e-8, atol=1e-12)


def test_compact_svd_sign_convention_property():
    rng = np.random.default_rng(3)
    for trial in range(20):
        m = rng.standard_normal((5, 7))
        factors = compact_svd(m, 4)
        for j in range(4):
            anchor = np.argmax(np.abs(factors.left[:, j]))
            assert factors.left[anchor, j] >= 0
        assert_allclose(factors.left.T @ factors.left, np.eye(4), atol=1e-10)
        assert_allclose(factors.right.T @ factors.right, np.eye(4), atol=1e-10)


def test_compact_svd_rejects_bad_inputs():
    with pytest.raises(InputError):
        compact_svd(np.eye(3), 4)
    with pytest.raises(InputError):
        compact_svd(np.array([[1.0, np.nan], [0.0, 1.0]]), 1)
    with pytest.raises(InputError):
        compact_svd(np.eye(3), 0)


def test_full_svd_shapes_and_reconstruction():
    rng = np.random.default_rng(11)
    m = rng.standard_normal((3, 5))
    u1, s, u2 = full_svd(m)
    assert u1.shape == (3, 3) and u2.shape == (5, 5)
    assert_allclose(u1 @ u1.T, np.eye(3), atol=1e-12)
    assert_allclose(u2 @ u2.T, np.eye(5), atol=1e-12)
    smat = np.zeros((3, 5))
    smat[:3, :3] = np.diag(s)
    assert_allclose(u1 @ smat @ u2.T, m, atol=1e-12)


def test_validate_view_pair_ok():
    y1, y2 = validate_view_pair(np.ones((5, 10)), np.zeros((7, 10)))
    assert y1.n == y2.n == 10
    assert (y1.p, y2.p) == (5, 7)


def test_validate_view_pair_sample_mismatch():
    with pytest.raises(InputError, match="sample-count mismatch"):
        validate_view_pair(np.ones((5, 10)), np.ones((7, 9)))


def test_validate_view_pair_reports_nan_location():
    bad = np.ones((5, 10))
    bad[2, 4] = np.nan
    with pytest.raises(InputError, match="row 2, column 4"):
        validate_view_pair(bad, np.ones((7, 10)))


def test_view_matrix_requires_two_samples():
    with pytest.raises(InputError):
        ViewMatrix(np.ones((3, 1)))


def test_view_matrix_is_immutable():
    view = ViewMatrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        view.values[0, 0] = 2.0


def test_rank_triple_invariants():
    triple = RankTriple(3, 2, 2)
    assert (triple.r1, triple.r2, triple.rc) == (3, 2, 2)
    with pytest.raises(InputError):
        RankTriple(3, 2, 3)
    with pytest.raises(InputError):
        RankTriple(-1, 2, 0)
    with pytest.raises(InputError):
        RankTriple(5, 5, 5).check_against(p=4, n=10, which=1)
