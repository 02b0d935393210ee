"""Contracts of the dense linear-algebra layer."""

import numpy as np
import pytest

from fletcher_penalty import kernel_basis, pinv_apply, svd, sym_eig_min
from fletcher_penalty.linalg import default_rank_tol


def test_svd_identity():
    res = svd(np.eye(3))
    np.testing.assert_allclose(res.s, [1.0, 1.0, 1.0], atol=0)


def test_svd_diagonal():
    res = svd(np.diag([3.0, 0.0]))
    np.testing.assert_allclose(res.s, [3.0, 0.0], atol=0)


def test_svd_reconstruction_random():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((5, 3))
    res = svd(a)
    sigma = np.zeros((5, 3))
    sigma[:3, :3] = np.diag(res.s)
    err = np.linalg.norm(a - res.u @ sigma @ res.vt)
    assert err <= 1e-10 * (1.0 + np.linalg.norm(a))
    assert np.all(np.diff(res.s) <= 0)
    np.testing.assert_allclose(res.u.T @ res.u, np.eye(5), atol=1e-12)
    np.testing.assert_allclose(res.vt @ res.vt.T, np.eye(3), atol=1e-12)


def test_svd_rejects_nonfinite():
    with pytest.raises(ValueError):
        svd(np.array([[np.nan, 1.0], [0.0, 1.0]]))


def test_pinv_identity():
    np.testing.assert_allclose(pinv_apply(np.eye(2), np.array([1.0, 2.0])), [1.0, 2.0])


def test_pinv_truncates_null_direction():
    a = np.array([[2.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(pinv_apply(a, np.array([4.0, 1.0]), rank_tol=1e-12), [2.0, 0.0])


def test_pinv_projection_oracle():
    # A (A^+ b) must be the orthogonal projection of b onto range(A).
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 6))
    b = rng.standard_normal(4)
    u = np.linalg.svd(a)[0]
    proj = u @ (u.T @ b)
    np.testing.assert_allclose(a @ pinv_apply(a, b), proj, atol=1e-9)


def test_pinv_roundtrip_full_rank():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((3, 7))
    q = kernel_basis(a)
    v = rng.standard_normal(7)
    v -= q @ (q.T @ v)  # orthogonal to ker A
    out = pinv_apply(a, a @ v)
    assert np.linalg.norm(out - v) <= 1e-9 * np.linalg.norm(v)


def test_sym_eig_min_diagonal():
    val, vec = sym_eig_min(np.diag([-1.0, 2.0, 5.0]))
    assert val == pytest.approx(-1.0, abs=0)
    np.testing.assert_allclose(np.abs(vec), [1.0, 0.0, 0.0], atol=1e-14)


def test_sym_eig_min_identity():
    val, vec = sym_eig_min(np.eye(3))
    assert val == pytest.approx(1.0, abs=1e-14)
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)


def test_sym_eig_min_full_spectrum_oracle():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((6, 6))
    a = 0.5 * (a + a.T)
    val, vec = sym_eig_min(a)
    w = np.linalg.eigvalsh(a)
    assert abs(val - w[0]) <= 1e-10
    # residual contract
    assert np.linalg.norm(a @ vec - val * vec) <= 1e-9 * (1.0 + np.linalg.norm(a))


def test_sym_eig_min_symmetrizes():
    a = np.array([[1.0, 1.0], [0.0, 1.0]])
    val, _ = sym_eig_min(a)
    assert val == pytest.approx(0.5, abs=1e-12)


def test_kernel_basis_single_row():
    q = kernel_basis(np.array([[1.0, 0.0, 0.0]]))
    assert q.shape == (3, 2)
    np.testing.assert_allclose(q.T @ q, np.eye(2), atol=1e-12)
    assert np.linalg.norm(q[0]) <= 1e-12


def test_kernel_basis_sphere_tangent():
    rng = np.random.default_rng(1)
    w = rng.standard_normal(6)
    w /= np.linalg.norm(w)
    q = kernel_basis(2.0 * w.reshape(1, 6))
    assert q.shape == (6, 5)
    assert np.linalg.norm(q.T @ w) <= 1e-12


def test_kernel_basis_random_full_rank():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((3, 7))
    q = kernel_basis(a)
    assert q.shape == (7, 4)
    assert np.linalg.norm(a @ q) <= 1e-10
    np.testing.assert_allclose(q.T @ q, np.eye(4), atol=1e-12)


def test_kernel_basis_orthogonality_bound():
    rng = np.random.default_rng(9)
    for _ in range(10):
        a = rng.standard_normal((4, 9))
        tol = default_rank_tol(4, 9)
        q = kernel_basis(a, tol)
        s1 = np.linalg.svd(a, compute_uv=False)[0]
        assert np.linalg.norm(a @ q) <= tol * s1 * np.sqrt(q.shape[1])
        np.testing.assert_allclose(q.T @ q, np.eye(q.shape[1]), atol=1e-12)


def test_kernel_basis_rejects_tall():
    with pytest.raises(ValueError):
        kernel_basis(np.zeros((4, 2)))


def test_kernel_basis_zero_matrix_full_kernel():
    q = kernel_basis(np.zeros((2, 4)))
    assert q.shape == (4, 4)


def test_bitwise_determinism():
    rng = np.random.default_rng(13)
    a = rng.standard_normal((5, 8))
    r1, r2 = svd(a), svd(a)
    assert np.array_equal(r1.u, r2.u) and np.array_equal(r1.s, r2.s) and np.array_equal(r1.vt, r2.vt)
    sym = a[:, :5] + a[:, :5].T
    assert sym_eig_min(sym)[0] == sym_eig_min(sym)[0]
    v1, v2 = sym_eig_min(sym)[1], sym_eig_min(sym)[1]
    assert np.array_equal(v1, v2)
    b = rng.standard_normal(8)
    assert np.array_equal(pinv_apply(a.T, b), pinv_apply(a.T, b))
    assert np.array_equal(kernel_basis(a), kernel_basis(a))
