import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planarkernels.errors import SingularMatrixError
from planarkernels.geometry import builtin_domain, sample_boundary
from planarkernels.numerics import (
    as_dense,
    inverse,
    least_squares,
    min_singular_direction,
    orthonormalize,
    solve,
)


def test_solve_identity():
    assert np.allclose(solve(np.eye(3), np.array([1.0, 2.0, 3.0])), [1, 2, 3])


def test_solve_diagonal():
    assert np.allclose(solve(np.array([[2.0, 0], [0, 4.0]]), np.array([2.0, 4.0])), [1, 1])


def test_solve_random_well_conditioned():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50)) + 20 * np.eye(50)
    x = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    got = solve(A, A @ x)
    assert np.linalg.norm(got - x) / np.linalg.norm(x) < 1e-10
    assert np.linalg.norm(A @ got - A @ x) / np.linalg.norm(A @ x) < 1e-10


def test_singular_matrix_reports_pivot():
    with pytest.raises(SingularMatrixError) as info:
        solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))
    assert info.value.exit_code == 3


def test_inverse_is_two_sided():
    A = np.array([[4.0, 1j], [-1j, 3.0]])
    B = inverse(A)
    assert np.allclose(A @ B, np.eye(2), atol=1e-14)
    assert np.allclose(B @ A, np.eye(2), atol=1e-14)


def test_dense_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_dense(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        as_dense(np.ones(3))


def euclid(u, v):
    return np.vdot(v, u)


def test_orthonormal_pair_unchanged():
    V = np.eye(4)[:, :2].astype(complex)
    o = orthonormalize(V, euclid)
    assert np.allclose(o.vectors, V)
    assert np.allclose(o.transform, np.eye(2))
    assert o.dropped == ()


def test_dependent_vector_dropped():
    v = np.array([1.0, 2.0, 3.0], dtype=complex)
    o = orthonormalize([v, 2 * v], euclid)
    assert o.kept == (0,) and o.dropped == (1,)


def test_empty_result_allowed():
    o = orthonormalize([np.zeros(3)], euclid)
    assert len(o) == 0


def test_drop_tol_must_be_positive():
    with pytest.raises(ValueError):
        orthonormalize([np.ones(2)], euclid, drop_tol=0.0)


def test_weighted_gram_is_identity():
    g = sample_boundary(builtin_domain("ellipse", 0.6), 64)
    rng = np.random.default_rng(0)
    V = rng.standard_normal((g.N, 20)) + 1j * rng.standard_normal((g.N, 20))
    wts = (2 + np.cos(g.t)) * g.weights

    def inner(u, v):
        return np.vdot(v, u * wts)

    o = orthonormalize(V, inner)
    Q = o.vectors
    G = Q.conj().T @ (Q * wts[:, None])
    assert np.abs(G - np.eye(Q.shape[1])).max() < 1e-10
    assert np.allclose(V @ o.transform, Q, atol=1e-10)
    # the change of basis is upper triangular
    assert np.allclose(np.tril(o.transform, -1), 0)
    again = orthonormalize(Q, inner)
    assert np.abs(again.vectors - Q).max() < 1e-12


def test_min_singular_rank_one():
    val, vec = min_singular_direction(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert val < 1e-12
    assert abs(abs(vec[1]) - 1) < 1e-12


def test_min_singular_diagonal():
    A = np.zeros((5, 3))
    A[0, 0], A[1, 1], A[2, 2] = 3, 2, 1e-8
    val, vec = min_singular_direction(A)
    assert abs(val - 1e-8) < 1e-11
    assert abs(abs(vec[2]) - 1) < 1e-9


def test_min_singular_planted_null_direction():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((40, 10)) + 1j * rng.standard_normal((40, 10))
    v = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    v /= np.linalg.norm(v)
    A = A - np.outer(A @ v, v.conj())
    val, vec = min_singular_direction(A)
    angle = np.sqrt(max(0.0, 1 - abs(np.vdot(v, vec)) ** 2))
    assert val < 1e-12
    assert angle < 1e-4


def test_min_singular_needs_tall_matrix():
    with pytest.raises(ValueError):
        min_singular_direction(np.ones((2, 3)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_min_singular_is_lower_bound(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((12, 5)) + 1j * rng.standard_normal((12, 5))
    val, vec = min_singular_direction(A)
    exact = np.linalg.svd(A, compute_uv=False)[-1]
    assert abs(val - exact) <= 1e-3 * exact
    U = rng.standard_normal((100, 5)) + 1j * rng.standard_normal((100, 5))
    U /= np.linalg.norm(U, axis=1)[:, None]
    assert np.all(val <= np.linalg.norm(U @ A.T, axis=1) * (1 + 1e-12))


def test_least_squares_consistent_system():
    A = np.array([[1.0, 0], [0, 1], [1, 1]])
    x, rel = least_squares(A, A @ np.array([2.0, -1.0]))
    assert np.allclose(x, [2, -1]) and rel < 1e-14
