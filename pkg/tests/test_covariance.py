import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arhlstm.covariance import (
    EigenSystem,
    eigendecompose_symmetric,
    empirical_covariance,
    empirical_cross_covariance,
    ridge_regularized_inverse,
    spectral_regularized_inverse,
)
from arhlstm.errors import InsufficientDataError, SymmetryError, TruncationError
from arhlstm.function_space import (
    COEFF,
    CurveDataset,
    FunctionSample,
    GridSpec,
    LinearOperatorMatrix,
    apply_operator,
    compose,
    inner_product,
    rank_one,
)

from conftest import jacobi_eigenvalues, random_dataset, random_sample


def naive_covariance(X, n_terms, denom):
    T = X.shape[1]
    C = np.zeros((T, T))
    for i in range(n_terms):
        for j in range(T):
            for k in range(T):
                C[j, k] += X[i, j] * X[i, k]
    return C / denom


def naive_cross(X):
    n, T = X.shape
    D = np.zeros((T, T))
    for i in range(n - 1):
        for j in range(T):
            for k in range(T):
                D[j, k] += X[i + 1, j] * X[i, k]
    return D / (n - 1)


def test_covariance_two_identical_curves(rng):
    c = random_sample(rng, 6)
    ds = CurveDataset(np.vstack([c.values, c.values]), c.grid)
    expected = rank_one(c, c).entries / 2
    np.testing.assert_allclose(empirical_covariance(ds).entries, expected, rtol=1e-15)


def test_covariance_of_zeros():
    ds = CurveDataset(np.zeros((4, 5)), GridSpec(5))
    assert not empirical_covariance(ds).entries.any()


def test_covariance_matches_naive_loop(rng):
    ds = random_dataset(rng, 10, 6)
    np.testing.assert_allclose(empirical_covariance(ds).entries, naive_covariance(ds.values, 9, 10), atol=1e-12)
    np.testing.assert_allclose(
        empirical_covariance(ds, regressors_only=True).entries, naive_covariance(ds.values, 9, 9), atol=1e-12
    )


def test_covariance_needs_two_curves():
    with pytest.raises(InsufficientDataError):
        empirical_covariance(CurveDataset(np.ones((1, 4)), GridSpec(4)))
    with pytest.raises(InsufficientDataError):
        empirical_cross_covariance(CurveDataset(np.ones((1, 4)), GridSpec(4)))


def test_cross_covariance_two_curves(rng):
    a, b = random_sample(rng, 6), random_sample(rng, 6)
    ds = CurveDataset(np.vstack([a.values, b.values]), a.grid)
    np.testing.assert_allclose(empirical_cross_covariance(ds).entries, rank_one(a, b).entries, rtol=1e-15)


def test_cross_covariance_zero_successors(rng):
    X = np.zeros((5, 4))
    X[0] = rng.standard_normal(4)
    assert not empirical_cross_covariance(CurveDataset(X, GridSpec(4))).entries.any()


def test_cross_covariance_matches_naive_loop(rng):
    ds = random_dataset(rng, 10, 6)
    np.testing.assert_allclose(empirical_cross_covariance(ds).entries, naive_cross(ds.values), atol=1e-12)


def test_cross_covariance_action(rng):
    ds = random_dataset(rng, 7, 5)
    w = random_sample(rng, 5)
    expected = sum(inner_product(ds[i], w) * ds.values[i + 1] for i in range(6)) / 6
    np.testing.assert_allclose(apply_operator(empirical_cross_covariance(ds), w).values, expected, atol=1e-12)


def test_covariance_psd_on_random_samples():
    r = np.random.default_rng(7)
    for _ in range(100):
        ds = random_dataset(r, int(r.integers(2, 12)), 6)
        lam = np.linalg.eigvalsh(empirical_covariance(ds).as_matrix())
        assert lam.min() >= -1e-10 * max(lam.max(), 1e-300)


def test_cross_covariance_adjoint(rng):
    ds = random_dataset(rng, 9, 6)
    D = empirical_cross_covariance(ds)
    for _ in range(10):
        w, v = random_sample(rng, 6), random_sample(rng, 6)
        lhs = inner_product(apply_operator(D, w), v)
        rhs = inner_product(w, apply_operator(D.transpose(), v))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_eigen_scaled_identity():
    es = eigendecompose_symmetric(LinearOperatorMatrix(3.0 * np.eye(4), COEFF))
    np.testing.assert_allclose(es.eigenvalues, 3.0)
    np.testing.assert_allclose(es.eigenvectors @ es.eigenvectors.T, np.eye(4), atol=1e-12)


def test_eigen_rank_one_grid(rng):
    T = 8
    u = random_sample(rng, T)
    u = u * (1 / u.norm())
    es = eigendecompose_symmetric(rank_one(u, u))
    assert es.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(es.eigenvalues[1:], 0, atol=1e-12)
    phi = es.functions()[0]
    assert abs(abs(inner_product(phi, u)) - 1) < 1e-10
    assert phi.norm() == pytest.approx(1.0, abs=1e-12)


def test_eigen_random_5x5_against_jacobi(rng):
    A = rng.standard_normal((5, 5))
    A = A + A.T
    es = eigendecompose_symmetric(LinearOperatorMatrix(A, COEFF))
    np.testing.assert_allclose(es.eigenvalues, jacobi_eigenvalues(A), atol=1e-8)
    # characteristic polynomial oracle
    roots = np.sort(np.roots(np.poly(A)).real)[::-1]
    np.testing.assert_allclose(es.eigenvalues, roots, atol=1e-8)


def test_eigen_grid_operator_relation(rng):
    ds = random_dataset(rng, 12, 7)
    G = empirical_covariance(ds)
    es = eigendecompose_symmetric(G)
    lam1 = es.eigenvalues[0]
    assert np.all(np.diff(es.eigenvalues) <= 1e-15)
    for lam, phi in zip(es.eigenvalues, es.functions()):
        np.testing.assert_allclose(apply_operator(G, phi).values, lam * phi.values, atol=1e-8 * lam1)
        assert phi.norm() == pytest.approx(1.0, abs=1e-10)
        first = phi.values[np.abs(phi.values) > 1e-10][0]
        assert first > 0


def test_eigen_rejects_asymmetric():
    with pytest.raises(SymmetryError):
        eigendecompose_symmetric(LinearOperatorMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]), COEFF))


def test_spectral_inverse_identity():
    es = eigendecompose_symmetric(LinearOperatorMatrix(2.5 * np.eye(4), COEFF))
    np.testing.assert_allclose(spectral_regularized_inverse(es, 4).entries, np.eye(4) / 2.5, atol=1e-14)


def test_spectral_inverse_one_term():
    phi = np.array([[0.6, 0.8], [-0.8, 0.6]])
    es = EigenSystem(np.array([4.0, 1.0]), phi)
    np.testing.assert_allclose(spectral_regularized_inverse(es, 1).entries, np.outer(phi[0], phi[0]) / 4, atol=1e-15)


def test_spectral_inverse_full_rank(rng):
    B = rng.standard_normal((6, 6))
    A = LinearOperatorMatrix(B @ B.T + 0.1 * np.eye(6), COEFF)
    inv = spectral_regularized_inverse(eigendecompose_symmetric(A), 6)
    np.testing.assert_allclose(inv.entries @ A.entries, np.eye(6), atol=1e-8)


def test_spectral_inverse_grid_full_rank(rng):
    ds = random_dataset(rng, 20, 6, centered=False)
    G = empirical_covariance(ds)
    inv = spectral_regularized_inverse(eigendecompose_symmetric(G), 6)
    prod = compose(inv, G)
    u = random_sample(rng, 6)
    np.testing.assert_allclose(apply_operator(prod, u).values, u.values, atol=1e-8)


def test_spectral_inverse_rank_and_projection(rng):
    ds = random_dataset(rng, 15, 8)
    G = empirical_covariance(ds)
    es = eigendecompose_symmetric(G)
    inv = spectral_regularized_inverse(es, 3)
    assert np.linalg.matrix_rank(inv.entries, tol=1e-8 * np.abs(inv.entries).max()) == 3
    np.testing.assert_allclose(inv.entries, inv.entries.T, atol=1e-12 * np.abs(inv.entries).max())
    for phi in es.functions()[:3]:
        back = apply_operator(inv, apply_operator(G, phi))
        np.testing.assert_allclose(back.values, phi.values, atol=1e-8)


def test_spectral_inverse_below_floor():
    es = EigenSystem(np.array([1.0, 1e-14, 0.0]), np.eye(3))
    with pytest.raises(TruncationError) as info:
        spectral_regularized_inverse(es, 2)
    assert info.value.max_admissible == 1
    with pytest.raises(TruncationError):
        spectral_regularized_inverse(es, 4)


def test_ridge_examples(rng):
    np.testing.assert_allclose(
        ridge_regularized_inverse(LinearOperatorMatrix(np.zeros((3, 3)), COEFF), 2.0).entries, np.eye(3) / 2, atol=1e-15
    )
    np.testing.assert_allclose(
        ridge_regularized_inverse(LinearOperatorMatrix(3 * np.eye(3), COEFF), 0.5).entries, np.eye(3) / 3.5, atol=1e-15
    )
    B = rng.standard_normal((6, 6))
    G = LinearOperatorMatrix(B @ B.T, COEFF)
    R = ridge_regularized_inverse(G, 0.1)
    np.testing.assert_allclose((G.entries + 0.1 * np.eye(6)) @ R.entries, np.eye(6), atol=1e-10)
    assert np.array_equal(R.entries, R.entries.T)
    with pytest.raises(ValueError):
        ridge_regularized_inverse(G, 0.0)


def test_ridge_grid_operator(rng):
    ds = random_dataset(rng, 10, 6)
    G = empirical_covariance(ds)
    R = ridge_regularized_inverse(G, 0.3)
    u = random_sample(rng, 6)
    lhs = apply_operator(G, apply_operator(R, u)).values + 0.3 * apply_operator(R, u).values
    np.testing.assert_allclose(lhs, u.values, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_spectral_inverse_inverts_on_range(seed):
    r = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(r.standard_normal((6, 6)))
    lam = np.sort(r.uniform(0.5, 5.0, 4))[::-1] + np.arange(4)[::-1] * 0.1
    A = LinearOperatorMatrix((Q[:, :4] * lam) @ Q[:, :4].T, COEFF)
    es = eigendecompose_symmetric(A)
    inv = spectral_regularized_inverse(es, 4)
    P = Q[:, :4] @ Q[:, :4].T
    np.testing.assert_allclose(inv.entries @ A.entries, P, atol=1e-8)
