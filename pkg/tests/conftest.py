import numpy as np
import pytest

from arhlstm.function_space import CurveDataset, FunctionSample, GridSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_sample(rng, T, grid=True):
    g = GridSpec(T) if grid else None
    return FunctionSample(rng.standard_normal(T), g)


def random_dataset(rng, n, T, grid=True, centered=True):
    X = rng.standard_normal((n, T))
    if centered:
        X -= X.mean(axis=0)
    return CurveDataset(X, GridSpec(T) if grid else None)


def jacobi_eigenvalues(A, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi rotations; independent of LAPACK."""
    A = np.array(A, dtype=float, copy=True)
    n = A.shape[0]
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A**2) - np.sum(np.diag(A) ** 2), 0.0))
        if off < tol * max(1.0, np.abs(A).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t**2 + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))[::-1]


# ------------------------------------------------------------ acceptance log

ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
