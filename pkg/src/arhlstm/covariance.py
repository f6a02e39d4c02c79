"""Empirical second-order operators and their regularized inverses."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from arhlstm.errors import (
    ConvergenceError,
    InsufficientDataError,
    SymmetryError,
    TruncationError,
)
from arhlstm.function_space import (
    COEFF,
    GRID,
    CurveDataset,
    FunctionSample,
    GridSpec,
    LinearOperatorMatrix,
)

# Eigenvalues below this fraction of the leading one are treated as zero.
EIGEN_FLOOR = 1e-12
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenpairs of a symmetric operator, eigenvalues descending.

    ``eigenvectors`` holds one eigenfunction per row, normalized in the
    inner product of the space the operator acts on.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    grid: Optional[GridSpec] = None

    @property
    def basis(self) -> str:
        return GRID if self.grid is not None else COEFF

    def __len__(self):
        return self.eigenvalues.shape[0]

    def functions(self) -> List[FunctionSample]:
        return [FunctionSample(v, self.grid) for v in self.eigenvectors]

    def max_admissible(self, floor: float = EIGEN_FLOOR) -> int:
        """Largest truncation level whose eigenvalues all clear the floor."""
        lam = self.eigenvalues
        if lam.size == 0 or lam[0] <= 0:
            return 0
        ok = lam >= floor * lam[0]
        return int(np.argmin(ok)) if not ok.all() else int(lam.size)

    def reconstruct(self) -> LinearOperatorMatrix:
        phi = self.eigenvectors
        return LinearOperatorMatrix((phi.T * self.eigenvalues) @ phi, self.basis)


def _basis_of(sample: CurveDataset) -> str:
    return GRID if sample.grid is not None else COEFF


def empirical_covariance(sample: CurveDataset, *, regressors_only: bool = False) -> LinearOperatorMatrix:
    """Covariance operator ``(1/n) sum_{i<n} X_i (x) X_i`` of a centered sample.

    The sum runs over the first n - 1 curves, the ones that have a
    successor.  ``regressors_only=True`` divides by n - 1 instead, giving the
    covariance of exactly the regressor block used in the lag-1 operator.
    """
    n = sample.n
    if n < 2:
        raise InsufficientDataError(f"need at least 2 curves, got {n}")
    X = sample.values[:-1]
    denom = n - 1 if regressors_only else n
    return LinearOperatorMatrix(X.T @ X / denom, _basis_of(sample))


def empirical_cross_covariance(sample: CurveDataset) -> LinearOperatorMatrix:
    """Lag-1 operator ``w -> (1/(n-1)) sum_{i<n} <X_i, w> X_{i+1}``."""
    n = sample.n
    if n < 2:
        raise InsufficientDataError(f"need at least 2 curves, got {n}")
    X = sample.values
    return LinearOperatorMatrix(X[1:].T @ X[:-1] / (n - 1), _basis_of(sample))


def _fix_signs(V: np.ndarray, tol: float) -> np.ndarray:
    # first coordinate with magnitude above tol made positive, per column
    for j in range(V.shape[1]):
        col = V[:, j]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size and col[idx[0]] < 0:
            V[:, j] = -col
    return V


def eigendecompose_symmetric(A: LinearOperatorMatrix, grid: Optional[GridSpec] = None) -> EigenSystem:
    """Eigenpairs of a self-adjoint operator.

    For a grid operator the eigenfunctions are scaled to unit L2 norm under
    the quadrature rule.  ``grid`` is attached to the result; it defaults to
    a grid matching the operator's size.
    """
    M = A.as_matrix()
    scale = max(np.abs(M).max(initial=0.0), np.finfo(float).tiny)
    asym = np.abs(M - M.T).max(initial=0.0)
    if asym > SYMMETRY_TOL * scale:
        raise SymmetryError(f"operator is not symmetric (max asymmetry {asym:.3e})")
    M = 0.5 * (M + M.T)
    try:
        lam, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc

    lam = lam[::-1].copy()
    V = _fix_signs(V[:, ::-1].copy(), tol=1e-10)

    # equal eigenvalues: order eigenvectors lexicographically, largest first
    tie_tol = 1e-12 * max(abs(lam[0]), 1e-300) if lam.size else 0.0
    start = 0
    while start < lam.size:
        stop = start + 1
        while stop < lam.size and abs(lam[stop] - lam[start]) <= tie_tol:
            stop += 1
        if stop - start > 1:
            block = V[:, start:stop]
            keys = np.round(block, 12)
            order = sorted(range(stop - start), key=lambda c: tuple(keys[:, c]), reverse=True)
            V[:, start:stop] = block[:, order]
        start = stop

    if A.basis == GRID:
        if grid is None:
            grid = GridSpec(A.dim)
        phi = V.T / np.sqrt(A.weight)
    else:
        grid = None
        phi = V.T
    return EigenSystem(lam, phi, grid)


def spectral_regularized_inverse(es: EigenSystem, k_n: int) -> LinearOperatorMatrix:
    """``sum_{i <= k_n} (1/lambda_i) phi_i (x) phi_i``."""
    k_n = int(k_n)
    admissible = es.max_admissible()
    if k_n < 1 or k_n > len(es):
        raise TruncationError(f"k_n={k_n} outside 1..{len(es)}", admissible)
    if k_n > admissible:
        raise TruncationError(
            f"eigenvalue {k_n} ({es.eigenvalues[k_n - 1]:.3e}) is below the floor", admissible
        )
    phi = es.eigenvectors[:k_n]
    return LinearOperatorMatrix((phi.T / es.eigenvalues[:k_n]) @ phi, es.basis)


def ridge_regularized_inverse(G: LinearOperatorMatrix, alpha: float) -> LinearOperatorMatrix:
    """``(G + alpha I)^-1`` for symmetric positive semi-definite ``G``."""
    if not alpha > 0:
        raise ValueError(f"ridge parameter must be positive, got {alpha}")
    es = eigendecompose_symmetric(G)
    V = es.eigenvectors.T * np.sqrt(G.weight)
    inv = (V / (es.eigenvalues + alpha)) @ V.T
    inv = 0.5 * (inv + inv.T)  # exact symmetry
    return LinearOperatorMatrix(inv / G.weight, G.basis)
