"""Discretized L2[0, 1] primitives.

Curves live on the uniform grid t_j = j / T, j = 0..T-1, and inner products
use the rectangle rule with weight 1/T.  A sample can also be a coefficient
vector in an orthonormal basis (``grid is None``); there the inner product is
the plain dot product.

Grid-basis operators keep the quadrature weight out of their entries:
``(A u)(t_j) = (1/T) * sum_k A[j, k] u(t_k)``.  With that convention the
covariance matrix of a sample is the textbook ``X.T @ X / n`` and the
operator identity has entries ``T * I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from arhlstm.errors import BasisError, DimensionError

GRID = "grid"
COEFF = "fourier_coeff"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``num_points`` nodes on [0, 1)."""

    num_points: int

    def __post_init__(self):
        if int(self.num_points) != self.num_points or self.num_points < 2:
            raise DimensionError(f"grid needs at least 2 points, got {self.num_points}")

    @property
    def step(self) -> float:
        return 1.0 / self.num_points

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.num_points) / self.num_points


@dataclass(frozen=True, eq=False)
class FunctionSample:
    values: np.ndarray
    grid: Optional[GridSpec] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise DimensionError(f"a sample is one-dimensional, got shape {v.shape}")
        if self.grid is not None and v.shape[0] != self.grid.num_points:
            raise DimensionError(
                f"{v.shape[0]} values on a grid of {self.grid.num_points} points"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("sample contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def basis(self) -> str:
        return GRID if self.grid is not None else COEFF

    @property
    def weight(self) -> float:
        return self.grid.step if self.grid is not None else 1.0

    def __len__(self):
        return self.values.shape[0]

    def __add__(self, other: FunctionSample) -> FunctionSample:
        _check_same_space(self, other)
        return FunctionSample(self.values + other.values, self.grid)

    def __sub__(self, other: FunctionSample) -> FunctionSample:
        _check_same_space(self, other)
        return FunctionSample(self.values - other.values, self.grid)

    def __mul__(self, scalar: float) -> FunctionSample:
        return FunctionSample(self.values * float(scalar), self.grid)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self)))


@dataclass(frozen=True, eq=False)
class LinearOperatorMatrix:
    entries: np.ndarray
    basis: str = GRID

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"operator matrix must be square, got shape {a.shape}")
        if self.basis not in (GRID, COEFF):
            raise BasisError(f"unknown basis tag {self.basis!r}")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def weight(self) -> float:
        """Quadrature weight applied when the operator acts on a vector."""
        return 1.0 / self.dim if self.basis == GRID else 1.0

    def as_matrix(self) -> np.ndarray:
        """Plain matrix of the action on value vectors."""
        return self.weight * self.entries

    def transpose(self) -> LinearOperatorMatrix:
        return LinearOperatorMatrix(self.entries.T.copy(), self.basis)


@dataclass(frozen=True, eq=False)
class Normalization:
    source_min: float
    source_max: float
    low: float = 0.01
    high: float = 1.0

    def forward(self, x):
        scale = (self.high - self.low) / (self.source_max - self.source_min)
        return self.low + scale * (np.asarray(x, dtype=float) - self.source_min)

    def inverse(self, y):
        scale = (self.source_max - self.source_min) / (self.high - self.low)
        return self.source_min + scale * (np.asarray(y, dtype=float) - self.low)


@dataclass(frozen=True, eq=False)
class CurveDataset:
    """Ordered curves stored row-wise in an ``(n, T)`` array."""

    values: np.ndarray
    grid: Optional[GridSpec] = None
    normalization: Optional[Normalization] = None
    labels: Optional[tuple] = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1 and v.size == 0:
            v = v.reshape(0, self.grid.num_points if self.grid else 0)
        if v.ndim != 2:
            raise DimensionError(f"dataset must be 2-D (n, T), got shape {v.shape}")
        if self.grid is not None and v.shape[1] != self.grid.num_points:
            raise DimensionError(
                f"curves have {v.shape[1]} points, grid has {self.grid.num_points}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("dataset contains non-finite values")
        if self.labels is not None and len(self.labels) != v.shape[0]:
            raise DimensionError("one label per curve required")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_samples(cls, samples: Sequence[FunctionSample], **kwargs) -> CurveDataset:
        if not samples:
            raise DimensionError("cannot build a dataset from zero samples")
        grid = samples[0].grid
        for s in samples[1:]:
            if s.grid != grid:
                raise DimensionError("samples live on different grids")
        return cls(np.vstack([s.values for s in samples]), grid, **kwargs)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def num_points(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.n

    def __iter__(self) -> Iterator[FunctionSample]:
        for row in self.values:
            yield FunctionSample(row, self.grid)

    def __getitem__(self, index: Union[int, slice]):
        if isinstance(index, slice):
            labels = self.labels[index] if self.labels is not None else None
            return CurveDataset(self.values[index], self.grid, self.normalization, labels)
        return FunctionSample(self.values[index], self.grid)

    def with_values(self, values: np.ndarray, normalization=None) -> CurveDataset:
        return CurveDataset(values, self.grid, normalization, self.labels)

    def mean_curve(self) -> FunctionSample:
        return FunctionSample(self.values.mean(axis=0), self.grid)


def _check_same_space(u, v):
    if u.grid != v.grid or len(u) != len(v):
        raise DimensionError(
            f"samples live in different spaces ({u.basis}:{len(u)} vs {v.basis}:{len(v)})"
        )


def inner_product(u: FunctionSample, v: FunctionSample) -> float:
    _check_same_space(u, v)
    return float(u.weight * np.dot(u.values, v.values))


def rank_one(a: FunctionSample, b: FunctionSample) -> LinearOperatorMatrix:
    """Operator ``w -> <a, w> b``."""
    _check_same_space(a, b)
    return LinearOperatorMatrix(np.outer(b.values, a.values), a.basis)


def apply_operator(A: LinearOperatorMatrix, u: FunctionSample) -> FunctionSample:
    if A.basis != u.basis:
        raise BasisError(f"{A.basis} operator applied to a {u.basis} sample")
    if A.dim != len(u):
        raise DimensionError(f"operator of size {A.dim} applied to sample of length {len(u)}")
    return FunctionSample(A.weight * (A.entries @ u.values), u.grid)


def compose(A: LinearOperatorMatrix, B: LinearOperatorMatrix) -> LinearOperatorMatrix:
    """Operator ``A o B`` (apply B first)."""
    if A.basis != B.basis or A.dim != B.dim:
        raise DimensionError("cannot compose operators from different spaces")
    return LinearOperatorMatrix(A.weight * (A.entries @ B.entries), A.basis)


def identity_operator(dim: int, basis: str = GRID) -> LinearOperatorMatrix:
    scale = float(dim) if basis == GRID else 1.0
    return LinearOperatorMatrix(scale * np.eye(dim), basis)


def hs_norm(A: LinearOperatorMatrix) -> float:
    """Hilbert-Schmidt norm of a coefficient-basis operator."""
    if A.basis != COEFF:
        raise BasisError(
            "HS norm needs an orthonormal coefficient basis; convert with to_coefficient_basis"
        )
    return float(np.linalg.norm(A.entries, "fro"))


def to_coefficient_basis(A: LinearOperatorMatrix, basis_values: np.ndarray) -> LinearOperatorMatrix:
    """Matrix ``<e_k, A e_l>`` of a grid operator in the basis sampled as rows of ``basis_values``.

    Rows must be orthonormal under the grid inner product.
    """
    if A.basis != GRID:
        raise BasisError("operator is already in coefficient form")
    E = np.asarray(basis_values, dtype=float)
    if E.shape[1] != A.dim:
        raise DimensionError("basis functions and operator live on different grids")
    w = A.weight
    return LinearOperatorMatrix(w * E @ (w * A.entries @ E.T), COEFF)
