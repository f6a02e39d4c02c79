"""ARH(1) plug-in predictor: rho_hat = D_hat o Gamma_hat^dagger."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from arhlstm.covariance import (
    EigenSystem,
    eigendecompose_symmetric,
    empirical_covariance,
    empirical_cross_covariance,
    ridge_regularized_inverse,
    spectral_regularized_inverse,
)
from arhlstm.errors import (
    DimensionError,
    InsufficientDataError,
    RankError,
    TruncationError,
)
from arhlstm.evaluation import lagged_windows, mare
from arhlstm.function_space import (
    COEFF,
    GRID,
    CurveDataset,
    FunctionSample,
    GridSpec,
    LinearOperatorMatrix,
    compose,
)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class ArhModel:
    mean_curve: FunctionSample
    rho_hat: LinearOperatorMatrix
    k_n: Optional[int]
    method: str = "spectral"
    alpha: Optional[float] = None
    eigen: Optional[EigenSystem] = None

    @property
    def grid(self) -> Optional[GridSpec]:
        return self.mean_curve.grid

    def predict(self, X: np.ndarray) -> np.ndarray:
        """One-step predictions for each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.rho_hat.dim:
            raise DimensionError(f"inputs have {X.shape[1]} points, model expects {self.rho_hat.dim}")
        m = self.mean_curve.values
        return m + (X - m) @ self.rho_hat.as_matrix().T


def _centered(train: CurveDataset) -> Tuple[FunctionSample, CurveDataset]:
    mean = train.mean_curve()
    return mean, train.with_values(train.values - mean.values)


def _regularized_inverse(G, es, k_n, method, alpha):
    if method == "spectral":
        return spectral_regularized_inverse(es, k_n)
    if method == "ridge":
        if alpha is None:
            raise ValueError("ridge method needs alpha")
        return ridge_regularized_inverse(G, alpha)
    raise ValueError(f"unknown regularization method {method!r}")


def fit_arh(train: CurveDataset, k_n: Optional[int] = None, method: str = "spectral",
            alpha: Optional[float] = None) -> ArhModel:
    """Fit rho_hat on the centered training curves.

    The covariance is taken over the same n - 1 regressor curves and with
    the same 1/(n-1) weight as the lag-1 cross-covariance, so that exact
    linear data are recovered exactly.
    """
    n = train.n
    need = max(3, (k_n or 0) + 1)
    if n < need:
        raise InsufficientDataError(f"need at least {need} training curves, got {n}")
    mean, centered = _centered(train)
    G = empirical_covariance(centered, regressors_only=True)
    es = eigendecompose_symmetric(G, train.grid)
    if es.max_admissible() == 0:
        raise RankError("training covariance is zero; the sample carries no variation")
    if method == "spectral":
        if k_n is None:
            raise ValueError("spectral method needs k_n")
        if k_n > es.max_admissible():
            raise TruncationError(f"k_n={k_n} exceeds the numerical rank", es.max_admissible())
    inv = _regularized_inverse(G, es, k_n, method, alpha)
    D = empirical_cross_covariance(centered)
    rho = compose(D, inv)
    return ArhModel(mean, rho, k_n if method == "spectral" else None, method, alpha, es)


def predict_next(model: ArhModel, x: FunctionSample) -> FunctionSample:
    if x.grid != model.grid or len(x) != model.rho_hat.dim:
        raise DimensionError("input curve is not on the model grid")
    return FunctionSample(model.predict(x.values)[0], model.grid)


def predict_block(model: ArhModel, history: CurveDataset, block: CurveDataset) -> np.ndarray:
    """Teacher-forced one-step predictions of every curve in ``block``."""
    inputs = lagged_windows(history, block, 1)[:, 0, :]
    return model.predict(inputs)


def select_kn(train: CurveDataset, val: CurveDataset, k_grid: Iterable[int],
              method: str = "spectral") -> Tuple[int, Dict[int, float]]:
    """Grid search of the truncation level on validation MARE.

    Grid values above the numerical rank of the training covariance are
    skipped.  Ties go to the smaller k.
    """
    grid = sorted({int(k) for k in k_grid})
    if val.n == 0:
        raise InsufficientDataError("validation block is empty")
    mean, centered = _centered(train)
    G = empirical_covariance(centered, regressors_only=True)
    es = eigendecompose_symmetric(G, train.grid)
    limit = min(es.max_admissible(), train.n - 1)
    admissible = [k for k in grid if 1 <= k <= limit]
    if not admissible:
        raise TruncationError(f"no admissible k in grid {grid}", limit)
    dropped = [k for k in grid if k not in admissible]
    if dropped:
        log.info("skipping k_n values above the numerical rank %d: %s", limit, dropped)
    D = empirical_cross_covariance(centered)

    inputs = lagged_windows(train, val, 1)[:, 0, :] - mean.values
    scores: Dict[int, float] = {}
    for k in admissible:
        inv = _regularized_inverse(G, es, k, method, None)
        rho = compose(D, inv)
        pred = mean.values + inputs @ rho.as_matrix().T
        scores[k] = mare(val.values, pred)
    best = min(admissible, key=lambda k: (scores[k], k))
    return best, scores


def save_model(model: ArhModel, path) -> None:
    dim = model.rho_hat.dim
    alpha = "none" if model.alpha is None else repr(model.alpha)
    k = "none" if model.k_n is None else str(model.k_n)
    with open(path, "w") as fh:
        fh.write(
            f"ARHMODEL version={FORMAT_VERSION} method={model.method} alpha={alpha} "
            f"k_n={k} basis={model.rho_hat.basis} dims={dim}x{dim}\n"
        )
        fh.write(" ".join(repr(float(v)) for v in model.mean_curve.values) + "\n")
        for row in model.rho_hat.entries:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_model(path) -> ArhModel:
    with open(path) as fh:
        header = fh.readline().split()
        if not header or header[0] != "ARHMODEL":
            raise DimensionError(f"{path}: not an ARH model file")
        meta = dict(tok.split("=", 1) for tok in header[1:])
        if int(meta["version"]) != FORMAT_VERSION:
            raise DimensionError(f"{path}: unsupported model version {meta['version']}")
        dim = int(meta["dims"].split("x")[0])
        mean = np.array(fh.readline().split(), dtype=float)
        rows = np.array([line.split() for line in fh if line.strip()], dtype=float)
    if mean.shape != (dim,) or rows.shape != (dim, dim):
        raise DimensionError(f"{path}: body does not match header dims {dim}x{dim}")
    basis = meta["basis"]
    grid = GridSpec(dim) if basis == GRID else None
    return ArhModel(
        FunctionSample(mean, grid),
        LinearOperatorMatrix(rows, basis if basis in (GRID, COEFF) else GRID),
        None if meta["k_n"] == "none" else int(meta["k_n"]),
        meta["method"],
        None if meta["alpha"] == "none" else float(meta["alpha"]),
    )
