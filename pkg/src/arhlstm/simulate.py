"""ARH(1) samples generated in an orthonormal Fourier basis.

Coefficients are ordered (a0, a1, b1, ..., aD, bD) against the basis
{1, sqrt(2) cos(2 pi k t), sqrt(2) sin(2 pi k t)}, so the Hilbert-Schmidt
norm of an operator is the Frobenius norm of its coefficient matrix.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from arhlstm.datasets import write_curve_matrix_csv
from arhlstm.errors import ConfigError
from arhlstm.function_space import COEFF, CurveDataset, FunctionSample, GridSpec, LinearOperatorMatrix

KERNELS = ("exp", "pow")
NOISE_LAWS = ("harmonic", "linear", "white")
RHO_NORMS = ("hs", "operator")


@dataclass(frozen=True)
class SimConfig:
    harmonics: int = 10
    kernel: str = "exp"
    target_hs_norm: float = 0.5
    burn_in: int = 50
    n: int = 1000
    num_points: int = 500
    noise_scale: float = 1.0
    noise_law: str = "linear"
    seed: int = 0
    # which norm target_hs_norm fixes: Hilbert-Schmidt or operator (spectral)
    rho_norm: str = "hs"

    def __post_init__(self):
        if self.harmonics < 1:
            raise ConfigError("harmonics D must be >= 1")
        if self.kernel not in KERNELS:
            raise ConfigError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if not 0 < self.target_hs_norm < 1:
            raise ConfigError("target HS norm must lie in (0, 1) for stationarity")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be >= 0")
        if self.n < 1:
            raise ConfigError("sample size must be >= 1")
        if self.noise_law not in NOISE_LAWS:
            raise ConfigError(f"noise_law must be one of {NOISE_LAWS}, got {self.noise_law!r}")
        if self.noise_scale < 0:
            raise ConfigError("noise_scale must be >= 0")
        if self.rho_norm not in RHO_NORMS:
            raise ConfigError(f"rho_norm must be one of {RHO_NORMS}, got {self.rho_norm!r}")

    @property
    def dimension(self) -> int:
        return 2 * self.harmonics + 1

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.num_points)


@dataclass(frozen=True, eq=False)
class Simulation:
    dataset: CurveDataset
    coeffs: np.ndarray
    rho: LinearOperatorMatrix
    config: SimConfig


def build_rho_matrix(harmonics: int, kernel: str = "exp", target_hs_norm: float = 0.5,
                     norm: str = "hs") -> LinearOperatorMatrix:
    """Toeplitz autocorrelation operator scaled to a given HS norm.

    ``exp``: entries decay like exp(-|i-j|).  ``pow``: like 1 / (1 + |i-j|^2).
    With ``norm="operator"`` the spectral norm is scaled to the target instead.
    """
    if harmonics < 1:
        raise ConfigError("harmonics D must be >= 1")
    if not 0 < target_hs_norm < 1:
        raise ConfigError("target HS norm must lie in (0, 1)")
    K = 2 * harmonics + 1
    lag = np.abs(np.subtract.outer(np.arange(K), np.arange(K))).astype(float)
    if kernel == "exp":
        M = np.exp(-lag)
    elif kernel == "pow":
        M = 1.0 / (1.0 + lag**2)
    else:
        raise ConfigError(f"unknown kernel {kernel!r}")
    if norm not in RHO_NORMS:
        raise ConfigError(f"norm must be one of {RHO_NORMS}, got {norm!r}")
    scale = np.linalg.norm(M, "fro" if norm == "hs" else 2)
    return LinearOperatorMatrix(target_hs_norm * M / scale, COEFF)


def fourier_basis(harmonics: int, grid: GridSpec) -> np.ndarray:
    """Basis functions sampled on the grid, one per row."""
    t = grid.points
    rows = [np.ones_like(t)]
    for k in range(1, harmonics + 1):
        rows.append(np.sqrt(2.0) * np.cos(2 * np.pi * k * t))
        rows.append(np.sqrt(2.0) * np.sin(2 * np.pi * k * t))
    return np.vstack(rows)


def evaluate_fourier(coeffs, grid: GridSpec) -> FunctionSample:
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size % 2 == 0:
        raise ConfigError(f"expected 2D+1 coefficients, got {c.size}")
    return FunctionSample(c @ fourier_basis(c.size // 2, grid), grid)


def noise_std(dimension: int, noise_scale: float, law: str = "linear") -> np.ndarray:
    """Per-coefficient innovation std, rescaled so the total variance is noise_scale**2.

    ``linear``: variance proportional to K - j + 1 for the j-th coefficient
    (1-based), so the variance decreases linearly from the constant term.
    ``harmonic``: std proportional to 1/j.  ``white``: all equal.
    """
    j = np.arange(1, dimension + 1, dtype=float)
    if law == "harmonic":
        s = 1.0 / j
    elif law == "linear":
        s = np.sqrt(dimension - j + 1)
    elif law == "white":
        s = np.ones_like(j)
    else:
        raise ConfigError(f"unknown noise law {law!r}")
    return noise_scale * s / np.linalg.norm(s)


def simulate_arh(cfg: SimConfig) -> Simulation:
    """Run xi_{i+1} = R xi_i + eps_{i+1} from xi_0 = 0 and keep the last n states."""
    rng = np.random.default_rng(cfg.seed)
    R = build_rho_matrix(cfg.harmonics, cfg.kernel, cfg.target_hs_norm, cfg.rho_norm).entries
    K = cfg.dimension
    eps = rng.standard_normal((cfg.burn_in + cfg.n, K)) * noise_std(K, cfg.noise_scale, cfg.noise_law)
    xi = np.zeros(K)
    kept = np.empty((cfg.n, K))
    for step in range(cfg.burn_in + cfg.n):
        xi = R @ xi + eps[step]
        if step >= cfg.burn_in:
            kept[step - cfg.burn_in] = xi
    curves = kept @ fourier_basis(cfg.harmonics, cfg.grid)
    return Simulation(CurveDataset(curves, cfg.grid), kept, LinearOperatorMatrix(R, COEFF), cfg)


def nonlinear_transform(ds: CurveDataset) -> CurveDataset:
    """Pointwise x -> 3 cos(10 pi x) - 2 exp(-x)."""
    x = ds.values
    return CurveDataset(3.0 * np.cos(10.0 * np.pi * x) - 2.0 * np.exp(-x), ds.grid, None, ds.labels)


def write_simulation(sim: Simulation, path, extra: Optional[dict] = None) -> Path:
    """Write curves as a T x n CSV (one column per curve) plus ``<path>.meta.json``."""
    path = Path(path)
    write_curve_matrix_csv(sim.dataset, path, orientation="columns")
    meta = asdict(sim.config)
    meta.update(extra or {})
    meta_path = path.with_name(path.name + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta_path
