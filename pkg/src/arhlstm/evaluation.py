"""Normalization, chronological splits and the MARE metric."""

from __future__ import annotations

import csv
from typing import Optional, Tuple

import numpy as np

from arhlstm.errors import DegenerateRangeError, DimensionError, DivisionHazardError
from arhlstm.function_space import CurveDataset, Normalization

NORMALIZED_LOW = 0.01
NORMALIZED_HIGH = 1.0
DIVISION_FLOOR = 1e-12


def normalize_dataset(ds: CurveDataset, reference: Optional[CurveDataset] = None) -> CurveDataset:
    """Map values affinely onto [0.01, 1].

    The range comes from ``reference`` when given (e.g. the training block
    only), otherwise from every value in ``ds``.  Values outside the
    reference range then fall outside [0.01, 1].
    """
    src = ds if reference is None else reference
    lo, hi = float(src.values.min()), float(src.values.max())
    if not hi > lo:
        raise DegenerateRangeError(f"cannot normalize a constant dataset (value {lo})")
    record = Normalization(lo, hi, NORMALIZED_LOW, NORMALIZED_HIGH)
    out = record.forward(ds.values)
    # pin the endpoints against rounding
    out[ds.values == lo] = NORMALIZED_LOW
    out[ds.values == hi] = NORMALIZED_HIGH
    if reference is None:
        out = np.clip(out, NORMALIZED_LOW, NORMALIZED_HIGH)
    return ds.with_values(out, normalization=record)


def denormalize_dataset(ds: CurveDataset) -> CurveDataset:
    if ds.normalization is None:
        raise ValueError("dataset carries no normalization record")
    return ds.with_values(ds.normalization.inverse(ds.values))


def _as_array(x) -> np.ndarray:
    return x.values if isinstance(x, CurveDataset) else np.atleast_2d(np.asarray(x, dtype=float))


def mare_per_curve(actual, predicted) -> np.ndarray:
    """Mean over grid points of ``|x - x_hat| / |x|``, one value per curve."""
    a, p = _as_array(actual), _as_array(predicted)
    if a.shape != p.shape:
        raise DimensionError(f"shape mismatch: actual {a.shape} vs predicted {p.shape}")
    denom = np.abs(a)
    if np.any(denom < DIVISION_FLOOR):
        i, j = np.argwhere(denom < DIVISION_FLOOR)[0]
        raise DivisionHazardError(f"actual value {a[i, j]!r} at curve {i}, point {j} is ~0")
    return np.mean(np.abs(a - p) / denom, axis=1)


def mare(actual, predicted) -> float:
    per_curve = mare_per_curve(actual, predicted)
    if per_curve.size == 0:
        raise DimensionError("MARE of an empty set")
    return float(np.mean(per_curve))


def split(ds: CurveDataset, n_tr: int, n_v: int, n_te: int) -> Tuple[CurveDataset, CurveDataset, CurveDataset]:
    """Contiguous train / validation / test blocks in chronological order."""
    if n_tr < 1 or n_te < 1 or n_v < 0:
        raise DimensionError(f"invalid split sizes ({n_tr}, {n_v}, {n_te})")
    if n_tr + n_v + n_te > ds.n:
        raise DimensionError(f"split sizes {n_tr}+{n_v}+{n_te} exceed {ds.n} curves")
    a, b = n_tr, n_tr + n_v
    return ds[:a], ds[a:b], ds[b : b + n_te]


def lagged_windows(history: Optional[CurveDataset], block: CurveDataset, sws: int) -> np.ndarray:
    """Input windows for one-step prediction of every curve in ``block``.

    Window ``i`` holds the ``sws`` true curves preceding ``block[i]``; the
    first windows reach back into ``history``.  Returns ``(len(block), sws, T)``.
    """
    if sws < 1:
        raise ValueError("window size must be >= 1")
    past = history.values if history is not None else np.empty((0, block.num_points))
    if past.shape[0] < sws:
        raise DimensionError(f"need {sws} preceding curves, history has {past.shape[0]}")
    full = np.vstack([past[past.shape[0] - sws :], block.values])
    idx = np.arange(block.n)[:, None] + np.arange(sws)[None, :]
    return full[idx]


def write_mare_report(path, actual, predicted, start_index: int = 1) -> float:
    per_curve = mare_per_curve(actual, predicted)
    total = float(np.mean(per_curve))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve_index", "abs_error"])
        for i, v in enumerate(per_curve, start=start_index):
            w.writerow([i, repr(float(v))])
        fh.write(f"# MARE={total!r}\n")
    return total
