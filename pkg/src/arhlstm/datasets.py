"""Reading and writing curve datasets.

Two input layouts are supported: a rectangular numeric matrix (one curve
per row or per column) and an hourly timestamped series that is averaged
per day and cut into one 365-day curve per year.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from arhlstm.errors import DataError, GapError
from arhlstm.function_space import CurveDataset, GridSpec

log = logging.getLogger(__name__)

ORIENTATIONS = ("rows", "columns")


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_curve_matrix_csv(path, orientation: str = "rows") -> CurveDataset:
    """Load a numeric matrix; ``orientation`` says whether curves are rows or columns.

    A first row made entirely of non-numeric cells is taken as a header.
    """
    if orientation not in ORIENTATIONS:
        raise DataError(f"orientation must be one of {ORIENTATIONS}")
    rows: List[List[float]] = []
    header: Optional[List[str]] = None
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(csv.reader(fh), start=1):
            if not raw or (len(raw) == 1 and not raw[0].strip()) or raw[0].startswith("#"):
                continue
            cells = [c.strip() for c in raw]
            if not rows and header is None and not any(_is_number(c) for c in cells):
                header = cells
                continue
            parsed = []
            for col, cell in enumerate(cells, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataError(f"{path}:{lineno}: column {col}: non-numeric cell {cell!r}") from None
            if rows and len(parsed) != len(rows[0]):
                raise DataError(
                    f"{path}:{lineno}: ragged row with {len(parsed)} cells, expected {len(rows[0])}"
                )
            rows.append(parsed)
    if not rows:
        raise DataError(f"{path}: no numeric rows")
    mat = np.array(rows, dtype=float)
    if orientation == "columns":
        mat = mat.T
    labels = None
    if header is not None and orientation == "columns" and len(header) == mat.shape[0]:
        labels = tuple(header)
    return CurveDataset(mat, GridSpec(mat.shape[1]), labels=labels)


def write_curve_matrix_csv(ds: CurveDataset, path, orientation: str = "columns") -> None:
    """Write full-precision values; with ``columns`` the file is T rows by n columns."""
    if orientation not in ORIENTATIONS:
        raise DataError(f"orientation must be one of {ORIENTATIONS}")
    mat = ds.values.T if orientation == "columns" else ds.values
    names = [str(l) for l in ds.labels] if ds.labels else [f"curve_{i}" for i in range(1, ds.n + 1)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if orientation == "columns":
            w.writerow(names)
        for row in mat:
            w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class HourlyRecord:
    timestamp: dt.datetime
    value: float


def read_hourly_csv(path, time_column: str = "timestamp", value_column: str = "value",
                    time_format: Optional[str] = None) -> List[HourlyRecord]:
    """Read timestamped values; ISO-8601 timestamps unless ``time_format`` is given."""
    records: List[HourlyRecord] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        if reader.fieldnames is None or time_column not in reader.fieldnames or value_column not in reader.fieldnames:
            raise DataError(f"{path}: expected columns {time_column!r} and {value_column!r}, got {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            try:
                raw_t = row[time_column].strip()
                t = dt.datetime.strptime(raw_t, time_format) if time_format else dt.datetime.fromisoformat(raw_t)
                v = float(row[value_column])
            except (ValueError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if records and t <= records[-1].timestamp:
                raise DataError(f"{path}:{lineno}: timestamps must be strictly increasing")
            records.append(HourlyRecord(t, v))
    return records


def aggregate_hourly_to_daily(records: Iterable[HourlyRecord]) -> List[Tuple[dt.date, float]]:
    """Arithmetic mean of each calendar date's records, dates ascending."""
    buckets: "OrderedDict[dt.date, List[float]]" = OrderedDict()
    for rec in records:
        buckets.setdefault(rec.timestamp.date(), []).append(rec.value)
    if not buckets:
        raise DataError("no hourly records")
    partial = [d for d, vals in buckets.items() if len(vals) < 24]
    if partial:
        log.warning("%d day(s) with fewer than 24 records averaged over available hours", len(partial))
    return [(d, float(np.mean(buckets[d]))) for d in sorted(buckets)]


def _is_leap_day(d: dt.date) -> bool:
    return d.month == 2 and d.day == 29


def reshape_to_annual(daily: Sequence[Tuple[dt.date, float]],
                      year_range: Optional[Tuple[int, int]] = None) -> CurveDataset:
    """One 365-point curve per year; February 29 is dropped, gaps are errors.

    ``year_range`` is inclusive; by default every year present is used.
    """
    values = {d: v for d, v in daily if not _is_leap_day(d)}
    if not values:
        raise DataError("empty daily series")
    if year_range is None:
        years = sorted({d.year for d in values})
    else:
        years = list(range(year_range[0], year_range[1] + 1))
    curves, missing = [], []
    for y in years:
        day = dt.date(y, 1, 1)
        row = []
        while day.year == y:
            if not _is_leap_day(day):
                if day in values:
                    row.append(values[day])
                else:
                    missing.append(day)
            day += dt.timedelta(days=1)
        curves.append(row)
    if missing:
        raise GapError(missing)
    log.info("annual reshape: %d curve(s) for years %d-%d", len(years), years[0], years[-1])
    return CurveDataset(np.array(curves), GridSpec(365), labels=tuple(years))
