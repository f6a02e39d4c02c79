"""End-to-end experiment pipeline and its on-disk report."""

from __future__ import annotations

import contextlib
import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from arhlstm import arh, lstm
from arhlstm.config import ExperimentConfig
from arhlstm.datasets import (
    aggregate_hourly_to_daily,
    load_curve_matrix_csv,
    read_hourly_csv,
    reshape_to_annual,
)
from arhlstm.errors import ArhLstmError, DataError, DimensionError
from arhlstm.evaluation import mare, normalize_dataset, split
from arhlstm.function_space import CurveDataset
from arhlstm.simulate import nonlinear_transform, simulate_arh

log = logging.getLogger(__name__)

REPORT_COLUMNS = ("predictor", "sws", "k_n", "mare")


@dataclass
class ResultRow:
    predictor: str
    sws: Optional[int]
    k_n: Optional[int]
    mare: float
    predictions: np.ndarray = field(repr=False, default=None)

    @property
    def tag(self) -> str:
        return "stat" if self.predictor == "stat" else f"lstm_sws{self.sws}"


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: List[ResultRow]
    raw: CurveDataset
    data: CurveDataset
    test: CurveDataset
    test_start: int
    kn_scores: Dict[int, float] = field(default_factory=dict)
    histories: Dict[int, list] = field(default_factory=dict)
    log: List[dict] = field(default_factory=list)

    def row(self, tag: str) -> ResultRow:
        for r in self.rows:
            if r.tag == tag:
                return r
        raise KeyError(tag)


class _StageLog:
    def __init__(self, seed):
        self.seed = seed
        self.entries: List[dict] = []

    @contextlib.contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        except ArhLstmError as exc:
            exc.stage = getattr(exc, "stage", None) or name
            raise
        finally:
            self.entries.append(
                {"stage": name, "wall_time": round(time.perf_counter() - t0, 6), "seed": self.seed}
            )


def load_dataset(cfg: ExperimentConfig) -> CurveDataset:
    """Raw (unnormalized) curves for the configured experiment."""
    if cfg.kind in ("simulated", "nonlinear"):
        sim = simulate_arh(cfg.simulation)
        ds = sim.dataset
        if cfg.kind == "nonlinear":
            if cfg.nonlinear_input == "normalized":
                ds = normalize_dataset(ds)
            ds = nonlinear_transform(CurveDataset(ds.values, ds.grid))
        return ds
    if not Path(cfg.data.path).is_file():
        raise DataError(f"data file not found: {cfg.data.path}")
    if cfg.kind == "curve-matrix":
        return load_curve_matrix_csv(cfg.data.path, cfg.data.orientation)
    records = read_hourly_csv(cfg.data.path, cfg.data.time_column, cfg.data.value_column, cfg.data.time_format)
    return reshape_to_annual(aggregate_hourly_to_daily(records), cfg.data.year_range)


def _concat(*blocks: CurveDataset) -> CurveDataset:
    parts = [b for b in blocks if b.n]
    return parts[0].with_values(np.vstack([b.values for b in parts]), parts[0].normalization)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """load -> normalize -> split -> ARH (k_n search) -> LSTM per window size -> test MARE."""
    stages = _StageLog(cfg.seed)
    sp = cfg.split

    with stages.stage("load"):
        raw = load_dataset(cfg)
        if sp.train + sp.validation + sp.test > raw.n:
            raise DimensionError(
                f"split {sp.train}/{sp.validation}/{sp.test} needs {sp.train + sp.validation + sp.test} "
                f"curves, dataset has {raw.n}"
            )

    with stages.stage("normalize"):
        if sp.normalization == "train":
            data = normalize_dataset(raw, reference=raw[: sp.train])
        else:
            data = normalize_dataset(raw)

    with stages.stage("split"):
        train, val, test = split(data, sp.train, sp.validation, sp.test)
        before_test = _concat(train, val)

    rows: List[ResultRow] = []
    kn_scores: Dict[int, float] = {}
    if cfg.arh.enabled:
        with stages.stage("arh"):
            a = cfg.arh
            if a.method == "ridge":
                k = None
            elif a.k_n is not None:
                k = a.k_n
            else:
                k, kn_scores = arh.select_kn(train, val, a.k_grid, a.method)
            fit_on = before_test if a.refit else train
            model = arh.fit_arh(fit_on, k, a.method, a.alpha)
            pred = arh.predict_block(model, before_test, test)
            rows.append(ResultRow("stat", None, model.k_n, mare(test.values, pred), pred))

    histories: Dict[int, list] = {}
    if cfg.lstm.enabled:
        for sws in cfg.lstm.sws:
            with stages.stage(f"lstm_sws{sws}"):
                if val.n:
                    l_train, l_val = train, val
                else:
                    h = sp.lstm_holdout
                    if train.n - h <= sws:
                        raise DimensionError(f"training block too small for a {h}-curve holdout and sws={sws}")
                    l_train, l_val = train[:-h], train[-h:]
                tcfg = replace(cfg.lstm.train, sws=sws)
                result = lstm.train_lstm(l_train, l_val, tcfg)
                pred = lstm.predict_block(result.params, before_test, test, sws)
                rows.append(ResultRow("lstm", sws, None, mare(test.values, pred), pred))
                histories[sws] = result.history

    return ExperimentReport(
        config=cfg,
        rows=rows,
        raw=raw,
        data=data,
        test=test,
        test_start=sp.train + sp.validation + 1,
        kn_scores=kn_scores,
        histories=histories,
        log=stages.entries,
    )


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_matrix(path: Path, index: List[int], values: np.ndarray, index_name="curve_index") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([index_name] + [f"t{j}" for j in range(1, values.shape[1] + 1)])
        for i, row in zip(index, values):
            w.writerow([i] + [repr(float(v)) for v in row])


def read_matrix(path) -> tuple:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        rows = [row for row in r if row]
    idx = [int(row[0]) for row in rows]
    return idx, np.array([[float(v) for v in row[1:]] for row in rows])


def _config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d.pop("source", None)
    return d


def write_report(report: ExperimentReport, out=None) -> Path:
    """Write report.csv, per-predictor prediction matrices and the run log."""
    out = Path(out or report.config.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for r in report.rows:
            w.writerow([r.predictor, _fmt(r.sws), _fmt(r.k_n), _fmt(r.mare)])

    index = list(range(report.test_start, report.test_start + report.test.n))
    _write_matrix(out / "test_actual.csv", index, report.test.values)
    for r in report.rows:
        _write_matrix(out / f"predictions_{r.tag}.csv", index, r.predictions)

    if report.kn_scores:
        with open(out / "kn_scores.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k_n", "val_mare"])
            for k, v in sorted(report.kn_scores.items()):
                w.writerow([k, repr(v)])
    for sws, hist in report.histories.items():
        lstm.TrainResult(None, hist).write_history(out / f"lstm_history_sws{sws}.csv")

    (out / "config.json").write_text(json.dumps(_config_dict(report.config), indent=2, sort_keys=True) + "\n")
    with open(out / "run_log.jsonl", "w") as fh:
        for entry in report.log:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return out


def verify_report(out) -> List[str]:
    """Recompute every MARE in report.csv from the emitted prediction files.

    Returns a list of discrepancies; empty means the report checks out.
    """
    out = Path(out)
    problems = []
    _, actual = read_matrix(out / "test_actual.csv")
    with open(out / "report.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return ["report.csv has no result rows"]
    for row in rows:
        tag = "stat" if row["predictor"] == "stat" else f"lstm_sws{row['sws']}"
        path = out / f"predictions_{tag}.csv"
        if not path.is_file():
            problems.append(f"{tag}: missing {path.name}")
            continue
        _, pred = read_matrix(path)
        value = mare(actual, pred)
        reported = float(row["mare"])
        if value != reported:
            problems.append(f"{tag}: report says {reported!r}, predictions give {value!r}")
    return problems
