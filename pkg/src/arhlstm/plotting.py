"""Plot-ready CSV files for a finished run and the figures drawn from them.

Schemas (all files in the run directory):

``sample_curves.csv``
    ``t`` then one column ``curve_<i>`` per displayed curve (1-based index,
    raw units).
``first_last.csv``
    ``t``, ``first_1..first_10``, ``last_1..last_10`` (raw units).
``pred_vs_actual.csv``
    ``curve_index, series, t1..tT``; ``series`` is ``actual``, ``stat`` or
    ``lstm_sws<k>``; one row per test curve and series (normalized units).

Figures are rendered only from these files, so they can be redrawn without
rerunning the experiment.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (8, 5),
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "savefig.bbox": "tight",
    "svg.hashsalt": "arhlstm",
}


def _write_columns(path: Path, columns: Dict[str, np.ndarray]) -> None:
    names = list(columns)
    mat = np.column_stack([columns[n] for n in names])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in mat:
            w.writerow([repr(float(v)) for v in row])


def _sample_indices(report) -> List[int]:
    kind, n = report.config.kind, report.raw.n
    if kind == "nonlinear" and n >= 203:
        return [200, 201, 202, 203]
    if kind == "hourly-weather":
        return list(range(report.test_start, report.test_start + min(4, report.test.n)))
    return list(range(1, min(5, n) + 1))


def emit_plot_data(report, out) -> List[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t = report.raw.grid.points if report.raw.grid is not None else np.arange(report.raw.num_points)
    written = []

    cols = {"t": t}
    for i in _sample_indices(report):
        cols[f"curve_{i}"] = report.raw.values[i - 1]
    _write_columns(out / "sample_curves.csv", cols)
    written.append(out / "sample_curves.csv")

    if report.config.kind in ("curve-matrix", "hourly-weather"):
        m = min(10, report.raw.n)
        cols = {"t": t}
        for j in range(m):
            cols[f"first_{j + 1}"] = report.raw.values[j]
        for j in range(m):
            cols[f"last_{j + 1}"] = report.raw.values[report.raw.n - m + j]
        _write_columns(out / "first_last.csv", cols)
        written.append(out / "first_last.csv")

    T = report.test.num_points
    with open(out / "pred_vs_actual.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve_index", "series"] + [f"t{j}" for j in range(1, T + 1)])
        series = [("actual", report.test.values)] + [(r.tag, r.predictions) for r in report.rows]
        for k in range(report.test.n):
            for name, values in series:
                w.writerow([report.test_start + k, name] + [repr(float(v)) for v in values[k]])
    written.append(out / "pred_vs_actual.csv")
    return written


def _read_columns(path: Path) -> Dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        names = next(r)
        data = np.array([[float(v) for v in row] for row in r if row])
    return {n: data[:, j] for j, n in enumerate(names)}


def _read_pred_vs_actual(path: Path):
    out: Dict[int, Dict[str, np.ndarray]] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for row in r:
            out.setdefault(int(row[0]), {})[row[1]] = np.array(row[2:], dtype=float)
    return out


def render_figures(out, title: str = "") -> List[Path]:
    """Draw PNG figures for every plot-data file present in ``out``."""
    out = Path(out)
    made = []
    with plt.rc_context(STYLE):
        if (out / "sample_curves.csv").is_file():
            cols = _read_columns(out / "sample_curves.csv")
            t = cols.pop("t")
            fig, ax = plt.subplots()
            for name, v in cols.items():
                ax.plot(t, v, lw=1, label=name.replace("_", " "))
            ax.set_xlabel("t")
            ax.set_ylabel("X(t)")
            ax.set_title(f"{title} sample curves".strip())
            ax.legend(loc="best")
            made.append(_save(fig, out / "sample_curves.png"))

        if (out / "first_last.csv").is_file():
            cols = _read_columns(out / "first_last.csv")
            t = cols.pop("t")
            fig, ax = plt.subplots()
            for name, v in cols.items():
                first = name.startswith("first")
                ax.plot(t, v, color="black" if first else "red", ls="-" if first else "--", lw=0.9)
            ax.plot([], [], color="black", label="first curves")
            ax.plot([], [], color="red", ls="--", label="last curves")
            ax.set_xlabel("t")
            ax.legend(loc="best")
            ax.set_title(f"{title} first vs last curves".strip())
            made.append(_save(fig, out / "first_last.png"))

        if (out / "pred_vs_actual.csv").is_file():
            curves = _read_pred_vs_actual(out / "pred_vs_actual.csv")
            shown = sorted(curves)[:4]
            fig, axes = plt.subplots(len(shown), 1, sharex=True, squeeze=False,
                                     figsize=(8, 2.2 * len(shown)))
            for ax, idx in zip(axes[:, 0], shown):
                for name, v in curves[idx].items():
                    grid = np.arange(v.size) / v.size
                    ax.plot(grid, v, lw=1.4 if name == "actual" else 0.9,
                            color="black" if name == "actual" else None, label=name)
                ax.set_ylabel(f"curve {idx}")
            axes[0, 0].legend(loc="upper right", ncol=4)
            axes[-1, 0].set_xlabel("t")
            made.append(_save(fig, out / "pred_vs_actual.png"))

        histories = sorted(out.glob("lstm_history_sws*.csv"))
        if histories:
            fig, ax = plt.subplots()
            for path in histories:
                cols = _read_columns(path)
                ax.plot(cols["epoch"], cols["val_mare"], label=path.stem.replace("lstm_history_", ""))
            ax.set_xlabel("epoch")
            ax.set_ylabel("validation MARE")
            ax.legend(loc="best")
            made.append(_save(fig, out / "lstm_history.png"))

        if (out / "kn_scores.csv").is_file():
            cols = _read_columns(out / "kn_scores.csv")
            fig, ax = plt.subplots()
            ax.plot(cols["k_n"], cols["val_mare"], marker="o")
            ax.set_xlabel("k_n")
            ax.set_ylabel("validation MARE")
            made.append(_save(fig, out / "kn_scores.png"))
    return made


def _save(fig, path: Path) -> Path:
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path
