"""Acceptance gate: one test per criterion, one PASS/FAIL/SKIP line each.

The lines are printed as the test runs and again in the terminal summary.
Quantitative bands are checked as stated; a criterion that does not hold
fails here rather than being loosened.
"""

import functools
import statistics
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from arhlstm import arh, lstm
from arhlstm.config import load_config
from arhlstm.covariance import eigendecompose_symmetric, empirical_covariance
from arhlstm.evaluation import mare, normalize_dataset, split
from arhlstm.experiment import run_experiment, write_report
from arhlstm.function_space import COEFF, CurveDataset, LinearOperatorMatrix, hs_norm
from arhlstm.simulate import SimConfig, simulate_arh

import conftest
from conftest import jacobi_eigenvalues, random_dataset
from test_arh import generator_R, noiseless_grid, noiseless_orbit
from test_lstm import _lstm_fd_check

pytestmark = pytest.mark.acceptance

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
SEEDS5 = (0, 1, 2, 3, 4)
SEEDS3 = (0, 1, 2)


def report(number, ok, detail, status=None):
    status = status or ("PASS" if ok else "FAIL")
    line = f"criterion {number:>2}: {status}  {detail}"
    conftest.ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


@functools.lru_cache(maxsize=None)
def table1_run(kernel, D, seed):
    cfg = load_config(CONFIGS / f"table1_{kernel}_d{D}.ini").with_seed(seed)
    rep = run_experiment(cfg)
    return {r.tag: (r.mare, r.k_n) for r in rep.rows}


@functools.lru_cache(maxsize=None)
def nonlinear_run(seed):
    rep = run_experiment(load_config(CONFIGS / "table4_nonlinear.ini").with_seed(seed))
    return {r.tag: (r.mare, r.k_n) for r in rep.rows}


# ---------------------------------------------------------------- 1-5


def test_criterion_01_table1_exp_d10_bands():
    runs = [table1_run("exp", 10, s) for s in SEEDS5]
    stat = statistics.median(r["stat"][0] for r in runs)
    net = statistics.median(r["lstm_sws1"][0] for r in runs)
    ok = abs(stat - 0.156) <= 0.05 and abs(net - 0.211) <= 0.08
    report(1, ok, f"median stat MARE {stat:.4f} (0.156+-0.05), median LSTM sws=1 MARE {net:.4f} (0.211+-0.08)")
    assert ok


def test_criterion_02_ordering_and_trend():
    details, ok = [], True
    for seed in SEEDS3:
        wins, trend_ok = 0, True
        for kernel in ("exp", "pow"):
            stat = {}
            for D in (10, 25, 40):
                r = table1_run(kernel, D, seed)
                stat[D] = r["stat"][0]
                best_net = min(v[0] for k, v in r.items() if k.startswith("lstm"))
                wins += stat[D] < best_net
            pairs = [(10, 25), (25, 40), (10, 40)]
            steps = sum(stat[b] <= stat[a] for a, b in pairs)
            trend_ok &= steps >= 2
            details.append(f"s{seed}/{kernel}: " + "/".join(f"{stat[D]:.4f}" for D in (10, 25, 40))
                           + f" ({steps}/3 non-increasing)")
        ok &= wins >= 5 and trend_ok
        details.append(f"s{seed}: stat<LSTM in {wins}/6")
    report(2, ok, "; ".join(details))
    assert ok


def test_criterion_03_nonlinear():
    runs = [nonlinear_run(s) for s in SEEDS3]
    ratios = [min(v[0] for k, v in r.items() if k.startswith("lstm")) / r["stat"][0] for r in runs]
    ks = [r["stat"][1] for r in runs]
    ratio = statistics.median(ratios)
    k = statistics.median(ks)
    ok = ratio < 0.75 and 40 <= k <= 110
    report(3, ok, f"median LSTM/stat MARE ratio {ratio:.3f} (<0.75; per seed "
           + ", ".join(f"{x:.3f}" for x in ratios) + f"), median selected k_n {k} in [40,110] (per seed {ks})")
    assert ok


def test_criterion_04_kn_selection():
    ks = [table1_run("exp", 10, s)["stat"][1] for s in SEEDS5]
    hits = sum(11 <= k <= 31 for k in ks)
    ok = hits >= 4
    report(4, ok, f"selected k_n per seed {ks}; {hits}/5 within [11,31] (need >=4)")
    assert ok


def test_criterion_05_real_data():
    parts, ok, ran = [], True, False
    targets = {"table2_elnino.ini": (0.226, 0.04), "table3_bale.ini": (0.116, 0.03)}
    for name, (target, tol) in targets.items():
        cfg = load_config(CONFIGS / name)
        if not Path(cfg.data.path).is_file():
            parts.append(f"{name}: data file {cfg.data.path} absent, skipped")
            continue
        ran = True
        value = run_experiment(replace(cfg, lstm=replace(cfg.lstm, enabled=False))).row("stat").mare
        good = abs(value - target) <= tol
        ok &= good
        parts.append(f"{name}: stat MARE {value:.4f} ({target}+-{tol}) {'ok' if good else 'out of band'}")
    if not ran:
        report(5, True, "; ".join(parts), status="SKIP")
        pytest.skip("real datasets not present")
    report(5, ok, "; ".join(parts))
    assert ok


# ---------------------------------------------------------------- 6-10


def test_criterion_06_bptt_finite_differences():
    r = np.random.default_rng(606)
    errors = []
    for _ in range(20):
        T, H, S, B = (int(r.integers(2, 6)), int(r.integers(1, 5)), int(r.integers(1, 4)), int(r.integers(1, 3)))
        errors.append(_lstm_fd_check(r, T, H, S, B))
    worst = max(errors)
    ok = worst < 1e-4
    report(6, ok, f"worst relative gradient error {worst:.2e} over 20 random configurations (<1e-4)")
    assert ok


def test_criterion_07_noiseless_recovery():
    coeff = CurveDataset(noiseless_orbit(50))
    model = arh.fit_arh(coeff, 5)
    err = hs_norm(LinearOperatorMatrix(model.rho_hat.entries - generator_R(), COEFF))
    pred_err = np.abs(model.predict(coeff.values[:-1]) - coeff.values[1:]).max()
    grid = noiseless_grid(50)
    gmodel = arh.fit_arh(grid, 5)
    grid_err = np.abs(gmodel.predict(grid.values[:-1]) - grid.values[1:]).max()
    ok = err < 1e-6 and pred_err < 1e-6 and grid_err < 1e-6
    report(7, ok, f"HS error {err:.1e}, max one-step error {pred_err:.1e} (coefficients) / {grid_err:.1e} (grid)")
    assert ok


def test_criterion_08_eigen_oracle_and_psd():
    r = np.random.default_rng(808)
    worst = 0.0
    for size in (5, 6):
        for _ in range(10):
            A = r.standard_normal((size, size))
            A = A + A.T
            es = eigendecompose_symmetric(LinearOperatorMatrix(A, COEFF))
            worst = max(worst, np.abs(es.eigenvalues - jacobi_eigenvalues(A)).max())
    min_ratio = np.inf
    for _ in range(100):
        ds = random_dataset(r, int(r.integers(2, 15)), int(r.integers(2, 9)))
        lam = np.linalg.eigvalsh(empirical_covariance(ds).as_matrix())
        min_ratio = min(min_ratio, lam.min() / lam.max())
    ok = worst < 1e-8 and min_ratio >= -1e-10
    report(8, ok, f"max eigenvalue deviation from Jacobi oracle {worst:.1e} (<1e-8); "
           f"min lambda_min/lambda_1 over 100 covariances {min_ratio:.1e} (>=-1e-10)")
    assert ok


def test_criterion_09_mare_identities():
    r = np.random.default_rng(909)
    X = r.uniform(0.01, 1, (6, 11))
    zero = mare(X, X)
    shift = mare(np.ones((4, 7)), np.full((4, 7), 1.1))
    a, p = r.uniform(0.1, 1, (3, 4)), r.uniform(0.1, 1, (3, 4))
    loop = 0.0
    for i in range(3):
        loop += sum(abs(a[i, j] - p[i, j]) / abs(a[i, j]) for j in range(4)) / 4
    loop /= 3
    diff = abs(mare(a, p) - loop)
    ok = zero == 0.0 and abs(shift - 0.1) < 1e-15 and diff < 1e-12
    report(9, ok, f"mare(X,X)={zero}, shift example {shift!r}, double-loop deviation {diff:.1e}")
    assert ok


def _stage_outputs(tmp_path, tag):
    sim = simulate_arh(SimConfig(harmonics=2, n=80, num_points=24, seed=5))
    data = normalize_dataset(sim.dataset)
    train, val, test = split(data, 50, 15, 15)
    k, scores = arh.select_kn(train, val, range(1, 6))
    model = arh.fit_arh(train, k)
    res = lstm.train_lstm(train, val, lstm.TrainConfig(hidden_size=4, max_epochs=4, learning_rate=1e-2, sws=2, seed=5))
    cfg = load_config(CONFIGS / "table1_exp_d10.ini")
    cfg = replace(
        cfg.with_seed(5),
        simulation=replace(cfg.simulation, harmonics=2, n=80, num_points=24, seed=5),
        split=replace(cfg.split, train=50, validation=15, test=15),
        arh=replace(cfg.arh, k_grid=(1, 2, 3, 4, 5)),
        lstm=replace(cfg.lstm, train=replace(cfg.lstm.train, hidden_size=4, max_epochs=4, learning_rate=1e-2)),
        out=str(tmp_path / tag),
    )
    out = write_report(run_experiment(cfg))
    files = {p.name: p.read_bytes() for p in out.iterdir() if p.name not in ("run_log.jsonl", "config.json")}
    return {
        "simulate": sim.dataset.values.tobytes(),
        "normalize": data.values.tobytes(),
        "split": b"".join(b.values.tobytes() for b in (train, val, test)),
        "select_kn": repr((k, sorted(scores.items()))).encode(),
        "fit_arh": model.rho_hat.entries.tobytes(),
        "train_lstm": repr(res.history).encode() + b"".join(v.tobytes() for v in res.params.arrays().values()),
        "report": repr(sorted(files.items())).encode(),
    }


def test_criterion_10_determinism(tmp_path):
    a, b = _stage_outputs(tmp_path, "a"), _stage_outputs(tmp_path, "b")
    differing = [k for k in a if a[k] != b[k]]
    ok = not differing
    report(10, ok, f"{len(a)} stages rerun with the same seed; differing: {differing or 'none'}")
    assert ok
