"""Command line entry point: ``arhlstm <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from arhlstm import arh, lstm
from arhlstm.config import ExperimentConfig, load_config, parse_int_list
from arhlstm.datasets import load_curve_matrix_csv
from arhlstm.errors import ArhLstmError, ConfigError, DataError
from arhlstm.evaluation import normalize_dataset, split, write_mare_report
from arhlstm.experiment import load_dataset, run_experiment, verify_report, write_report
from arhlstm.simulate import SimConfig, nonlinear_transform, simulate_arh, write_simulation

log = logging.getLogger("arhlstm")


def _load_cfg(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out is not None:
        cfg = cfg.with_out(args.out)
    return cfg


def _dataset_from_args(args):
    """Normalized dataset from --config or --data."""
    if args.config:
        cfg = _load_cfg(args)
        ds = load_dataset(cfg)
        return normalize_dataset(ds), cfg
    if not args.data:
        raise ConfigError("give --config or --data")
    ds = load_curve_matrix_csv(args.data, args.orientation)
    if not args.no_normalize:
        ds = normalize_dataset(ds)
    return ds, None


def cmd_simulate(args) -> int:
    if args.config:
        cfg = _load_cfg(args)
        sim_cfg = cfg.simulation
        nonlinear = cfg.kind == "nonlinear"
        out = Path(cfg.out)
    else:
        sim_cfg = SimConfig(
            harmonics=args.harmonics, kernel=args.kernel, n=args.n, num_points=args.num_points,
            noise_scale=args.noise_scale, noise_law=args.noise_law, burn_in=args.burn_in,
            seed=args.seed or 0,
        )
        nonlinear = args.nonlinear
        out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    sim = simulate_arh(sim_cfg)
    if nonlinear:
        raw_input = args.config and cfg.nonlinear_input == "raw"
        base = sim.dataset if raw_input else normalize_dataset(sim.dataset)
        sim = replace(sim, dataset=nonlinear_transform(base))
    meta = write_simulation(sim, out / "curves.csv", extra={"nonlinear": nonlinear})
    np.savetxt(out / "rho.txt", sim.rho.entries, fmt="%.17g")
    log.info("wrote %s (T=%d, n=%d) and %s", out / "curves.csv", sim_cfg.num_points, sim_cfg.n, meta.name)
    return 0


def _splits(ds, args, cfg):
    if cfg is not None:
        s = cfg.split
        return split(ds, s.train, s.validation, s.test)
    n_te = args.test if args.test is not None else ds.n - args.train - args.val
    return split(ds, args.train, args.val, n_te)


def cmd_fit_arh(args) -> int:
    ds, cfg = _dataset_from_args(args)
    train, val, _ = _splits(ds, args, cfg)
    out = Path(args.out or (cfg.out if cfg else "results"))
    out.mkdir(parents=True, exist_ok=True)
    k = args.k_n if args.k_n is not None else (cfg.arh.k_n if cfg else None)
    method = args.method
    if method == "spectral" and k is None:
        grid = parse_int_list(args.k_grid) if args.k_grid else (cfg.arh.k_grid if cfg else tuple(range(1, 31)))
        k, scores = arh.select_kn(train, val, grid, method)
        with open(out / "kn_scores.csv", "w") as fh:
            fh.write("k_n,val_mare\n")
            for kk, v in sorted(scores.items()):
                fh.write(f"{kk},{v!r}\n")
    model = arh.fit_arh(train, k, method, args.alpha)
    arh.save_model(model, out / "arh_model.txt")
    log.info("fitted ARH model (k_n=%s) -> %s", model.k_n, out / "arh_model.txt")
    return 0


def cmd_train_lstm(args) -> int:
    ds, cfg = _dataset_from_args(args)
    train, val, _ = _splits(ds, args, cfg)
    base = cfg.lstm.train if cfg else lstm.TrainConfig()
    tcfg = replace(
        base,
        sws=args.sws,
        seed=args.seed if args.seed is not None else base.seed,
        max_epochs=args.max_epochs if args.max_epochs is not None else base.max_epochs,
        hidden_size=args.hidden_size if args.hidden_size is not None else base.hidden_size,
        optimizer=args.optimizer or base.optimizer,
    )
    out = Path(args.out or (cfg.out if cfg else "results"))
    out.mkdir(parents=True, exist_ok=True)
    result = lstm.train_lstm(train, val, tcfg)
    lstm.save_params(result.params, out / f"lstm_sws{tcfg.sws}.txt", tcfg.sws, tcfg.seed)
    result.write_history(out / f"lstm_history_sws{tcfg.sws}.csv")
    log.info("trained %d epochs, best epoch %s", len(result.history), result.best_epoch)
    return 0


def cmd_evaluate(args) -> int:
    ds, cfg = _dataset_from_args(args)
    start = args.start - 1
    if not 0 < start < ds.n:
        raise DataError(f"--start must lie in 2..{ds.n}")
    history, block = ds[:start], ds[start:]
    with open(args.model) as fh:
        head = fh.readline()
    if head.startswith("ARHMODEL"):
        pred = arh.predict_block(arh.load_model(args.model), history, block)
    elif head.startswith("LSTMPARAMS"):
        params, meta = lstm.load_params(args.model)
        pred = lstm.predict_block(params, history, block, meta["sws"])
    else:
        raise DataError(f"{args.model}: unknown model file")
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    total = write_mare_report(out / "mare_report.csv", block.values, pred, start_index=start + 1)
    print(f"MARE={total!r}")
    return 0


def cmd_experiment(args) -> int:
    from arhlstm.plotting import emit_plot_data, render_figures

    cfg = _load_cfg(args)
    report = run_experiment(cfg)
    out = write_report(report)
    emit_plot_data(report, out)
    if not args.no_figures:
        render_figures(out, title=cfg.kind)
    for r in report.rows:
        label = "stat" if r.predictor == "stat" else f"lstm sws={r.sws}"
        extra = f" k_n={r.k_n}" if r.k_n is not None else ""
        log.info("%-14s MARE=%.4f%s", label, r.mare, extra)
    return 0


def cmd_verify_report(args) -> int:
    problems = verify_report(args.run_dir)
    for p in problems:
        print(p, file=sys.stderr)
    if problems:
        return 4
    print("report verified")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="arhlstm", description="ARH(1) vs LSTM functional prediction experiments")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment INI file")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--quiet", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="curve-matrix CSV (instead of --config)")
    data.add_argument("--orientation", choices=("rows", "columns"), default="rows")
    data.add_argument("--no-normalize", action="store_true")
    data.add_argument("--train", type=int, default=600)
    data.add_argument("--val", type=int, default=200)
    data.add_argument("--test", type=int)

    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate an ARH(1) sample")
    s.add_argument("--harmonics", type=int, default=10)
    s.add_argument("--kernel", choices=("exp", "pow"), default="exp")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--num-points", type=int, default=500)
    s.add_argument("--noise-scale", type=float, default=1.0)
    s.add_argument("--noise-law", choices=("linear", "harmonic", "white"), default="linear")
    s.add_argument("--burn-in", type=int, default=50)
    s.add_argument("--nonlinear", action="store_true")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit-arh", parents=[common, data], help="fit the ARH(1) predictor")
    f.add_argument("--k-n", type=int)
    f.add_argument("--k-grid", help="start:stop:step or comma list")
    f.add_argument("--method", choices=("spectral", "ridge"), default="spectral")
    f.add_argument("--alpha", type=float)
    f.set_defaults(func=cmd_fit_arh)

    t = sub.add_parser("train-lstm", parents=[common, data], help="train the LSTM predictor")
    t.add_argument("--sws", type=int, default=1)
    t.add_argument("--max-epochs", type=int)
    t.add_argument("--hidden-size", type=int)
    t.add_argument("--optimizer", choices=("adam", "sgd"))
    t.set_defaults(func=cmd_train_lstm)

    e = sub.add_parser("evaluate", parents=[common, data], help="MARE of a saved model on a block of curves")
    e.add_argument("--model", required=True)
    e.add_argument("--start", type=int, required=True, help="1-based index of the first predicted curve")
    e.set_defaults(func=cmd_evaluate)

    x = sub.add_parser("experiment", parents=[common], help="run a full experiment from a config")
    x.add_argument("--no-figures", action="store_true")
    x.set_defaults(func=cmd_experiment)

    v = sub.add_parser("verify-report", parents=[common], help="recompute report MARE from prediction files")
    v.add_argument("run_dir")
    v.set_defaults(func=cmd_verify_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "experiment" and not args.config:
        parser.error("experiment needs --config")
    try:
        return args.func(args)
    except ArhLstmError as exc:
        stage = getattr(exc, "stage", None)
        prefix = f"[{stage}] " if stage else ""
        print(f"error: {prefix}{exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
