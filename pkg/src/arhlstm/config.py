"""Experiment configuration read from INI files.

Sections and keys (all optional except ``[experiment] kind``)::

    [experiment]  kind, seed, out
    [simulation]  harmonics, kernel, target_hs_norm, burn_in, n, num_points,
                  noise_scale, noise_law, rho_norm, nonlinear_input
    [data]        path, orientation, time_column, value_column, time_format,
                  year_start, year_end
    [split]       train, validation, test, normalization, lstm_holdout
    [arh]         enabled, method, k_grid, k_n, alpha, refit
    [lstm]        enabled, sws, hidden_size, learning_rate, patience,
                  max_epochs, batch_size, optimizer, loss, cell,
                  freeze_recurrent

``k_grid`` accepts ``start:stop:step`` (stop inclusive) or a comma list;
``sws`` accepts a comma list.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Tuple

from arhlstm.errors import ConfigError
from arhlstm.lstm import TrainConfig
from arhlstm.simulate import SimConfig

KINDS = ("simulated", "nonlinear", "curve-matrix", "hourly-weather")


@dataclass(frozen=True)
class DataConfig:
    path: Optional[str] = None
    orientation: str = "rows"
    time_column: str = "timestamp"
    value_column: str = "value"
    time_format: Optional[str] = None
    year_range: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class SplitConfig:
    train: int = 600
    validation: int = 200
    test: int = 200
    normalization: str = "global"
    # validation curves carved from the end of the training block when
    # the split has no validation block (LSTM early stopping only)
    lstm_holdout: int = 5


@dataclass(frozen=True)
class ArhConfig:
    enabled: bool = True
    method: str = "spectral"
    k_grid: Tuple[int, ...] = tuple(range(5, 61, 5))
    k_n: Optional[int] = None
    alpha: Optional[float] = None
    refit: bool = False


@dataclass(frozen=True)
class LstmConfig:
    enabled: bool = True
    sws: Tuple[int, ...] = (1, 2)
    train: TrainConfig = field(default_factory=TrainConfig)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    out: str = "results"
    simulation: SimConfig = field(default_factory=SimConfig)
    nonlinear_input: str = "normalized"
    data: DataConfig = field(default_factory=DataConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    arh: ArhConfig = field(default_factory=ArhConfig)
    lstm: LstmConfig = field(default_factory=LstmConfig)
    source: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"experiment kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind in ("curve-matrix", "hourly-weather") and not self.data.path:
            raise ConfigError(f"{self.kind} experiment needs [data] path")
        if self.lstm.enabled and not self.lstm.sws:
            raise ConfigError("[lstm] sws list is empty")
        if not (self.arh.enabled or self.lstm.enabled):
            raise ConfigError("both predictors are disabled")
        if self.split.normalization not in ("global", "train"):
            raise ConfigError("[split] normalization must be 'global' or 'train'")
        if self.nonlinear_input not in ("normalized", "raw"):
            raise ConfigError("[simulation] nonlinear_input must be 'normalized' or 'raw'")
        if self.arh.method not in ("spectral", "ridge"):
            raise ConfigError("[arh] method must be 'spectral' or 'ridge'")
        if self.arh.method == "ridge" and not self.arh.alpha:
            raise ConfigError("[arh] ridge method needs alpha")
        if self.kind in ("simulated", "nonlinear"):
            total = self.split.train + self.split.validation + self.split.test
            if total > self.simulation.n:
                raise ConfigError(f"split sizes ({total}) exceed simulated sample size {self.simulation.n}")

    def with_seed(self, seed: int) -> ExperimentConfig:
        return replace(
            self,
            seed=seed,
            simulation=replace(self.simulation, seed=seed),
            lstm=replace(self.lstm, train=replace(self.lstm.train, seed=seed)),
        )

    def with_out(self, out) -> ExperimentConfig:
        return replace(self, out=str(out))


def parse_int_list(text: str) -> Tuple[int, ...]:
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            if step < 1:
                raise ValueError("step must be positive")
            return tuple(range(start, stop + 1, step))
        return tuple(int(p) for p in text.replace(" ", "").split(",") if p)
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}: {exc}") from None


def _get(section, key, conv, default):
    if section is None or key not in section:
        return default
    raw = section[key].strip()
    if raw == "" or raw.lower() == "none":
        return None
    try:
        if conv is bool:
            return section.getboolean(key)
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: {exc}") from None


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_parser(parser, source=str(path))


def config_from_parser(parser: configparser.ConfigParser, source: Optional[str] = None) -> ExperimentConfig:
    sec = {name: parser[name] if parser.has_section(name) else None
           for name in ("experiment", "simulation", "data", "split", "arh", "lstm")}
    exp = sec["experiment"]
    if exp is None or "kind" not in exp:
        raise ConfigError("[experiment] kind is required")
    seed = _get(exp, "seed", int, 0)

    s = sec["simulation"]
    d0 = SimConfig()
    try:
        sim = SimConfig(
            harmonics=_get(s, "harmonics", int, d0.harmonics),
            kernel=_get(s, "kernel", str, d0.kernel),
            target_hs_norm=_get(s, "target_hs_norm", float, d0.target_hs_norm),
            burn_in=_get(s, "burn_in", int, d0.burn_in),
            n=_get(s, "n", int, d0.n),
            num_points=_get(s, "num_points", int, d0.num_points),
            noise_scale=_get(s, "noise_scale", float, d0.noise_scale),
            noise_law=_get(s, "noise_law", str, d0.noise_law),
            rho_norm=_get(s, "rho_norm", str, d0.rho_norm),
            seed=seed,
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[simulation] {exc}") from None

    d = sec["data"]
    ys, ye = _get(d, "year_start", int, None), _get(d, "year_end", int, None)
    if (ys is None) != (ye is None):
        raise ConfigError("[data] year_start and year_end go together")
    data = DataConfig(
        path=_get(d, "path", str, None),
        orientation=_get(d, "orientation", str, "rows"),
        time_column=_get(d, "time_column", str, "timestamp"),
        value_column=_get(d, "value_column", str, "value"),
        time_format=_get(d, "time_format", str, None),
        year_range=(ys, ye) if ys is not None else None,
    )
    if data.path and source and not Path(data.path).is_absolute():
        # relative data paths resolve against the config file
        data = replace(data, path=str((Path(source).parent / data.path).resolve()))

    sp = sec["split"]
    split = SplitConfig(
        train=_get(sp, "train", int, 600),
        validation=_get(sp, "validation", int, 200),
        test=_get(sp, "test", int, 200),
        normalization=_get(sp, "normalization", str, "global"),
        lstm_holdout=_get(sp, "lstm_holdout", int, 5),
    )

    a = sec["arh"]
    a0 = ArhConfig()
    arh = ArhConfig(
        enabled=_get(a, "enabled", bool, True),
        method=_get(a, "method", str, a0.method),
        k_grid=_get(a, "k_grid", parse_int_list, a0.k_grid) or a0.k_grid,
        k_n=_get(a, "k_n", int, None),
        alpha=_get(a, "alpha", float, None),
        refit=_get(a, "refit", bool, False),
    )

    l = sec["lstm"]
    t0 = TrainConfig()
    try:
        train = TrainConfig(
            learning_rate=_get(l, "learning_rate", float, t0.learning_rate),
            patience=_get(l, "patience", int, t0.patience),
            max_epochs=_get(l, "max_epochs", int, t0.max_epochs),
            batch_size=_get(l, "batch_size", int, t0.batch_size),
            hidden_size=_get(l, "hidden_size", int, t0.hidden_size),
            optimizer=_get(l, "optimizer", str, t0.optimizer),
            loss=_get(l, "loss", str, t0.loss),
            cell=_get(l, "cell", str, t0.cell),
            freeze_recurrent=_get(l, "freeze_recurrent", bool, t0.freeze_recurrent),
            seed=seed,
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[lstm] {exc}") from None
    lstm = LstmConfig(
        enabled=_get(l, "enabled", bool, True),
        sws=_get(l, "sws", parse_int_list, (1, 2)) or (),
        train=train,
    )

    return ExperimentConfig(
        kind=exp["kind"].strip(),
        seed=seed,
        out=_get(exp, "out", str, "results"),
        simulation=sim,
        nonlinear_input=_get(s, "nonlinear_input", str, "normalized"),
        data=data,
        split=split,
        arh=arh,
        lstm=lstm,
        source=source,
    )
