"""Single-block LSTM with a dense head, written directly in numpy.

One forward step on the concatenation z = [h, x]:

    f = sigmoid(W_f z + b_f)      i = sigmoid(W_i z + b_i)
    g = tanh(W_c z + b_c)         o = sigmoid(W_o z + b_o)
    c' = f * c + i * g            h' = o * tanh(c')

After the last curve of the window the prediction is W_y h + b_y.  The
training loss is the squared error averaged over grid points and batch;
early stopping watches validation MARE.

A plain recurrent cell, h' = tanh(A x + B h) and y = out(C h), is kept as
a reference model.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, fields
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from arhlstm.errors import ConfigError, DimensionError, InsufficientDataError
from arhlstm.evaluation import lagged_windows, mare
from arhlstm.function_space import CurveDataset

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
GATES = ("f", "i", "c", "o")
LOSSES = ("mse", "mare")


def sigmoid(x):
    # split by sign to avoid overflow in exp
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass(eq=False)
class LstmParams:
    W_f: np.ndarray
    W_i: np.ndarray
    W_c: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray
    W_y: np.ndarray
    b_y: np.ndarray

    def __post_init__(self):
        H = self.b_f.shape[0]
        T = self.b_y.shape[0]
        for g in GATES:
            if getattr(self, f"W_{g}").shape != (H, H + T) or getattr(self, f"b_{g}").shape != (H,):
                raise DimensionError(f"gate {g} blocks do not match hidden={H}, input={T}")
        if self.W_y.shape != (T, H):
            raise DimensionError(f"dense weights have shape {self.W_y.shape}, expected {(T, H)}")

    @property
    def hidden_size(self) -> int:
        return self.b_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.b_y.shape[0]

    def arrays(self) -> Dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> LstmParams:
        return LstmParams(**{k: v.copy() for k, v in self.arrays().items()})

    @classmethod
    def zeros(cls, input_size: int, hidden_size: int) -> LstmParams:
        H, T = hidden_size, input_size
        blocks = {f"W_{g}": np.zeros((H, H + T)) for g in GATES}
        blocks.update({f"b_{g}": np.zeros(H) for g in GATES})
        return cls(**blocks, W_y=np.zeros((T, H)), b_y=np.zeros(T))

    @classmethod
    def init(cls, input_size: int, hidden_size: int, rng: np.random.Generator) -> LstmParams:
        """Uniform(+-1/sqrt(fan_in)) weights, forget bias 1, other biases 0."""
        H, T = hidden_size, input_size
        p = cls.zeros(T, H)
        bound = 1.0 / np.sqrt(H + T)
        for g in GATES:
            setattr(p, f"W_{g}", rng.uniform(-bound, bound, (H, H + T)))
        p.b_f = np.ones(H)
        p.W_y = rng.uniform(-1.0 / np.sqrt(H), 1.0 / np.sqrt(H), (T, H))
        return p


@dataclass(eq=False)
class LstmState:
    h: np.ndarray
    c: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    patience: int = 5
    max_epochs: int = 2000
    batch_size: int = 32
    sws: int = 1
    seed: int = 0
    hidden_size: int = 64
    optimizer: str = "adam"
    loss: str = "mse"
    cell: str = "lstm"
    freeze_recurrent: bool = False
    rnn_output: str = "sigmoid"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.sws < 1:
            raise ConfigError("sws must be >= 1")
        if self.max_epochs < 0 or self.batch_size < 1 or self.hidden_size < 1:
            raise ConfigError("max_epochs >= 0, batch_size >= 1 and hidden_size >= 1 required")
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"optimizer must be 'sgd' or 'adam', got {self.optimizer!r}")
        if self.loss not in LOSSES:
            raise ConfigError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.cell not in ("lstm", "rnn"):
            raise ConfigError(f"cell must be 'lstm' or 'rnn', got {self.cell!r}")
        if self.rnn_output not in ("sigmoid", "identity"):
            raise ConfigError("rnn_output must be 'sigmoid' or 'identity'")


def make_windows(ds: CurveDataset, sws: int) -> Tuple[np.ndarray, np.ndarray]:
    """All ``(X_i..X_{i+sws-1}) -> X_{i+sws}`` pairs in order: ``(n-sws, sws, T)`` and ``(n-sws, T)``."""
    if sws < 1:
        raise ValueError("window size must be >= 1")
    if ds.n <= sws:
        raise InsufficientDataError(f"{ds.n} curves cannot form a window of {sws} plus a target")
    idx = np.arange(ds.n - sws)[:, None] + np.arange(sws)[None, :]
    return ds.values[idx], ds.values[sws:]


def _as_batch(window, input_size):
    w = np.asarray(window, dtype=float)
    single = w.ndim == 2
    if single:
        w = w[None]
    if w.ndim != 3 or w.shape[2] != input_size or w.shape[1] < 1:
        raise DimensionError(f"window of shape {np.shape(window)} does not match input size {input_size}")
    return w, single


def lstm_forward(p: LstmParams, window) -> Tuple[np.ndarray, dict]:
    """Run the block over a window ``(S, T)`` or a batch ``(B, S, T)`` from a zero state."""
    x, single = _as_batch(window, p.input_size)
    B, S, _ = x.shape
    H = p.hidden_size
    W = np.concatenate([p.W_f, p.W_i, p.W_c, p.W_o], axis=0)
    b = np.concatenate([p.b_f, p.b_i, p.b_c, p.b_o])
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    steps = []
    for t in range(S):
        z = np.concatenate([h, x[:, t]], axis=1)
        a = z @ W.T + b
        f = sigmoid(a[:, :H])
        i = sigmoid(a[:, H : 2 * H])
        g = np.tanh(a[:, 2 * H : 3 * H])
        o = sigmoid(a[:, 3 * H :])
        c_prev = c
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        steps.append((z, f, i, g, o, c_prev, tc))
    y = h @ p.W_y.T + p.b_y
    cache = {
        "steps": steps,
        "h": h,
        "state": LstmState(h, c),
        "single": single,
        "shape": (B, S, p.input_size, H),
        "W": W,
    }
    return (y[0] if single else y), cache


def mse_loss(pred, target) -> float:
    return float(np.mean((np.asarray(pred) - np.asarray(target)) ** 2))


def _loss_and_grad(pred: np.ndarray, target: np.ndarray, loss: str) -> Tuple[float, np.ndarray]:
    """Batch loss averaged over curves and grid points, and its gradient in ``pred``."""
    resid = pred - target
    if loss == "mse":
        return float(np.mean(resid**2)), 2.0 * resid / resid.size
    if loss == "mare":
        scale = np.abs(target)
        return float(np.mean(np.abs(resid) / scale)), np.sign(resid) / scale / resid.size
    raise ValueError(f"unknown loss {loss!r}")


def lstm_backward(p: LstmParams, cache: dict, target, loss: str = "mse") -> Tuple[Dict[str, np.ndarray], float]:
    """Gradients of the training loss with respect to every parameter block.

    ``loss`` is ``"mse"`` (mean squared error) or ``"mare"`` (mean absolute
    relative error, a subgradient at zero residuals).  Returns
    ``(grads, loss_value)``; grads are keyed like ``LstmParams`` fields.
    """
    B, S, T, H = cache["shape"]
    if (T, H) != (p.input_size, p.hidden_size) or len(cache["steps"]) != S:
        raise DimensionError("cache was produced by parameters of a different shape")
    tgt = np.asarray(target, dtype=float).reshape(B, T)
    h_last = cache["h"]
    y = h_last @ p.W_y.T + p.b_y
    value, dy = _loss_and_grad(y, tgt, loss)

    grads = {"W_y": dy.T @ h_last, "b_y": dy.sum(axis=0)}
    dW = np.zeros((4 * H, H + T))
    db = np.zeros(4 * H)
    W = cache["W"]
    dh = dy @ p.W_y
    dc = np.zeros((B, H))
    for z, f, i, g, o, c_prev, tc in reversed(cache["steps"]):
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc**2)
        da = np.concatenate(
            [
                dc * c_prev * f * (1.0 - f),
                dc * g * i * (1.0 - i),
                dc * i * (1.0 - g**2),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dW += da.T @ z
        db += da.sum(axis=0)
        dz = da @ W
        dh = dz[:, :H]
        dc = dc * f
    for k, g in enumerate(GATES):
        grads[f"W_{g}"] = dW[k * H : (k + 1) * H]
        grads[f"b_{g}"] = db[k * H : (k + 1) * H]
    return grads, value


def lstm_predict(p: LstmParams, windows) -> np.ndarray:
    return lstm_forward(p, windows)[0]


# ---------------------------------------------------------------- plain RNN


@dataclass(eq=False)
class RnnParams:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    output: str = "sigmoid"

    def __post_init__(self):
        H, T = self.A.shape
        if self.B.shape != (H, H) or self.C.shape != (T, H):
            raise DimensionError("RNN blocks do not agree: A is HxT, B is HxH, C is TxH")

    @property
    def hidden_size(self) -> int:
        return self.A.shape[0]

    @property
    def input_size(self) -> int:
        return self.A.shape[1]

    def arrays(self) -> Dict[str, np.ndarray]:
        return {"A": self.A, "B": self.B, "C": self.C}

    def copy(self) -> RnnParams:
        return RnnParams(self.A.copy(), self.B.copy(), self.C.copy(), self.output)

    @classmethod
    def init(cls, input_size: int, hidden_size: int, rng: np.random.Generator, output="sigmoid") -> RnnParams:
        H, T = hidden_size, input_size
        return cls(
            rng.uniform(-1 / np.sqrt(T), 1 / np.sqrt(T), (H, T)),
            rng.uniform(-1 / np.sqrt(H), 1 / np.sqrt(H), (H, H)),
            rng.uniform(-1 / np.sqrt(H), 1 / np.sqrt(H), (T, H)),
            output,
        )


def rnn_forward(p: RnnParams, window) -> Tuple[np.ndarray, dict]:
    """``H_n = tanh(A X_n + B H_{n-1})``, ``Y = out(C H_last)`` from a zero hidden state."""
    x, single = _as_batch(window, p.input_size)
    Bsz, S, T = x.shape
    h = np.zeros((Bsz, p.hidden_size))
    hs = [h]
    for t in range(S):
        h = np.tanh(x[:, t] @ p.A.T + h @ p.B.T)
        hs.append(h)
    a = h @ p.C.T
    y = sigmoid(a) if p.output == "sigmoid" else a
    cache = {"x": x, "hs": hs, "y": y, "single": single}
    return (y[0] if single else y), cache


def rnn_backward(p: RnnParams, cache: dict, target, loss: str = "mse") -> Tuple[Dict[str, np.ndarray], float]:
    x, hs, y = cache["x"], cache["hs"], cache["y"]
    Bsz, S, T = x.shape
    tgt = np.asarray(target, dtype=float).reshape(Bsz, T)
    value, dy = _loss_and_grad(y, tgt, loss)
    da = dy * y * (1.0 - y) if p.output == "sigmoid" else dy
    grads = {"C": da.T @ hs[-1], "A": np.zeros_like(p.A), "B": np.zeros_like(p.B)}
    dh = da @ p.C
    for t in range(S - 1, -1, -1):
        dpre = dh * (1.0 - hs[t + 1] ** 2)
        grads["A"] += dpre.T @ x[:, t]
        grads["B"] += dpre.T @ hs[t]
        dh = dpre @ p.B
    return grads, value


# ---------------------------------------------------------------- training


class _Optimizer:
    def __init__(self, kind: str, lr: float, beta1=0.9, beta2=0.999, eps=1e-7):
        self.kind, self.lr = kind, lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params, grads: Dict[str, np.ndarray], frozen=()):
        self.t += 1
        for name, g in grads.items():
            if name in frozen:
                continue
            w = getattr(params, name)
            if self.kind == "sgd":
                w -= self.lr * g
                continue
            m = self.m.setdefault(name, np.zeros_like(g))
            v = self.v.setdefault(name, np.zeros_like(g))
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            mhat = m / (1 - self.beta1**self.t)
            vhat = v / (1 - self.beta2**self.t)
            w -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


@dataclass
class TrainResult:
    params: object
    history: List[Tuple[int, float, float]] = field(default_factory=list)
    best_epoch: Optional[int] = None

    def write_history(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "train_loss", "val_mare"])
            for epoch, loss, vm in self.history:
                w.writerow([epoch, repr(loss), repr(vm)])


def _cell_functions(cfg: TrainConfig) -> Tuple[Callable, Callable, Callable]:
    if cfg.cell == "lstm":
        return (lambda T, rng: LstmParams.init(T, cfg.hidden_size, rng)), lstm_forward, lstm_backward
    return (
        (lambda T, rng: RnnParams.init(T, cfg.hidden_size, rng, cfg.rnn_output)),
        rnn_forward,
        rnn_backward,
    )


def train_lstm(train: CurveDataset, val: CurveDataset, cfg: TrainConfig, init=None) -> TrainResult:
    """Minibatch training with early stopping on validation MARE.

    Validation predictions are teacher-forced: the window for each
    validation curve is the true preceding curves, reaching back into the
    training block.  The parameters from the epoch with the lowest
    validation MARE are returned.
    """
    make_init, forward, backward = _cell_functions(cfg)
    rng = np.random.default_rng(cfg.seed)
    params = init.copy() if init is not None else make_init(train.num_points, rng)
    X, Y = make_windows(train, cfg.sws)
    if val.n == 0:
        raise InsufficientDataError("validation block is empty")
    Xv = lagged_windows(train, val, cfg.sws)
    Yv = val.values

    result = TrainResult(params.copy())
    if cfg.max_epochs == 0:
        return result
    frozen = ("A", "B") if (cfg.cell == "rnn" and cfg.freeze_recurrent) else ()
    opt = _Optimizer(cfg.optimizer, cfg.learning_rate)
    best = np.inf
    stale = 0
    n = X.shape[0]
    bs = min(cfg.batch_size, n)
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, bs):
            idx = order[start : start + bs]
            _, cache = forward(params, X[idx])
            grads, loss = backward(params, cache, Y[idx], cfg.loss)
            opt.step(params, grads, frozen)
            losses.append(loss * len(idx))
        train_loss = float(np.sum(losses) / n)
        val_mare = mare(Yv, forward(params, Xv)[0])
        if not np.isfinite(train_loss) or not np.isfinite(val_mare):
            log.warning("training diverged at epoch %d", epoch)
            break
        result.history.append((epoch, train_loss, val_mare))
        if val_mare < best:
            best, stale = val_mare, 0
            result.params = params.copy()
            result.best_epoch = epoch
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    log.debug("stopped after %d epochs, best epoch %s (val MARE %.4f)",
              len(result.history), result.best_epoch, best)
    return result


def predict_block(params, history: CurveDataset, block: CurveDataset, sws: int) -> np.ndarray:
    """Teacher-forced one-step predictions for every curve of ``block``."""
    windows = lagged_windows(history, block, sws)
    if isinstance(params, RnnParams):
        return rnn_forward(params, windows)[0]
    return lstm_forward(params, windows)[0]


# ---------------------------------------------------------------- checkpoints


def save_params(params: LstmParams, path, sws: int = 1, seed: int = 0) -> None:
    with open(path, "w") as fh:
        fh.write(
            f"LSTMPARAMS version={FORMAT_VERSION} T={params.input_size} "
            f"H={params.hidden_size} sws={sws} seed={seed}\n"
        )
        for name, arr in params.arrays().items():
            a2 = np.atleast_2d(arr)
            fh.write(f"{name} {a2.shape[0]} {a2.shape[1]}\n")
            for row in a2:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_params(path) -> Tuple[LstmParams, dict]:
    with open(path) as fh:
        header = fh.readline().split()
        if not header or header[0] != "LSTMPARAMS":
            raise DimensionError(f"{path}: not an LSTM checkpoint")
        meta = {k: int(v) for k, v in (tok.split("=", 1) for tok in header[1:])}
        if meta["version"] != FORMAT_VERSION:
            raise DimensionError(f"{path}: unsupported checkpoint version {meta['version']}")
        blocks = {}
        while True:
            line = fh.readline()
            if not line:
                break
            if not line.strip():
                continue
            name, r, c = line.split()
            rows = [fh.readline().split() for _ in range(int(r))]
            arr = np.array(rows, dtype=float).reshape(int(r), int(c))
            blocks[name] = arr[0] if name.startswith("b_") else arr
    params = LstmParams(**blocks)
    if (params.input_size, params.hidden_size) != (meta["T"], meta["H"]):
        raise DimensionError(f"{path}: blocks disagree with header dims")
    return params, meta
