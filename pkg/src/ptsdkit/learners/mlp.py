"""Multilayer perceptron with batch normalization and inverted dropout.

Architecture: a stack of hidden blocks (affine -> batch-norm -> ReLU ->
dropout) followed by a single-neuron sigmoid output. Train mode normalizes
with batch statistics and applies inverted dropout (mask scaled by 1/(1-p) so
inference needs no rescaling); inference mode uses the running statistics and
no dropout. Running stats update with momentum 0.9 in train mode only.

Trained by mini-batch SGD with momentum on binary cross-entropy; biases feed
into batch-norm and therefore receive (exactly) zero gradient, but they are
kept to match the declared parameter set.
"""

from __future__ import annotations

import copy
import io
from dataclasses import dataclass, field

import numpy as np

from ..callbacks import EarlyStopping, ReduceLROnPlateau
from ..errors import BatchTooSmall, DegenerateSplit, NonFiniteLoss
from .base import Classifier, as_matrix, child_seed, log_loss, register, sigmoid

HISTORY_CSV_HEADER = "epoch,train_loss,train_acc,val_loss,val_acc,lr"

DEFAULT_HIDDEN = (1024, 512, 256, 128)


@dataclass(frozen=True)
class MlpHyper:
    hidden_widths: tuple[int, ...] = DEFAULT_HIDDEN
    dropout: float = 0.3
    batch_size: int = 32
    epochs: int = 100
    learning_rate: float = 1e-3
    momentum: float = 0.9
    val_fraction: float = 0.1
    bn_eps: float = 1e-5
    bn_momentum: float = 0.9

    def to_dict(self) -> dict:
        return {"hidden_widths": list(self.hidden_widths), "dropout": self.dropout,
                "batch_size": self.batch_size, "epochs": self.epochs,
                "learning_rate": self.learning_rate, "momentum": self.momentum,
                "val_fraction": self.val_fraction, "bn_eps": self.bn_eps,
                "bn_momentum": self.bn_momentum}


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float
    lr: float


@dataclass
class TrainingHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(HISTORY_CSV_HEADER + "\n")
        for r in self.records:
            out.write(f"{r.epoch},{r.train_loss!r},{r.train_acc!r},"
                      f"{r.val_loss!r},{r.val_acc!r},{r.lr!r}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TrainingHistory":
        lines = text.strip().split("\n")
        if lines[0] != HISTORY_CSV_HEADER:
            raise ValueError(f"unexpected history header: {lines[0]!r}")
        records = []
        for line in lines[1:]:
            e, tl, ta, vl, va, lr = line.split(",")
            records.append(EpochRecord(int(e), float(tl), float(ta),
                                       float(vl), float(va), float(lr)))
        return cls(records)


@register
class MlpModel(Classifier):
    kind = "mlp"

    def __init__(self, n_inputs: int = 7, hyper: MlpHyper | None = None):
        self.hyper = hyper or MlpHyper()
        self.n_inputs = n_inputs
        self.W: list[np.ndarray] = []
        self.b: list[np.ndarray] = []
        self.gamma: list[np.ndarray] = []
        self.beta: list[np.ndarray] = []
        self.run_mean: list[np.ndarray] = []
        self.run_var: list[np.ndarray] = []
        self.W_out: np.ndarray | None = None
        self.b_out: np.ndarray | None = None

    @property
    def layer_widths(self) -> list[int]:
        return [self.n_inputs, *self.hyper.hidden_widths, 1]

    def initialize(self, seed: int = 0) -> "MlpModel":
        """He-uniform hidden weights, Xavier-uniform output, zero biases."""
        rng = np.random.default_rng(child_seed(seed, 0))
        self.W, self.b = [], []
        self.gamma, self.beta = [], []
        self.run_mean, self.run_var = [], []
        fan_in = self.n_inputs
        for width in self.hyper.hidden_widths:
            lim = np.sqrt(6.0 / fan_in)
            self.W.append(rng.uniform(-lim, lim, size=(fan_in, width)))
            self.b.append(np.zeros(width))
            self.gamma.append(np.ones(width))
            self.beta.append(np.zeros(width))
            self.run_mean.append(np.zeros(width))
            self.run_var.append(np.ones(width))
            fan_in = width
        lim = np.sqrt(6.0 / (fan_in + 1))
        self.W_out = rng.uniform(-lim, lim, size=(fan_in, 1))
        self.b_out = np.zeros(1)
        return self

    # -- parameter plumbing (snapshots, gradient checking) -------------------

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        named = []
        for layer in range(len(self.W)):
            named.append((f"W{layer}", self.W[layer]))
            named.append((f"b{layer}", self.b[layer]))
            named.append((f"gamma{layer}", self.gamma[layer]))
            named.append((f"beta{layer}", self.beta[layer]))
        named.append(("W_out", self.W_out))
        named.append(("b_out", self.b_out))
        return named

    def snapshot(self) -> dict:
        return {
            "W": [w.copy() for w in self.W], "b": [v.copy() for v in self.b],
            "gamma": [v.copy() for v in self.gamma], "beta": [v.copy() for v in self.beta],
            "run_mean": [v.copy() for v in self.run_mean],
            "run_var": [v.copy() for v in self.run_var],
            "W_out": self.W_out.copy(), "b_out": self.b_out.copy(),
        }

    def restore(self, snap: dict) -> None:
        self.W = [w.copy() for w in snap["W"]]
        self.b = [v.copy() for v in snap["b"]]
        self.gamma = [v.copy() for v in snap["gamma"]]
        self.beta = [v.copy() for v in snap["beta"]]
        self.run_mean = [v.copy() for v in snap["run_mean"]]
        self.run_var = [v.copy() for v in snap["run_var"]]
        self.W_out = snap["W_out"].copy()
        self.b_out = snap["b_out"].copy()

    # -- contract -------------------------------------------------------------

    def fit(self, X, y, seed: int = 0, callbacks=None):
        model, _ = fit_mlp(X, y, self.hyper, callbacks=callbacks, seed=seed,
                           model=self)
        return model

    def predict_proba(self, X) -> np.ndarray:
        probs, _ = mlp_forward(self, X, mode="infer")
        return probs

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "n_inputs": self.n_inputs,
                "hyper": self.hyper.to_dict(),
                "layers": [{"W": self.W[i].tolist(), "b": self.b[i].tolist(),
                            "gamma": self.gamma[i].tolist(),
                            "beta": self.beta[i].tolist(),
                            "run_mean": self.run_mean[i].tolist(),
                            "run_var": self.run_var[i].tolist()}
                           for i in range(len(self.W))],
                "output": {"W": self.W_out.tolist(), "b": self.b_out.tolist()}}

    @classmethod
    def from_dict(cls, doc: dict) -> "MlpModel":
        hyper_doc = dict(doc["hyper"])
        hyper_doc["hidden_widths"] = tuple(hyper_doc["hidden_widths"])
        model = cls(n_inputs=doc["n_inputs"], hyper=MlpHyper(**hyper_doc))
        for layer in doc["layers"]:
            model.W.append(np.array(layer["W"], dtype=np.float64))
            model.b.append(np.array(layer["b"], dtype=np.float64))
            model.gamma.append(np.array(layer["gamma"], dtype=np.float64))
            model.beta.append(np.array(layer["beta"], dtype=np.float64))
            model.run_mean.append(np.array(layer["run_mean"], dtype=np.float64))
            model.run_var.append(np.array(layer["run_var"], dtype=np.float64))
        model.W_out = np.array(doc["output"]["W"], dtype=np.float64)
        model.b_out = np.array(doc["output"]["b"], dtype=np.float64)
        return model


def mlp_forward(model: MlpModel, X, mode: str = "infer", rng=None,
                dropout_override: float | None = None,
                update_running: bool | None = None):
    """Forward pass; returns (class-1 probabilities, activation cache).

    Train mode uses batch statistics (raising BatchTooSmall for batches of
    fewer than 2 rows) and inverted dropout driven by ``rng``. Running stats
    are updated in train mode unless ``update_running`` is False.
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
    X = as_matrix(X)
    model._check_width(X, model.n_inputs)
    train = mode == "train"
    if train and X.shape[0] < 2:
        raise BatchTooSmall(X.shape[0])
    if update_running is None:
        update_running = train
    dropout = model.hyper.dropout if dropout_override is None else dropout_override
    if train and dropout > 0.0 and rng is None:
        raise ValueError("train-mode forward with dropout needs an rng")

    eps = model.hyper.bn_eps
    mom = model.hyper.bn_momentum
    a = X
    layers = []
    for i in range(len(model.W)):
        z = a @ model.W[i] + model.b[i]
        if train:
            mu = z.mean(axis=0)
            var = z.var(axis=0)  # population variance over the batch
            if update_running:
                model.run_mean[i] = mom * model.run_mean[i] + (1.0 - mom) * mu
                model.run_var[i] = mom * model.run_var[i] + (1.0 - mom) * var
        else:
            mu = model.run_mean[i]
            var = model.run_var[i]
        inv_std = 1.0 / np.sqrt(var + eps)
        zhat = (z - mu) * inv_std
        h = model.gamma[i] * zhat + model.beta[i]
        r = np.maximum(h, 0.0)
        if train and dropout > 0.0:
            mask = (rng.uniform(size=r.shape) >= dropout) / (1.0 - dropout)
            a_next = r * mask
        else:
            mask = None
            a_next = r
        layers.append({"a_prev": a, "z": z, "mu": mu, "var": var,
                       "inv_std": inv_std, "zhat": zhat, "h": h, "r": r,
                       "mask": mask})
        a = a_next
    z_out = a @ model.W_out + model.b_out
    probs = sigmoid(z_out[:, 0])
    cache = {"layers": layers, "a_last": a, "z_out": z_out, "train": train}
    return probs, cache


def mlp_backward(model: MlpModel, cache: dict, probs: np.ndarray, y) -> dict:
    """Gradients of mean BCE w.r.t. every parameter, given a forward cache."""
    y = np.asarray(y, dtype=np.float64)
    m = y.shape[0]
    grads = {}
    dz_out = ((probs - y) / m)[:, None]
    grads["W_out"] = cache["a_last"].T @ dz_out
    grads["b_out"] = dz_out.sum(axis=0)
    da = dz_out @ model.W_out.T

    for i in range(len(model.W) - 1, -1, -1):
        layer = cache["layers"][i]
        if layer["mask"] is not None:
            da = da * layer["mask"]
        dh = da * (layer["h"] > 0.0)
        grads[f"gamma{i}"] = (dh * layer["zhat"]).sum(axis=0)
        grads[f"beta{i}"] = dh.sum(axis=0)
        dzhat = dh * model.gamma[i]
        if cache["train"]:
            z_c = layer["z"] - layer["mu"]
            inv = layer["inv_std"]
            dvar = (dzhat * z_c).sum(axis=0) * (-0.5) * inv ** 3
            dmu = -(dzhat.sum(axis=0)) * inv + dvar * (-2.0 / m) * z_c.sum(axis=0)
            dz = dzhat * inv + dvar * 2.0 * z_c / m + dmu / m
        else:
            dz = dzhat * layer["inv_std"]
        grads[f"W{i}"] = layer["a_prev"].T @ dz
        grads[f"b{i}"] = dz.sum(axis=0)
        da = dz @ model.W[i].T
    return grads


def training_loss(model: MlpModel, X, y) -> float:
    """Train-mode BCE with dropout off and running stats untouched.

    Pure in the model parameters; this is the function the finite-difference
    gradient oracle perturbs.
    """
    probs, _ = mlp_forward(model, X, mode="train", dropout_override=0.0,
                           update_running=False)
    return log_loss(y, probs)


def training_gradients(model: MlpModel, X, y) -> dict:
    """Analytic gradients matching training_loss (dropout off)."""
    probs, cache = mlp_forward(model, X, mode="train", dropout_override=0.0,
                               update_running=False)
    return mlp_backward(model, cache, probs, np.asarray(y, dtype=np.float64))


def _epoch_metrics(model: MlpModel, X, y) -> tuple[float, float]:
    probs, _ = mlp_forward(model, X, mode="infer")
    loss = log_loss(y, probs)
    acc = float(np.mean((probs >= 0.5).astype(np.int64) == y))
    return loss, acc


def fit_mlp(X, y, hyper: MlpHyper | None = None, callbacks=None, seed: int = 0,
            model: MlpModel | None = None) -> tuple[MlpModel, TrainingHistory]:
    """Mini-batch SGD with momentum on BCE; returns (model, per-epoch history).

    A stratified ``val_fraction`` of the training data is held out for the
    callbacks and the history's validation columns; when the holdout is
    infeasible (too few rows or a missing class) validation metrics fall back
    to the training split. Early stopping restores the best-validation-loss
    snapshot. Epoch metrics come from a deterministic inference-mode full pass
    at the end of each epoch; a trailing mini-batch of one row is folded into
    its predecessor because train-mode batch norm needs at least two rows.
    """
    from ..preprocess import stratified_split

    X = as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    hyper = hyper or MlpHyper()
    if model is None:
        model = MlpModel(n_inputs=X.shape[1], hyper=hyper)
    model.n_inputs = X.shape[1]
    model.initialize(seed=seed)

    if hyper.val_fraction > 0.0:
        try:
            split = stratified_split(y, hyper.val_fraction, child_seed(seed, 1))
            train_idx = np.array(split.train_rows)
            val_idx = np.array(split.test_rows)
        except DegenerateSplit:
            train_idx = np.arange(X.shape[0])
            val_idx = train_idx
    else:
        train_idx = np.arange(X.shape[0])
        val_idx = train_idx
    X_tr, y_tr = X[train_idx], y[train_idx]
    X_val, y_val = X[val_idx], y[val_idx]

    callbacks = list(callbacks) if callbacks else []
    early = next((c for c in callbacks if isinstance(c, EarlyStopping)), None)
    plateau = next((c for c in callbacks if isinstance(c, ReduceLROnPlateau)), None)

    shuffle_rng = np.random.default_rng(child_seed(seed, 2))
    dropout_rng = np.random.default_rng(child_seed(seed, 3))
    velocity = {name: np.zeros_like(p) for name, p in model.parameters()}
    lr = plateau.current_lr if plateau is not None else hyper.learning_rate
    history = TrainingHistory()

    n = X_tr.shape[0]
    batch = max(2, min(hyper.batch_size, n))
    for epoch in range(hyper.epochs):
        order = shuffle_rng.permutation(n)
        starts = list(range(0, n, batch))
        if len(starts) > 1 and n - starts[-1] == 1:
            starts.pop()  # fold the orphan row into the previous batch
        for si, start in enumerate(starts):
            stop = starts[si + 1] if si + 1 < len(starts) else n
            rows = order[start:stop]
            probs, cache = mlp_forward(model, X_tr[rows], mode="train",
                                       rng=dropout_rng)
            grads = mlp_backward(model, cache, probs, y_tr[rows])
            for name, param in model.parameters():
                v = velocity[name]
                v *= hyper.momentum
                v -= lr * grads[name]
                param += v

        train_loss, train_acc = _epoch_metrics(model, X_tr, y_tr)
        val_loss, val_acc = _epoch_metrics(model, X_val, y_val)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise NonFiniteLoss()
        history.records.append(EpochRecord(epoch, train_loss, train_acc,
                                           val_loss, val_acc, lr))

        stop_now = False
        if early is not None and early.step(epoch, val_loss, model.snapshot()):
            stop_now = True
        if plateau is not None:
            lr = plateau.step(epoch, val_loss)
        if stop_now:
            break

    if early is not None and early.best_weights is not None:
        model.restore(early.best_weights)
    return model, history
