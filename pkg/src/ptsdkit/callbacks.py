"""Training-control callbacks and random hyperparameter search.

EarlyStopping halts training after the monitored validation loss fails to
improve for ``patience`` consecutive epochs and hands back the best-epoch
weight snapshot. ReduceLROnPlateau halves (by ``factor``) the learning rate
after a plateau and never goes below ``min_lr``. Both define improvement as
val_loss < best_loss - min_delta.
"""

from __future__ import annotations

import copy
import io
import math
from dataclasses import dataclass, field

import numpy as np


class EarlyStopping:
    """Stop after `patience` epochs without improvement; keep the best weights."""

    def __init__(self, patience: int = 10, min_delta: float = 1e-4):
        self.patience = patience
        self.min_delta = min_delta
        self.best_loss = math.inf
        self.best_epoch = -1
        self.best_weights = None
        self.epochs_since_improve = 0

    def step(self, epoch: int, val_loss: float, current_weights=None) -> bool:
        """Record one epoch; returns True when training should stop.

        ``current_weights`` is snapshotted (deep copy) on improvement so the
        caller can restore the argmin-validation-loss state afterwards.
        """
        if not math.isfinite(val_loss):
            raise ValueError("val_loss must be finite")
        if val_loss < self.best_loss - self.min_delta:
            self.best_loss = val_loss
            self.best_epoch = epoch
            self.best_weights = copy.deepcopy(current_weights)
            self.epochs_since_improve = 0
            return False
        self.epochs_since_improve += 1
        return self.epochs_since_improve >= self.patience


class ReduceLROnPlateau:
    """Multiply lr by `factor` after `patience` stagnant epochs, floored at min_lr."""

    def __init__(self, initial_lr: float, factor: float = 0.5, patience: int = 5,
                 min_lr: float = 1e-6, min_delta: float = 0.0):
        if not 0.0 < factor < 1.0:
            raise ValueError(f"factor must be in (0,1), got {factor}")
        self.current_lr = initial_lr
        self.factor = factor
        self.patience = patience
        self.min_lr = min_lr
        self.min_delta = min_delta
        self.best_loss = math.inf
        self.epochs_since_improve = 0

    def step(self, epoch: int, val_loss: float) -> float:
        """Record one epoch; returns the learning rate for the next epoch."""
        if not math.isfinite(val_loss):
            raise ValueError("val_loss must be finite")
        if val_loss < self.best_loss - self.min_delta:
            self.best_loss = val_loss
            self.epochs_since_improve = 0
        else:
            self.epochs_since_improve += 1
            if self.epochs_since_improve >= self.patience:
                self.current_lr = max(self.current_lr * self.factor, self.min_lr)
                self.epochs_since_improve = 0
        return self.current_lr


# -- random hyperparameter search ------------------------------------------------

DEFAULT_WIDTHS = (64, 128, 256, 512, 1024)
DEFAULT_DROPOUTS = (0.2, 0.3, 0.5)
DEFAULT_LEARNING_RATES = (1e-2, 1e-3, 1e-4)

TRIALS_CSV_HEADER = "trial,units1,units2,units3,units4,dropout,lr,val_score,status"


@dataclass(frozen=True)
class SearchSpace:
    """Candidate grids for the MLP: per-layer widths, one global dropout, lr."""

    layer_widths: tuple[int, ...] = DEFAULT_WIDTHS
    dropout_rates: tuple[float, ...] = DEFAULT_DROPOUTS
    learning_rates: tuple[float, ...] = DEFAULT_LEARNING_RATES
    n_layers: int = 4

    def __post_init__(self):
        for name in ("layer_widths", "dropout_rates", "learning_rates"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if any(not 0.0 <= d < 1.0 for d in self.dropout_rates):
            raise ValueError("dropout rates must be in [0, 1)")
        if any(lr <= 0 for lr in self.learning_rates):
            raise ValueError("learning rates must be positive")

    @property
    def size(self) -> int:
        return (len(self.layer_widths) ** self.n_layers
                * len(self.dropout_rates) * len(self.learning_rates))

    def config_at(self, index: int) -> "TrialConfig":
        """Mixed-radix decoding of a flat config index."""
        if not 0 <= index < self.size:
            raise IndexError(index)
        widths = []
        rem = index
        for _ in range(self.n_layers):
            rem, digit = divmod(rem, len(self.layer_widths))
            widths.append(self.layer_widths[digit])
        rem, d_digit = divmod(rem, len(self.dropout_rates))
        rem, lr_digit = divmod(rem, len(self.learning_rates))
        return TrialConfig(tuple(widths), self.dropout_rates[d_digit],
                           self.learning_rates[lr_digit])


@dataclass(frozen=True)
class TrialConfig:
    hidden_widths: tuple[int, ...]
    dropout: float
    learning_rate: float

    def to_dict(self) -> dict:
        return {"hidden_widths": list(self.hidden_widths),
                "dropout": self.dropout,
                "learning_rate": self.learning_rate}


@dataclass
class Trial:
    index: int
    config: TrialConfig
    score: float | None
    status: str  # "ok" or "failed"
    error: str | None = None


@dataclass
class SearchResult:
    best: TrialConfig | None
    best_score: float | None
    trials: list[Trial] = field(default_factory=list)

    def trials_csv(self) -> str:
        out = io.StringIO()
        out.write(TRIALS_CSV_HEADER + "\n")
        for t in self.trials:
            w = list(t.config.hidden_widths)
            w += [""] * (4 - len(w))  # CSV contract fixes four unit columns
            score = "" if t.score is None else repr(t.score)
            out.write(f"{t.index},{w[0]},{w[1]},{w[2]},{w[3]},"
                      f"{t.config.dropout},{t.config.learning_rate},{score},{t.status}\n")
        return out.getvalue()


def parse_trials_csv(text: str) -> list[Trial]:
    lines = text.strip().split("\n")
    if lines[0] != TRIALS_CSV_HEADER:
        raise ValueError(f"unexpected trials header: {lines[0]!r}")
    trials = []
    for line in lines[1:]:
        trial, u1, u2, u3, u4, dropout, lr, score, status = line.split(",")
        widths = tuple(int(u) for u in (u1, u2, u3, u4) if u != "")
        config = TrialConfig(widths, float(dropout), float(lr))
        trials.append(Trial(int(trial), config,
                            float(score) if score else None, status))
    return trials


def random_search(space: SearchSpace, n_trials: int, seed: int, evaluate) -> SearchResult:
    """Uniform seeded sampling over the space, duplicates skipped.

    Draws config indices with replacement and skips repeats without consuming
    a trial slot, so n_trials >= space.size evaluates the whole space. The
    winner is the argmax validation score, ties broken by earliest trial; a
    trial whose evaluation raises is logged as failed and skipped.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    rng = np.random.default_rng(seed)
    target = min(n_trials, space.size)
    seen = set()
    ordered = []
    draw_cap = 1000 * space.size + 1000
    draws = 0
    while len(ordered) < target and draws < draw_cap:
        idx = int(rng.integers(0, space.size))
        draws += 1
        if idx not in seen:
            seen.add(idx)
            ordered.append(idx)
    # astronomically unlikely fallback: finish coverage deterministically
    if len(ordered) < target:
        for idx in range(space.size):
            if idx not in seen:
                ordered.append(idx)
                seen.add(idx)
                if len(ordered) == target:
                    break

    trials = []
    best = None
    best_score = None
    for trial_no, idx in enumerate(ordered):
        config = space.config_at(idx)
        try:
            score = float(evaluate(config))
        except Exception as exc:  # failed trial: logged, not fatal
            trials.append(Trial(trial_no, config, None, "failed", repr(exc)))
            continue
        trials.append(Trial(trial_no, config, score, "ok"))
        if best_score is None or score > best_score:
            best, best_score = config, score
    return SearchResult(best, best_score, trials)
