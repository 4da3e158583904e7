"""The uniform Classifier contract plus shared numerics and model (de)serialization.

Every learner is a pure function of (X, y, hyperparameters, seed): fitting the
same inputs twice yields bit-identical models. predict_proba returns the
class-1 probability per row, always finite and inside [0, 1], and
predict(X, t) is exactly predict_proba(X) >= t.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from ..serialize import read_json, write_json

MODEL_FORMAT_VERSION = "1"

MODEL_REGISTRY: dict[str, type] = {}


def register(cls):
    MODEL_REGISTRY[cls.kind] = cls
    return cls


def sigmoid(z):
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_loss(y, proba, eps: float = 1e-12) -> float:
    """Mean binary cross-entropy with probability clipping."""
    y = np.asarray(y, dtype=np.float64)
    p = np.clip(np.asarray(proba, dtype=np.float64), eps, 1.0 - eps)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def log_loss_from_logits(y, z) -> float:
    """Mean BCE computed from logits without forming probabilities."""
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    # softplus(z) - y*z, with softplus(z) = max(z,0) + log1p(exp(-|z|))
    return float(np.mean(np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))))


def as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("a 2-D matrix", f"{X.ndim}-D input")
    return X


def child_seed(seed: int, *path: int) -> int:
    """Derived integer seed for an independent child RNG stream."""
    return int(np.random.SeedSequence([int(seed), *map(int, path)]).generate_state(1)[0])


class Classifier:
    """Abstract contract over all learners."""

    kind = "abstract"

    def fit(self, X, y, seed: int = 0) -> "Classifier":
        raise NotImplementedError

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)

    def _check_width(self, X: np.ndarray, expected: int) -> None:
        if X.shape[1] != expected:
            raise DimensionMismatch(expected, X.shape[1])

    def to_dict(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_dict(cls, doc: dict) -> "Classifier":
        raise NotImplementedError


def model_from_dict(doc: dict) -> Classifier:
    kind = doc.get("kind")
    if kind not in MODEL_REGISTRY:
        raise ValueError(f"unknown model kind {kind!r}")
    return MODEL_REGISTRY[kind].from_dict(doc)


def save_model(model: Classifier, path) -> None:
    doc = model.to_dict()
    doc["format_version"] = MODEL_FORMAT_VERSION
    write_json(path, doc)


def load_model(path) -> Classifier:
    return model_from_dict(read_json(path))
