"""Logistic regression and a linear SVM, both trained by full-batch
(sub)gradient descent.

The SVM's hinge loss yields no probabilities, so a Platt-style logistic
calibration sigmoid(a*s + b) is fitted on the training decision values s
afterwards; soft voting needs calibrated member probabilities.
"""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteLoss
from .base import (Classifier, as_matrix, log_loss_from_logits, register,
                   sigmoid)


@register
class LogisticRegressionModel(Classifier):
    """L2-regularized logistic regression; weights start at zero."""

    kind = "logistic"

    def __init__(self, learning_rate: float = 0.5, epochs: int = 500, l2: float = 1e-4):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.weights = None
        self.bias = 0.0

    def fit(self, X, y, seed: int = 0):
        X = as_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        n, d = X.shape
        w = np.zeros(d)
        b = 0.0
        with np.errstate(over="ignore", invalid="ignore"):  # divergence is detected, not warned
            for _ in range(self.epochs):
                z = X @ w + b
                p = sigmoid(z)
                grad_w = X.T @ (p - y) / n + self.l2 * w  # bias unregularized
                grad_b = float(np.mean(p - y))
                w -= self.learning_rate * grad_w
                b -= self.learning_rate * grad_b
                if not (np.all(np.isfinite(w)) and np.isfinite(b)):
                    raise NonFiniteLoss("logistic weights")
        loss = log_loss_from_logits(y, X @ w + b)
        if not np.isfinite(loss):
            raise NonFiniteLoss()
        self.weights = w
        self.bias = b
        return self

    def loss(self, X, y) -> float:
        """Regularized training objective at the current weights."""
        X = as_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        data = log_loss_from_logits(y, X @ self.weights + self.bias)
        return data + 0.5 * self.l2 * float(self.weights @ self.weights)

    def predict_proba(self, X) -> np.ndarray:
        X = as_matrix(X)
        self._check_width(X, self.weights.shape[0])
        return sigmoid(X @ self.weights + self.bias)

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "hyper": {"learning_rate": self.learning_rate,
                          "epochs": self.epochs, "l2": self.l2},
                "weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_dict(cls, doc: dict) -> "LogisticRegressionModel":
        model = cls(**doc["hyper"])
        model.weights = np.array(doc["weights"], dtype=np.float64)
        model.bias = float(doc["bias"])
        return model


def logistic_gradient(w, b, X, y, l2: float = 0.0):
    """Gradient of the regularized BCE objective; exposed for oracle tests."""
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    p = sigmoid(X @ w + b)
    return X.T @ (p - y) / len(y) + l2 * w, float(np.mean(p - y))


def logistic_objective(w, b, X, y, l2: float = 0.0) -> float:
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    return log_loss_from_logits(y, X @ w + b) + 0.5 * l2 * float(w @ w)


@register
class LinearSvmModel(Classifier):
    """Soft-margin linear SVM via sub-gradient descent plus Platt calibration.

    Objective: mean hinge loss + ||w||^2 / (2*C). Larger C weakens the
    regularizer, matching the conventional C semantics.
    """

    kind = "svm"

    def __init__(self, learning_rate: float = 0.1, epochs: int = 500, c: float = 1.0,
                 calibration_epochs: int = 300, calibration_lr: float = 0.5):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.c = c
        self.calibration_epochs = calibration_epochs
        self.calibration_lr = calibration_lr
        self.weights = None
        self.bias = 0.0
        self.platt_a = 1.0
        self.platt_b = 0.0

    def decision_values(self, X) -> np.ndarray:
        X = as_matrix(X)
        self._check_width(X, self.weights.shape[0])
        return X @ self.weights + self.bias

    def fit(self, X, y, seed: int = 0):
        X = as_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        t = 2.0 * y - 1.0  # {-1, +1}
        n, d = X.shape
        lam = 1.0 / self.c
        w = np.zeros(d)
        b = 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(self.epochs):
                margins = t * (X @ w + b)
                active = margins < 1.0
                grad_w = lam * w - (t[active, None] * X[active]).sum(axis=0) / n
                grad_b = -float(t[active].sum()) / n
                w -= self.learning_rate * grad_w
                b -= self.learning_rate * grad_b
                if not (np.all(np.isfinite(w)) and np.isfinite(b)):
                    raise NonFiniteLoss("svm weights")
        self.weights = w
        self.bias = b
        self._fit_platt(X @ w + b, y)
        return self

    def _fit_platt(self, decision, y):
        """1-D logistic fit sigmoid(a*s + b) on training decision values."""
        s = np.asarray(decision, dtype=np.float64)
        a, b = 1.0, 0.0
        n = len(s)
        for _ in range(self.calibration_epochs):
            p = sigmoid(a * s + b)
            err = p - y
            grad_a = float(err @ s) / n
            grad_b = float(err.sum()) / n
            a -= self.calibration_lr * grad_a
            b -= self.calibration_lr * grad_b
            if not (np.isfinite(a) and np.isfinite(b)):
                raise NonFiniteLoss("Platt calibration")
        self.platt_a = a
        self.platt_b = b

    def hinge_objective(self, X, y) -> float:
        X = as_matrix(X)
        t = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
        margins = t * (X @ self.weights + self.bias)
        hinge = np.maximum(0.0, 1.0 - margins).mean()
        return hinge + float(self.weights @ self.weights) / (2.0 * self.c)

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.platt_a * self.decision_values(X) + self.platt_b)

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "hyper": {"learning_rate": self.learning_rate, "epochs": self.epochs,
                          "c": self.c,
                          "calibration_epochs": self.calibration_epochs,
                          "calibration_lr": self.calibration_lr},
                "weights": self.weights.tolist(), "bias": self.bias,
                "platt": [self.platt_a, self.platt_b]}

    @classmethod
    def from_dict(cls, doc: dict) -> "LinearSvmModel":
        model = cls(**doc["hyper"])
        model.weights = np.array(doc["weights"], dtype=np.float64)
        model.bias = float(doc["bias"])
        model.platt_a, model.platt_b = (float(v) for v in doc["platt"])
        return model


def hinge_gradient(w, b, X, y, c: float = 1.0):
    """Sub-gradient of the SVM objective; exposed for oracle tests."""
    X = as_matrix(X)
    t = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    n = X.shape[0]
    margins = t * (X @ w + b)
    active = margins < 1.0
    grad_w = w / c - (t[active, None] * X[active]).sum(axis=0) / n
    grad_b = -float(t[active].sum()) / n
    return grad_w, grad_b


def hinge_objective(w, b, X, y, c: float = 1.0) -> float:
    X = as_matrix(X)
    t = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    margins = t * (X @ w + b)
    return float(np.maximum(0.0, 1.0 - margins).mean()) + float(w @ w) / (2.0 * c)
