"""Gradient-boosted trees for binary log-loss.

Each round fits a regression tree to the residuals y - sigmoid(F) (the
negative gradient of the log-loss); leaf values take a Newton step
sum(residual) / (sum(p*(1-p)) + lambda). Two growth policies stand in for
the usual boosting frameworks: "level" grows every node to a depth cap,
"leaf" repeatedly splits the highest-gain leaf up to a leaf-count cap.
"""

from __future__ import annotations

import heapq

import numpy as np

from ..errors import NonFiniteLoss
from .base import Classifier, as_matrix, log_loss_from_logits, register, sigmoid

GAIN_TOL = 1e-12

PRESETS = {
    "xgb": {"growth": "level", "max_depth": 4, "max_leaves": None},
    "lgbm": {"growth": "leaf", "max_depth": None, "max_leaves": 31},
}


class _RegLeaf:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = float(value)


class _RegNode:
    __slots__ = ("feature", "threshold", "left", "right")

    def __init__(self, feature, threshold, left, right):
        self.feature = int(feature)
        self.threshold = float(threshold)
        self.left = left
        self.right = right


def _reg_node_to_dict(node):
    if isinstance(node, _RegLeaf):
        return {"leaf": node.value}
    return {"feature": node.feature, "threshold": node.threshold,
            "left": _reg_node_to_dict(node.left), "right": _reg_node_to_dict(node.right)}


def _reg_node_from_dict(doc):
    if "leaf" in doc:
        return _RegLeaf(doc["leaf"])
    return _RegNode(doc["feature"], doc["threshold"],
                    _reg_node_from_dict(doc["left"]), _reg_node_from_dict(doc["right"]))


def _reg_predict(node, X, idx, out):
    if isinstance(node, _RegLeaf):
        out[idx] = node.value
        return
    mask = X[idx, node.feature] <= node.threshold
    _reg_predict(node.left, X, idx[mask], out)
    _reg_predict(node.right, X, idx[~mask], out)


def _leaf_value(g, h, idx, reg_lambda):
    denom = float(h[idx].sum()) + reg_lambda
    if denom == 0.0:
        return 0.0
    return float(g[idx].sum()) / denom


def _find_split(X, g, idx, min_leaf):
    """Best SSE-gain split of the residuals g over rows idx.

    Gain = (sum_L)^2/n_L + (sum_R)^2/n_R - (sum)^2/n. Returns
    (gain, feature, threshold, left_idx, right_idx) or None. Ties resolve to
    the lower feature index, then the lower threshold.
    """
    m = len(idx)
    if m < 2 * min_leaf or m < 2:
        return None
    g_node = g[idx]
    total = float(g_node.sum())
    base = total * total / m
    best = None
    for f in range(X.shape[1]):
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        cum = np.cumsum(g_node[order], dtype=np.float64)[:-1]
        sizes_left = np.arange(1, m, dtype=np.float64)
        valid = (sv[1:] > sv[:-1]) & (sizes_left >= min_leaf) \
            & ((m - sizes_left) >= min_leaf)
        if not np.any(valid):
            continue
        sizes_right = m - sizes_left
        gain = cum ** 2 / sizes_left + (total - cum) ** 2 / sizes_right - base
        gain[~valid] = -np.inf
        i = int(np.argmax(gain))  # first maximum -> lowest threshold
        if gain[i] <= GAIN_TOL:
            continue
        if best is None or gain[i] > best[0]:
            order_idx = idx[order]
            thr = (sv[i] + sv[i + 1]) / 2.0
            best = (float(gain[i]), f, float(thr), order_idx[:i + 1], order_idx[i + 1:])
    return best


def _grow_level(X, g, h, idx, depth, max_depth, min_leaf, reg_lambda):
    if max_depth is not None and depth >= max_depth:
        return _RegLeaf(_leaf_value(g, h, idx, reg_lambda))
    found = _find_split(X, g, idx, min_leaf)
    if found is None:
        return _RegLeaf(_leaf_value(g, h, idx, reg_lambda))
    _, f, thr, left_idx, right_idx = found
    return _RegNode(f, thr,
                    _grow_level(X, g, h, left_idx, depth + 1, max_depth, min_leaf, reg_lambda),
                    _grow_level(X, g, h, right_idx, depth + 1, max_depth, min_leaf, reg_lambda))


def _grow_leafwise(X, g, h, idx, max_leaves, max_depth, min_leaf, reg_lambda):
    """Split the highest-gain leaf first until max_leaves; heap ties go to the
    earlier-pushed candidate so growth is deterministic."""
    root = {"idx": idx, "depth": 0}
    heap = []
    counter = 0

    def push(leaf):
        nonlocal counter
        if max_depth is not None and leaf["depth"] >= max_depth:
            return
        found = _find_split(X, g, leaf["idx"], min_leaf)
        if found is not None:
            heapq.heappush(heap, (-found[0], counter, leaf, found))
            counter += 1

    push(root)
    n_leaves = 1
    while heap and n_leaves < max_leaves:
        _, _, leaf, found = heapq.heappop(heap)
        _, f, thr, left_idx, right_idx = found
        left = {"idx": left_idx, "depth": leaf["depth"] + 1}
        right = {"idx": right_idx, "depth": leaf["depth"] + 1}
        leaf.clear()
        leaf.update(feature=f, threshold=thr, left=left, right=right)
        push(left)
        push(right)
        n_leaves += 1

    def finalize(node):
        if "idx" in node:
            return _RegLeaf(_leaf_value(g, h, node["idx"], reg_lambda))
        return _RegNode(node["feature"], node["threshold"],
                        finalize(node["left"]), finalize(node["right"]))

    return finalize(root)


@register
class GradientBoostingModel(Classifier):
    """Boosted regression trees with a class-prior log-odds base score."""

    kind = "gbt"

    def __init__(self, n_rounds: int = 100, learning_rate: float = 0.1,
                 max_depth: int | None = 4, max_leaves: int | None = None,
                 growth: str = "level", reg_lambda: float = 1.0,
                 min_samples_leaf: int = 1, preset: str | None = None):
        if n_rounds < 1:
            raise ValueError(f"n_rounds must be >= 1, got {n_rounds}")
        if growth not in ("level", "leaf"):
            raise ValueError(f"growth must be 'level' or 'leaf', got {growth!r}")
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.max_leaves = max_leaves
        self.growth = growth
        self.reg_lambda = reg_lambda
        self.min_samples_leaf = min_samples_leaf
        self.preset = preset
        self.f0 = 0.0
        self.trees: list = []
        self.train_losses: list[float] = []
        self.n_features = None

    @classmethod
    def from_preset(cls, preset: str, **overrides) -> "GradientBoostingModel":
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}; available: {sorted(PRESETS)}")
        params = dict(PRESETS[preset])
        params.update(overrides)
        return cls(preset=preset, **params)

    def fit(self, X, y, seed: int = 0):
        X = as_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        self.n_features = X.shape[1]
        prior = float(np.clip(y.mean(), 1e-12, 1.0 - 1e-12))
        self.f0 = float(np.log(prior / (1.0 - prior)))
        F = np.full(X.shape[0], self.f0)
        self.trees = []
        self.train_losses = [log_loss_from_logits(y, F)]
        all_idx = np.arange(X.shape[0])
        for _ in range(self.n_rounds):
            p = sigmoid(F)
            g = y - p
            h = p * (1.0 - p)
            if self.growth == "level":
                root = _grow_level(X, g, h, all_idx, 0, self.max_depth,
                                   self.min_samples_leaf, self.reg_lambda)
            else:
                root = _grow_leafwise(X, g, h, all_idx,
                                      self.max_leaves if self.max_leaves else 31,
                                      self.max_depth, self.min_samples_leaf,
                                      self.reg_lambda)
            self.trees.append(root)
            step = np.empty(X.shape[0])
            _reg_predict(root, X, all_idx, step)
            F = F + self.learning_rate * step
            loss = log_loss_from_logits(y, F)
            if not np.isfinite(loss):
                raise NonFiniteLoss()
            self.train_losses.append(loss)
        return self

    def decision_function(self, X) -> np.ndarray:
        X = as_matrix(X)
        self._check_width(X, self.n_features)
        F = np.full(X.shape[0], self.f0)
        idx = np.arange(X.shape[0])
        step = np.empty(X.shape[0])
        for root in self.trees:
            _reg_predict(root, X, idx, step)
            F += self.learning_rate * step
        return F

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "hyper": {"n_rounds": self.n_rounds, "learning_rate": self.learning_rate,
                          "max_depth": self.max_depth, "max_leaves": self.max_leaves,
                          "growth": self.growth, "reg_lambda": self.reg_lambda,
                          "min_samples_leaf": self.min_samples_leaf,
                          "preset": self.preset},
                "n_features": self.n_features,
                "f0": self.f0,
                "trees": [_reg_node_to_dict(t) for t in self.trees]}

    @classmethod
    def from_dict(cls, doc: dict) -> "GradientBoostingModel":
        model = cls(**doc["hyper"])
        model.n_features = doc["n_features"]
        model.f0 = float(doc["f0"])
        model.trees = [_reg_node_from_dict(t) for t in doc["trees"]]
        return model
