"""Greedy CART classifier with Gini impurity.

Split thresholds sit at midpoints of consecutive distinct sorted feature
values; rows with value <= threshold go left. Ties between equal-impurity
splits resolve to the lower feature index, then the lower threshold, which
falls out of scanning features in ascending order and keeping only strictly
better candidates. Growth stops at max depth, min leaf size or purity.
"""

from __future__ import annotations

import numpy as np

from .base import Classifier, as_matrix, register


def gini_impurity(labels) -> float:
    """1 - sum(p_c^2) over the class proportions of a binary label vector."""
    y = np.asarray(labels)
    n = len(y)
    if n == 0:
        return 0.0
    p = float(np.sum(y)) / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def weighted_gini(left_labels, right_labels) -> float:
    nl, nr = len(left_labels), len(right_labels)
    total = nl + nr
    return (nl * gini_impurity(left_labels) + nr * gini_impurity(right_labels)) / total


class _Leaf:
    __slots__ = ("prob", "n")

    def __init__(self, prob, n):
        self.prob = float(prob)
        self.n = int(n)


class _Node:
    __slots__ = ("feature", "threshold", "left", "right")

    def __init__(self, feature, threshold, left, right):
        self.feature = int(feature)
        self.threshold = float(threshold)
        self.left = left
        self.right = right


def best_split(X, y, feature_indices, min_samples_leaf: int = 1):
    """Scan candidate features for the impurity-minimizing (feature, threshold).

    Returns (feature, threshold, weighted_impurity) or None when no boundary
    satisfies the leaf-size constraint. ``feature_indices`` must be ascending
    so the tie-break order is well defined.
    """
    m = X.shape[0]
    total_pos = float(np.sum(y))
    best = None  # (weighted_impurity, feature, threshold)
    for f in feature_indices:
        v = X[:, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        sy = y[order]
        cum_pos = np.cumsum(sy, dtype=np.float64)
        sizes_left = np.arange(1, m, dtype=np.float64)
        distinct = sv[1:] > sv[:-1]
        valid = distinct & (sizes_left >= min_samples_leaf) \
            & ((m - sizes_left) >= min_samples_leaf)
        if not np.any(valid):
            continue
        pos_left = cum_pos[:-1]
        neg_left = sizes_left - pos_left
        sizes_right = m - sizes_left
        pos_right = total_pos - pos_left
        neg_right = sizes_right - pos_right
        # m * weighted impurity, dropping the constant m term
        score = -(pos_left ** 2 + neg_left ** 2) / sizes_left \
            - (pos_right ** 2 + neg_right ** 2) / sizes_right
        score[~valid] = np.inf
        i = int(np.argmin(score))  # first minimum -> lowest threshold
        impurity = (m + score[i]) / m
        if best is None or impurity < best[0]:
            thr = (sv[i] + sv[i + 1]) / 2.0
            best = (float(impurity), int(f), float(thr))
    if best is None:
        return None
    return best[1], best[2], best[0]


@register
class DecisionTreeModel(Classifier):
    """Binary CART; leaves hold class-1 frequencies."""

    kind = "tree"

    def __init__(self, max_depth: int | None = None, min_samples_leaf: int = 1,
                 max_features: int | None = None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.root = None
        self.n_features = None

    def fit(self, X, y, seed: int = 0):
        X = as_matrix(X)
        y = np.asarray(y, dtype=np.int64)
        self.n_features = X.shape[1]
        rng = np.random.default_rng(seed)
        self.root = self._grow(X, y, depth=0, rng=rng)
        return self

    def _grow(self, X, y, depth, rng):
        m = X.shape[0]
        pos = float(np.sum(y))
        if pos == 0.0 or pos == m:
            return _Leaf(pos / m, m)
        if self.max_depth is not None and depth >= self.max_depth:
            return _Leaf(pos / m, m)
        if m < 2 * self.min_samples_leaf:
            return _Leaf(pos / m, m)
        d = X.shape[1]
        if self.max_features is not None and self.max_features < d:
            feats = np.sort(rng.choice(d, size=self.max_features, replace=False))
        else:
            feats = np.arange(d)
        found = best_split(X, y, feats, self.min_samples_leaf)
        if found is None:
            return _Leaf(pos / m, m)
        f, thr, _ = found
        mask = X[:, f] <= thr
        left = self._grow(X[mask], y[mask], depth + 1, rng)
        right = self._grow(X[~mask], y[~mask], depth + 1, rng)
        return _Node(f, thr, left, right)

    def predict_proba(self, X) -> np.ndarray:
        X = as_matrix(X)
        self._check_width(X, self.n_features)
        out = np.empty(X.shape[0], dtype=np.float64)
        self._fill(self.root, X, np.arange(X.shape[0]), out)
        return out

    def _fill(self, node, X, idx, out):
        if isinstance(node, _Leaf):
            out[idx] = node.prob
            return
        mask = X[idx, node.feature] <= node.threshold
        self._fill(node.left, X, idx[mask], out)
        self._fill(node.right, X, idx[~mask], out)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "hyper": {"max_depth": self.max_depth,
                          "min_samples_leaf": self.min_samples_leaf,
                          "max_features": self.max_features},
                "n_features": self.n_features,
                "root": node_to_dict(self.root)}

    @classmethod
    def from_dict(cls, doc: dict) -> "DecisionTreeModel":
        model = cls(**doc["hyper"])
        model.n_features = doc["n_features"]
        model.root = node_from_dict(doc["root"])
        return model


def node_to_dict(node) -> dict:
    if isinstance(node, _Leaf):
        return {"leaf": {"p": node.prob, "n": node.n}}
    return {"feature": node.feature, "threshold": node.threshold,
            "left": node_to_dict(node.left), "right": node_to_dict(node.right)}


def node_from_dict(doc: dict):
    if "leaf" in doc:
        return _Leaf(doc["leaf"]["p"], doc["leaf"]["n"])
    return _Node(doc["feature"], doc["threshold"],
                 node_from_dict(doc["left"]), node_from_dict(doc["right"]))
