"""Random forest: bagged CART trees with per-node feature subsampling.

Each tree gets its own RNG streams derived from (seed, tree index), one for
the bootstrap draw and one for feature subsampling, so fitting is a pure
function of (X, y, hyper, seed) no matter how many worker threads build the
trees.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .base import Classifier, as_matrix, child_seed, register
from .tree import DecisionTreeModel, node_from_dict, node_to_dict


@register
class RandomForestModel(Classifier):
    kind = "forest"

    def __init__(self, n_trees: int = 100, max_depth: int | None = None,
                 min_samples_leaf: int = 1, max_features: int | str = "sqrt",
                 bootstrap: bool = True, n_jobs: int = 1):
        if n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {n_trees}")
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.n_jobs = n_jobs
        self.trees: list[DecisionTreeModel] = []
        self.n_features = None

    def _resolve_max_features(self, d: int) -> int:
        if self.max_features == "sqrt":
            return math.ceil(math.sqrt(d))
        if self.max_features is None:
            return d
        return int(self.max_features)

    def fit(self, X, y, seed: int = 0):
        X = as_matrix(X)
        y = np.asarray(y, dtype=np.int64)
        self.n_features = X.shape[1]
        k = self._resolve_max_features(self.n_features)

        def build(i: int) -> DecisionTreeModel:
            if self.bootstrap:
                boot_rng = np.random.default_rng(child_seed(seed, i, 0))
                idx = boot_rng.integers(0, X.shape[0], size=X.shape[0])
                Xb, yb = X[idx], y[idx]
            else:
                Xb, yb = X, y
            tree = DecisionTreeModel(max_depth=self.max_depth,
                                     min_samples_leaf=self.min_samples_leaf,
                                     max_features=k)
            return tree.fit(Xb, yb, seed=child_seed(seed, i, 1))

        if self.n_jobs > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                self.trees = list(pool.map(build, range(self.n_trees)))
        else:
            self.trees = [build(i) for i in range(self.n_trees)]
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = as_matrix(X)
        self._check_width(X, self.n_features)
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict_proba(X)
        return acc / len(self.trees)

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "hyper": {"n_trees": self.n_trees, "max_depth": self.max_depth,
                          "min_samples_leaf": self.min_samples_leaf,
                          "max_features": self.max_features,
                          "bootstrap": self.bootstrap, "n_jobs": self.n_jobs},
                "n_features": self.n_features,
                "trees": [node_to_dict(t.root) for t in self.trees]}

    @classmethod
    def from_dict(cls, doc: dict) -> "RandomForestModel":
        model = cls(**doc["hyper"])
        model.n_features = doc["n_features"]
        model.trees = []
        for node_doc in doc["trees"]:
            tree = DecisionTreeModel(max_depth=model.max_depth,
                                     min_samples_leaf=model.min_samples_leaf)
            tree.n_features = model.n_features
            tree.root = node_from_dict(node_doc)
            model.trees.append(tree)
        return model
