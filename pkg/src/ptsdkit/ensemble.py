"""Soft-voting ensemble: the weighted mean of member class-1 probabilities.

Two named member compositions ship as presets. ``ensemble3`` pairs the MLP
with a random forest and gradient boosting; ``ensemble6`` adds logistic
regression, the linear SVM and a second (leaf-wise) boosting preset. Weights
default to uniform and always normalize to sum 1.
"""

from __future__ import annotations

import numpy as np

from .callbacks import EarlyStopping, ReduceLROnPlateau
from .errors import DimensionMismatch, EmptyEnsemble
from .learners import (Classifier, DecisionTreeModel, GradientBoostingModel,
                       LinearSvmModel, LogisticRegressionModel, MlpHyper,
                       MlpModel, RandomForestModel, TrainingHistory)
from .learners.base import child_seed
from .learners.mlp import fit_mlp

ENSEMBLE_PRESETS = {
    "ensemble3": ("mlp", "forest", "gbt-xgb"),
    "ensemble6": ("logistic", "svm", "forest", "gbt-xgb", "gbt-lgbm", "mlp"),
}


def build_member(spec: str, params: dict | None = None) -> Classifier:
    """Construct an unfitted member from its spec string ("kind" or "gbt-preset")."""
    params = dict(params or {})
    if spec == "logistic":
        return LogisticRegressionModel(**params)
    if spec == "svm":
        return LinearSvmModel(**params)
    if spec == "forest":
        return RandomForestModel(**params)
    if spec in ("gbt", "gbt-xgb"):
        return GradientBoostingModel.from_preset("xgb", **params)
    if spec == "gbt-lgbm":
        return GradientBoostingModel.from_preset("lgbm", **params)
    if spec == "tree":
        return DecisionTreeModel(**params)
    if spec == "mlp":
        if "hidden_widths" in params:
            params["hidden_widths"] = tuple(params["hidden_widths"])
        return MlpModel(hyper=MlpHyper(**params))
    raise ValueError(f"unknown model spec {spec!r}")


class VotingEnsemble:
    """Fitted members plus normalized non-negative weights."""

    def __init__(self, members: list[tuple[str, Classifier]], weights=None):
        if len(members) < 2:
            raise EmptyEnsemble(len(members))
        self.members = list(members)
        if weights is None:
            weights = np.full(len(members), 1.0 / len(members))
        else:
            weights = np.asarray(weights, dtype=np.float64)
            if weights.shape[0] != len(members):
                raise DimensionMismatch(len(members), weights.shape[0])
            if np.any(weights < 0):
                raise ValueError("ensemble weights must be non-negative")
            total = np.sort(weights).sum()  # order-independent normalization
            if total <= 0:
                raise ValueError("ensemble weights must not all be zero")
            weights = weights / total
        self.weights = weights

    def predict_proba(self, X) -> np.ndarray:
        return soft_vote(self, X)

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)

    def member_histories(self) -> dict[str, TrainingHistory]:
        out = {}
        for name, member in self.members:
            history = getattr(member, "history", None)
            if history is not None:
                out[name] = history
        return out

    def manifest(self, member_files: dict[str, str]) -> dict:
        """Manifest JSON document referencing member model files plus weights."""
        return {"members": [{"name": name, "file": member_files[name]}
                            for name, _ in self.members],
                "weights": self.weights.tolist()}


def soft_vote(ensemble: VotingEnsemble, X) -> np.ndarray:
    """p(x) = sum_i w_i * p_i(x); a convex combination of member outputs.

    Contributions are summed in sorted order per row, so reordering members
    (with their weights) leaves the output bit-identical.
    """
    if len(ensemble.members) == 0:
        raise EmptyEnsemble(0)
    contributions = np.stack([w * member.predict_proba(X)
                              for (_, member), w in zip(ensemble.members,
                                                        ensemble.weights)])
    contributions.sort(axis=0)
    return contributions.sum(axis=0)


def fit_ensemble(X, y, member_specs, seed: int = 0, weights=None,
                 member_params: dict | None = None,
                 mlp_callbacks: str = "default") -> VotingEnsemble:
    """Fit each member independently on the same data with derived seeds.

    ``member_specs`` is a list of spec strings (see build_member) or a preset
    name from ENSEMBLE_PRESETS. The MLP member trains with early stopping and
    learning-rate reduction unless ``mlp_callbacks`` is "none"; its history is
    kept on the fitted model (the ensemble's reported training curves, since
    tree members have no epochs).
    """
    if isinstance(member_specs, str):
        try:
            member_specs = ENSEMBLE_PRESETS[member_specs]
        except KeyError:
            raise ValueError(f"unknown ensemble preset {member_specs!r}; "
                             f"available: {sorted(ENSEMBLE_PRESETS)}") from None
    member_params = member_params or {}
    members = []
    for i, spec in enumerate(member_specs):
        model = build_member(spec, member_params.get(spec))
        m_seed = child_seed(seed, i)
        if isinstance(model, MlpModel):
            callbacks = []
            if mlp_callbacks == "default":
                callbacks = [EarlyStopping(patience=10, min_delta=1e-4),
                             ReduceLROnPlateau(model.hyper.learning_rate,
                                               factor=0.5, patience=5, min_lr=1e-6)]
            model, history = fit_mlp(X, y, model.hyper, callbacks=callbacks,
                                     seed=m_seed, model=model)
            model.history = history
        else:
            model.fit(X, y, seed=m_seed)
        members.append((spec, model))
    return VotingEnsemble(members, weights=weights)
