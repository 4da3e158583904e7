"""Classifier implementations behind one uniform fit/predict_proba contract."""

from .base import (Classifier, MODEL_REGISTRY, load_model, model_from_dict,
                   save_model, sigmoid)
from .linear import LinearSvmModel, LogisticRegressionModel
from .tree import DecisionTreeModel, gini_impurity
from .forest import RandomForestModel
from .boosting import GradientBoostingModel
from .mlp import MlpHyper, MlpModel, TrainingHistory, fit_mlp, mlp_forward

__all__ = [
    "Classifier", "MODEL_REGISTRY", "load_model", "model_from_dict",
    "save_model", "sigmoid",
    "LogisticRegressionModel", "LinearSvmModel",
    "DecisionTreeModel", "gini_impurity",
    "RandomForestModel", "GradientBoostingModel",
    "MlpModel", "MlpHyper", "TrainingHistory", "fit_mlp", "mlp_forward",
]
