"""Experiment configuration: a declarative JSON file plus CLI flag overrides.

The seed is mandatory so no run ever depends on wall-clock entropy. A config
names either a CSV dataset (with an optional schema file) or a synthetic
spec, and either an ensemble preset or an explicit model list.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .callbacks import (DEFAULT_DROPOUTS, DEFAULT_LEARNING_RATES,
                        DEFAULT_WIDTHS, SearchSpace)
from .ensemble import ENSEMBLE_PRESETS
from .errors import ConfigError
from .serialize import read_json
from .synthetic import SyntheticSpec

KNOWN_MODEL_SPECS = ("logistic", "svm", "tree", "forest", "gbt", "gbt-xgb",
                     "gbt-lgbm", "mlp")

DEFAULT_COMPARE_MODELS = (
    ("Logistic Regression", "logistic"),
    ("Linear SVM", "svm"),
    ("Random Forest", "forest"),
    ("GBT (level-wise)", "gbt-xgb"),
    ("GBT (leaf-wise)", "gbt-lgbm"),
    ("MLP", "mlp"),
    ("Soft-Voting Ensemble", "ensemble3"),
)


@dataclass(frozen=True)
class ModelEntry:
    name: str
    spec: str  # a member spec or an ensemble preset name
    params: dict = field(default_factory=dict)

    @property
    def is_ensemble(self) -> bool:
        return self.spec in ENSEMBLE_PRESETS


@dataclass(frozen=True)
class TuneSettings:
    space: SearchSpace
    n_trials: int = 20
    epochs: int = 15
    batch_size: int = 32
    patience: int = 5


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    data_csv: str | None = None
    schema_path: str | None = None
    synthetic: SyntheticSpec | None = None
    test_fraction: float = 0.2
    smote_enabled: bool = True
    smote_k: int = 5
    ensemble: str | None = "ensemble3"
    ensemble_weights: tuple[float, ...] | None = None
    models: tuple[ModelEntry, ...] = ()
    member_params: dict = field(default_factory=dict)
    out_dir: str = "out"
    averaging: str = "weighted"
    threshold: float = 0.5
    figures: bool = True
    tune: TuneSettings | None = None

    def __post_init__(self):
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in (0,1), got {self.test_fraction}")
        if self.averaging not in ("macro", "weighted"):
            raise ConfigError(f"averaging must be 'macro' or 'weighted', "
                              f"got {self.averaging!r}")
        if self.ensemble is not None and self.ensemble not in ENSEMBLE_PRESETS:
            raise ConfigError(f"unknown ensemble preset {self.ensemble!r}; "
                              f"available: {sorted(ENSEMBLE_PRESETS)}")
        if self.data_csv is None and self.synthetic is None:
            raise ConfigError("config needs a dataset: data.csv or data.synthetic")
        if self.smote_k < 1:
            raise ConfigError(f"smote k must be >= 1, got {self.smote_k}")
        if self.ensemble_weights is not None:
            if self.ensemble is None:
                raise ConfigError("ensemble_weights needs an ensemble preset")
            if any(w < 0 for w in self.ensemble_weights):
                raise ConfigError("ensemble_weights must be non-negative")


def _parse_models(entries) -> tuple[ModelEntry, ...]:
    models = []
    for entry in entries:
        if isinstance(entry, str):
            entry = {"model": entry}
        spec = entry.get("model")
        if spec not in KNOWN_MODEL_SPECS and spec not in ENSEMBLE_PRESETS:
            raise ConfigError(f"unknown model spec {spec!r}")
        models.append(ModelEntry(name=entry.get("name", spec), spec=spec,
                                 params=dict(entry.get("params", {}))))
    return tuple(models)


def _parse_tune(doc: dict) -> TuneSettings:
    try:
        space = SearchSpace(
            layer_widths=tuple(doc.get("layer_widths", DEFAULT_WIDTHS)),
            dropout_rates=tuple(doc.get("dropout_rates", DEFAULT_DROPOUTS)),
            learning_rates=tuple(doc.get("learning_rates", DEFAULT_LEARNING_RATES)),
            n_layers=int(doc.get("n_layers", 4)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid search space: {exc}") from exc
    return TuneSettings(space=space,
                        n_trials=int(doc.get("n_trials", 20)),
                        epochs=int(doc.get("epochs", 15)),
                        batch_size=int(doc.get("batch_size", 32)),
                        patience=int(doc.get("patience", 5)))


def config_from_dict(doc: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed JSON document.

    ``overrides`` (CLI flags) win over the document; unknown top-level keys
    are rejected so typos fail loudly.
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    known = {"seed", "data", "test_fraction", "smote", "ensemble",
             "ensemble_weights", "models", "model_params", "out", "averaging",
             "threshold", "figures", "tune"}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")

    data = dict(doc.get("data", {}))
    if "data" in overrides:
        data = {"csv": overrides["data"], "schema": data.get("schema")}
    synthetic = None
    if data.get("synthetic") is not None:
        synthetic = SyntheticSpec.from_dict(data["synthetic"])

    smote = doc.get("smote", {})
    if isinstance(smote, bool):
        smote = {"enabled": smote}

    seed = overrides.get("seed", doc.get("seed"))
    if seed is None:
        raise ConfigError("seed is mandatory (set it in the config or pass --seed)")

    models = _parse_models(doc.get("models", []))
    ensemble = overrides.get("ensemble", doc.get("ensemble"))
    if ensemble is None and not models:
        ensemble = "ensemble3"
    if ensemble is not None and models:
        raise ConfigError("config sets both an ensemble preset and a model list; "
                          "pick one")

    tune = _parse_tune(doc["tune"]) if "tune" in doc else None

    return ExperimentConfig(
        seed=int(seed),
        data_csv=data.get("csv"),
        schema_path=data.get("schema"),
        synthetic=synthetic,
        test_fraction=float(doc.get("test_fraction", 0.2)),
        smote_enabled=bool(smote.get("enabled", True)),
        smote_k=int(smote.get("k", 5)),
        ensemble=ensemble,
        ensemble_weights=(tuple(float(w) for w in doc["ensemble_weights"])
                          if doc.get("ensemble_weights") is not None else None),
        models=models,
        member_params=dict(doc.get("model_params", {})),
        out_dir=str(overrides.get("out", doc.get("out", "out"))),
        averaging=str(overrides.get("averaging", doc.get("averaging", "weighted"))),
        threshold=float(doc.get("threshold", 0.5)),
        figures=bool(doc.get("figures", True)),
        tune=tune,
    )


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        doc = read_json(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return config_from_dict(doc, overrides)
