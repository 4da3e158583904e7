"""Batch experiment orchestration: run / compare / tune / generate.

Every artifact is written atomically and deterministically: for a fixed
(dataset bytes, config, seed) the output bytes are identical across runs.
Fitted-parameter files (preprocessor.json, models/*.json) depend only on
training rows, never on test rows.
"""

from __future__ import annotations

import os
from pathlib import Path

from . import figures
from .callbacks import (EarlyStopping, ReduceLROnPlateau, SearchSpace,
                        random_search)
from .config import DEFAULT_COMPARE_MODELS, ExperimentConfig, ModelEntry, TuneSettings
from .ensemble import build_member, fit_ensemble
from .errors import ConfigError, DataError
from .learners import MlpHyper, MlpModel, save_model
from .learners.mlp import fit_mlp
from .metrics import (accuracy_bars_csv, compare_table, comparison_csv,
                      comparison_text, evaluate)
from .preprocess import PreparedData, prepare
from .serialize import atomic_write_text, write_json
from .synthetic import generate_csv, generate_table
from .tabular import (Schema, Table, default_schema, drop_missing_target,
                      load_csv, validate)

REPORT_FORMAT_VERSION = "1"


def _default_mlp_callbacks(learning_rate: float):
    return [EarlyStopping(patience=10, min_delta=1e-4),
            ReduceLROnPlateau(learning_rate, factor=0.5, patience=5, min_lr=1e-6)]


def load_table(cfg: ExperimentConfig) -> tuple[Table, dict]:
    """Materialize the configured dataset (CSV file or synthetic spec)."""
    if cfg.data_csv is not None:
        schema = Schema.from_json(cfg.schema_path) if cfg.schema_path else default_schema()
        table = load_csv(cfg.data_csv, schema)
        source = {"kind": "csv", "path": str(cfg.data_csv), "n_rows": table.n_rows}
    else:
        table, _, sidecar = generate_table(cfg.synthetic, cfg.seed)
        source = {"kind": "synthetic", "n_rows": table.n_rows,
                  "bayes_accuracy": sidecar["bayes_accuracy"],
                  "rule": sidecar["rule"]}
    return table, source


def _prepare(cfg: ExperimentConfig) -> tuple[PreparedData, dict, dict]:
    table, source = load_table(cfg)
    table, dropped = drop_missing_target(table)
    if table.n_rows == 0:
        raise DataError("dataset has no labeled rows")
    report = validate(table)
    source["dropped_missing_target"] = dropped
    prepared = prepare(table, test_fraction=cfg.test_fraction, seed=cfg.seed,
                       smote_enabled=cfg.smote_enabled, smote_k=cfg.smote_k)
    return prepared, source, report.to_dict()


def _fit_one(spec: str, params: dict, prepared: PreparedData, seed: int):
    """Fit a single member spec; returns (model, history-or-None)."""
    model = build_member(spec, params)
    if isinstance(model, MlpModel):
        model, history = fit_mlp(prepared.train_X, prepared.train_y, model.hyper,
                                 callbacks=_default_mlp_callbacks(model.hyper.learning_rate),
                                 seed=seed, model=model)
        return model, history
    model.fit(prepared.train_X, prepared.train_y, seed=seed)
    return model, None


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Full pipeline for one experiment; writes all artifacts, returns the report."""
    prepared, source, validation = _prepare(cfg)
    out = Path(cfg.out_dir)
    (out / "models").mkdir(parents=True, exist_ok=True)

    reports = {}
    saved_files = {}
    history = None
    history_source = None

    if cfg.ensemble is not None:
        ens = fit_ensemble(prepared.train_X, prepared.train_y, cfg.ensemble,
                           seed=cfg.seed, weights=cfg.ensemble_weights,
                           member_params=cfg.member_params)
        for name, member in ens.members:
            preds = member.predict(prepared.test_X, cfg.threshold)
            reports[name] = evaluate(prepared.test_y, preds)
            path = out / "models" / f"{name}.json"
            save_model(member, path)
            saved_files[name] = f"models/{name}.json"
        preds = ens.predict(prepared.test_X, cfg.threshold)
        reports[cfg.ensemble] = evaluate(prepared.test_y, preds)
        primary = cfg.ensemble
        histories = ens.member_histories()
        if histories:
            history_source = sorted(histories)[0]
            history = histories[history_source]
        write_json(out / "ensemble_manifest.json",
                   {"format_version": REPORT_FORMAT_VERSION, **ens.manifest(saved_files)})
    else:
        if not cfg.models:
            raise ConfigError("run needs an ensemble preset or a model list")
        for entry in cfg.models:
            if entry.is_ensemble:
                ens = fit_ensemble(prepared.train_X, prepared.train_y, entry.spec,
                                   seed=cfg.seed, member_params=cfg.member_params)
                model = ens
            else:
                model, hist = _fit_one(entry.spec, entry.params, prepared, cfg.seed)
                if hist is not None and history is None:
                    history, history_source = hist, entry.name
                path = out / "models" / f"{entry.name}.json"
                save_model(model, path)
                saved_files[entry.name] = f"models/{entry.name}.json"
            preds = model.predict(prepared.test_X, cfg.threshold)
            reports[entry.name] = evaluate(prepared.test_y, preds)
        primary = cfg.models[0].name

    prepared.fitted.save(out / "preprocessor.json")

    primary_report = reports[primary]
    atomic_write_text(out / "confusion.csv", primary_report.confusion.to_csv())
    if history is not None:
        atomic_write_text(out / "history.csv", history.to_csv())

    doc = {
        "format_version": REPORT_FORMAT_VERSION,
        "spec_version": REPORT_FORMAT_VERSION,
        "seed": cfg.seed,
        "dataset": source,
        "validation": validation,
        "split": {
            "n_train": len(prepared.fitted.split.train_rows),
            "n_test": len(prepared.fitted.split.test_rows),
            "n_train_after_smote": int(prepared.train_X.shape[0]),
            "test_fraction": cfg.test_fraction,
        },
        "smote": {"enabled": cfg.smote_enabled, "k": cfg.smote_k},
        "threshold": cfg.threshold,
        "averaging": cfg.averaging,
        "primary": primary,
        "history_source": history_source,
        "models": {name: reports[name].to_dict() for name in sorted(reports)},
        "model_files": {k: saved_files[k] for k in sorted(saved_files)},
    }
    write_json(out / "report.json", doc)

    if cfg.figures:
        figures.save_confusion_heatmap(primary_report.confusion,
                                       out / "confusion_matrix.png")
        if history is not None:
            figures.save_history_curves(history, out)
    return doc


def compare_experiment(cfg: ExperimentConfig) -> dict:
    """Train each listed model on the identical preprocessed split and emit
    the comparison table (CSV + aligned text + accuracy bars + figure)."""
    entries = list(cfg.models)
    if not entries:
        entries = [ModelEntry(name=n, spec=s) for n, s in DEFAULT_COMPARE_MODELS]
    if len(entries) < 2:
        raise ConfigError("compare needs at least 2 models")

    prepared, source, validation = _prepare(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    named_reports = []
    statuses = {}
    for entry in entries:
        try:
            if entry.is_ensemble:
                model = fit_ensemble(prepared.train_X, prepared.train_y, entry.spec,
                                     seed=cfg.seed, member_params=cfg.member_params)
            else:
                model, _ = _fit_one(entry.spec, entry.params, prepared, cfg.seed)
            preds = model.predict(prepared.test_X, cfg.threshold)
            named_reports.append((entry.name, evaluate(prepared.test_y, preds)))
            statuses[entry.name] = "ok"
        except Exception as exc:
            named_reports.append((entry.name, None))
            statuses[entry.name] = f"failed: {exc}"

    rows = compare_table(named_reports, averaging=cfg.averaging)
    atomic_write_text(out / "comparison.csv", comparison_csv(rows))
    atomic_write_text(out / "comparison.txt", comparison_text(rows))
    atomic_write_text(out / "accuracy_bars.csv", accuracy_bars_csv(rows))
    if cfg.figures:
        figures.save_accuracy_bars([r for r in rows if r.accuracy is not None],
                                   out / "comparison_accuracy.png")

    doc = {
        "format_version": REPORT_FORMAT_VERSION,
        "spec_version": REPORT_FORMAT_VERSION,
        "seed": cfg.seed,
        "dataset": source,
        "validation": validation,
        "averaging": cfg.averaging,
        "statuses": {k: statuses[k] for k in sorted(statuses)},
        "models": {name: (rep.to_dict() if rep is not None else None)
                   for name, rep in named_reports},
    }
    write_json(out / "compare_report.json", doc)
    return doc


def tune_experiment(cfg: ExperimentConfig) -> dict:
    """Random search over MLP hyperparameters; writes trials.csv + best_config.json."""
    has_mlp = cfg.ensemble is not None or any(e.spec == "mlp" for e in cfg.models)
    if not has_mlp:
        raise ConfigError("tune needs an MLP in the model list")
    tune = cfg.tune or TuneSettings(space=SearchSpace())
    prepared, source, _ = _prepare(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def evaluate_trial(trial_cfg) -> float:
        hyper = MlpHyper(hidden_widths=trial_cfg.hidden_widths,
                         dropout=trial_cfg.dropout,
                         learning_rate=trial_cfg.learning_rate,
                         epochs=tune.epochs, batch_size=tune.batch_size)
        callbacks = [EarlyStopping(patience=tune.patience)]
        _, history = fit_mlp(prepared.train_X, prepared.train_y, hyper,
                             callbacks=callbacks, seed=cfg.seed)
        best = min(history.records, key=lambda r: r.val_loss)
        return best.val_acc

    result = random_search(tune.space, tune.n_trials, cfg.seed, evaluate_trial)
    atomic_write_text(out / "trials.csv", result.trials_csv())
    best_doc = {
        "format_version": REPORT_FORMAT_VERSION,
        "seed": cfg.seed,
        "n_trials": len(result.trials),
        "best": result.best.to_dict() if result.best is not None else None,
        "best_val_accuracy": result.best_score,
    }
    write_json(out / "best_config.json", best_doc)
    return best_doc


def generate_experiment(cfg: ExperimentConfig, out_path) -> dict:
    """Write the configured synthetic dataset as CSV plus its sidecar."""
    if cfg.synthetic is None:
        raise ConfigError("generate needs a data.synthetic spec in the config")
    schema = Schema.from_json(cfg.schema_path) if cfg.schema_path else None
    parent = os.path.dirname(os.fspath(out_path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    return generate_csv(cfg.synthetic, cfg.seed, out_path, schema)


__all__ = ["run_experiment", "compare_experiment", "tune_experiment",
           "generate_experiment", "load_table", "REPORT_FORMAT_VERSION"]
