"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. Criterion 2 trains the full
ensemble3 benchmark and dominates the runtime (about a minute); everything
else finishes in seconds. Criterion 3 needs the real survey CSV and is
skipped unless PTSDKIT_DATASET points at it.
"""

import os

import numpy as np
import pytest

from ptsdkit.config import config_from_dict
from ptsdkit.experiment import run_experiment
from ptsdkit.metrics import ConfusionMatrix, scores
from ptsdkit.serialize import read_json

REAL_DATASET = os.environ.get("PTSDKIT_DATASET")


def report(criterion, text):
    print(f"\n[PASS] criterion {criterion}: {text}")


def test_criterion_1_reference_confusion_matrix_metrics():
    """tn=337, fp=0, fn=13, tp=51 reproduces the published headline metrics."""
    rep = scores(ConfusionMatrix(tn=337, fp=0, fn=13, tp=51))
    assert abs(rep.accuracy - 0.9676) <= 0.0001
    assert rep.per_class[1].precision == 1.00
    assert abs(rep.per_class[1].recall - 0.80) <= 0.005
    assert abs(rep.per_class[1].f1 - 0.89) <= 0.005
    assert abs(rep.per_class[0].precision - 0.96) <= 0.005
    assert rep.per_class[0].recall == 1.00
    assert abs(rep.per_class[0].f1 - 0.98) <= 0.005
    report(1, f"accuracy {rep.accuracy:.4f}, precision/recall/F1 per class match "
              "the reference values at stated tolerances")


def test_criterion_2_synthetic_benchmark_ensemble_ordering(tmp_path):
    """ensemble3 on the n=2000 / 4:1 / noise 0.05 / seed 42 benchmark."""
    cfg = config_from_dict({
        "seed": 42,
        "data": {"synthetic": {"n_rows": 2000, "imbalance": 4.0, "noise": 0.05}},
        "ensemble": "ensemble3",
        "model_params": {"mlp": {"epochs": 40, "learning_rate": 0.01}},
        "out": str(tmp_path / "bench"),
    })
    doc = run_experiment(cfg)
    ens_acc = doc["models"]["ensemble3"]["accuracy"]
    member_accs = {name: doc["models"][name]["accuracy"]
                   for name in ("mlp", "forest", "gbt-xgb")}
    assert ens_acc >= 0.90
    for name, acc in member_accs.items():
        assert ens_acc >= acc - 0.02, f"ensemble below {name} by more than 0.02"
    report(2, f"ensemble accuracy {ens_acc:.4f} >= 0.90 and within 0.02 of every "
              f"member ({', '.join(f'{k}={v:.4f}' for k, v in member_accs.items())})")


@pytest.mark.skipif(REAL_DATASET is None or not os.path.exists(REAL_DATASET or ""),
                    reason="real survey dataset not present (set PTSDKIT_DATASET)")
def test_criterion_3_real_dataset_accuracy_band(tmp_path):
    """Best-effort: with the real CSV present, ensemble3 lands within 5
    percentage points of 96.76% test accuracy."""
    overrides = {"data": REAL_DATASET, "out": str(tmp_path / "real")}
    doc_cfg = {"seed": 42, "data": {"csv": REAL_DATASET,
                                    "schema": os.environ.get("PTSDKIT_SCHEMA")},
               "ensemble": "ensemble3",
               "model_params": {"mlp": {"epochs": 40, "learning_rate": 0.01}},
               "out": str(tmp_path / "real")}
    cfg = config_from_dict(doc_cfg, overrides)
    doc = run_experiment(cfg)
    acc = doc["models"]["ensemble3"]["accuracy"]
    assert abs(acc - 0.9676) <= 0.05
    report(3, f"real-data ensemble accuracy {acc:.4f} within +-0.05 of 0.9676")


def test_criterion_4_mlp_gradient_suite():
    """Every parameter gradient of the 7->8->4->1 net vs central differences."""
    from ptsdkit.learners.mlp import (MlpHyper, MlpModel, training_gradients,
                                      training_loss)
    rng = np.random.default_rng(42)
    X = rng.normal(size=(12, 7))
    y = rng.integers(0, 2, size=12)
    model = MlpModel(n_inputs=7, hyper=MlpHyper(hidden_widths=(8, 4),
                                                dropout=0.0)).initialize(seed=5)
    grads = training_gradients(model, X, y)
    h = 1e-5
    worst = 0.0
    checked = 0
    for name, param in model.parameters():
        flat = param.reshape(-1)
        gflat = np.asarray(grads[name]).reshape(-1)
        for i in range(flat.shape[0]):
            orig = flat[i]
            flat[i] = orig + h
            lp = training_loss(model, X, y)
            flat[i] = orig - h
            lm = training_loss(model, X, y)
            flat[i] = orig
            num = (lp - lm) / (2 * h)
            rel = abs(num - gflat[i]) / max(abs(num), abs(gflat[i]), 1e-3)
            worst = max(worst, rel)
            checked += 1
    assert worst <= 1e-4
    report(4, f"{checked} parameter gradients match finite differences; "
              f"max relative error {worst:.2e} <= 1e-4")


def test_criterion_5_smote_property_suite():
    """1000 randomized SMOTE cases: balance, segment membership, exact k-NN,
    bit-identical reruns."""
    from ptsdkit.preprocess import knn_minority, smote_oversample

    def brute_force_knn(points, query, k):
        d = np.linalg.norm(points - points[query], axis=1)
        ranked = sorted(range(len(points)), key=lambda i: (d[i], i))
        return [i for i in ranked if i != query][:k]

    rng = np.random.default_rng(123)
    for case in range(1000):
        n_min = int(rng.integers(2, 8))
        n_maj = n_min + int(rng.integers(1, 10))
        d = int(rng.integers(1, 5))
        k = int(rng.integers(1, n_min))
        X = np.vstack([rng.normal(size=(n_min, d)),
                       rng.normal(4.0, 1.0, size=(n_maj, d))])
        y = np.array([1] * n_min + [0] * n_maj)

        X2, y2 = smote_oversample(X, y, k=k, seed=case)
        assert (y2 == 1).sum() == (y2 == 0).sum() == n_maj

        X3, y3 = smote_oversample(X, y, k=k, seed=case)
        assert np.array_equal(X2, X3) and np.array_equal(y2, y3)

        minority = X[:n_min]
        for s in X2[n_min + n_maj:]:
            gap = min(np.linalg.norm(minority[a] - s)
                      + np.linalg.norm(s - minority[b])
                      - np.linalg.norm(minority[a] - minority[b])
                      for a in range(n_min) for b in range(n_min) if a != b)
            assert gap <= 1e-9

        q = int(rng.integers(0, n_min))
        assert knn_minority(minority, q, k).tolist() == brute_force_knn(minority, q, k)
    report(5, "1000 randomized cases: balanced counts, synthetic points on "
              "minority segments (1e-9), k-NN equals brute force, seeded reruns "
              "bit-identical")


def test_criterion_6_metrics_oracle_equivalence():
    """confusion+scores vs a brute-force counting oracle on 500 random pairs."""
    from ptsdkit.metrics import evaluate

    rng = np.random.default_rng(7)
    for case in range(500):
        n = int(rng.integers(1, 1001))
        y_true = rng.integers(0, 2, size=n)
        y_pred = rng.integers(0, 2, size=n)
        rep = evaluate(y_true, y_pred)
        tn = int(np.sum((y_true == 0) & (y_pred == 0)))
        fp = int(np.sum((y_true == 0) & (y_pred == 1)))
        fn = int(np.sum((y_true == 1) & (y_pred == 0)))
        tp = int(np.sum((y_true == 1) & (y_pred == 1)))
        assert rep.confusion.to_dict() == {"tn": tn, "fp": fp, "fn": fn, "tp": tp}
        assert rep.accuracy == (tp + tn) / n
        p1 = tp / (tp + fp) if tp + fp else 0.0
        r1 = tp / (tp + fn) if tp + fn else 0.0
        assert rep.per_class[1].precision == p1
        assert rep.per_class[1].recall == r1
        p0 = tn / (tn + fn) if tn + fn else 0.0
        r0 = tn / (tn + fp) if tn + fp else 0.0
        assert rep.per_class[0].precision == p0
        assert rep.per_class[0].recall == r0
    report(6, "500 random label-vector pairs match the counting oracle exactly")


def test_criterion_7_determinism_and_leakage(tmp_path):
    """Byte-identical reruns; test-row mutation leaves fitted files unchanged."""
    from ptsdkit.synthetic import SyntheticSpec, generate_csv

    csv_a = tmp_path / "data.csv"
    generate_csv(SyntheticSpec(n_rows=260, imbalance=3.0, noise=0.05),
                 seed=17, out_path=csv_a)
    params = {"mlp": {"hidden_widths": [16, 8], "epochs": 5},
              "forest": {"n_trees": 10}, "gbt-xgb": {"n_rounds": 10}}

    def cfg_for(csv_path, out):
        return config_from_dict({
            "seed": 18, "data": {"csv": str(csv_path)},
            "ensemble": "ensemble3", "model_params": params, "out": str(out)})

    run_experiment(cfg_for(csv_a, tmp_path / "r1"))
    run_experiment(cfg_for(csv_a, tmp_path / "r2"))
    compared = 0
    for root, _, files in os.walk(tmp_path / "r1"):
        for f in files:
            a = os.path.join(root, f)
            b = a.replace(str(tmp_path / "r1"), str(tmp_path / "r2"))
            assert open(a, "rb").read() == open(b, "rb").read(), a
            compared += 1
    assert compared >= 10

    # mutate the feature cells of every test row, re-run, compare fitted files
    import csv as csvmod
    prep = read_json(tmp_path / "r1" / "preprocessor.json")
    with open(csv_a, newline="") as fh:
        rows = list(csvmod.reader(fh))
    header = rows[0]
    for i in prep["split"]["test_rows"]:
        for col, mode in prep["imputer"]["modes"].items():
            rows[1 + i][header.index(col)] = mode
    csv_b = tmp_path / "mutated.csv"
    with open(csv_b, "w", newline="") as fh:
        csvmod.writer(fh).writerows(rows)
    run_experiment(cfg_for(csv_b, tmp_path / "r3"))
    fitted = ["preprocessor.json", "models/mlp.json", "models/forest.json",
              "models/gbt-xgb.json"]
    for name in fitted:
        assert (tmp_path / "r1" / name).read_bytes() == \
            (tmp_path / "r3" / name).read_bytes(), name
    report(7, f"{compared} artifacts byte-identical across reruns; "
              "test-row mutation left all fitted-parameter files bit-exact")


def test_criterion_8_callback_semantics_and_gbt_monotonicity():
    """The definitional early-stop/plateau examples, plus non-increasing GBT
    training log-loss on 20 random datasets."""
    from ptsdkit.callbacks import EarlyStopping, ReduceLROnPlateau
    from ptsdkit.learners import GradientBoostingModel

    # early stopping examples
    early = EarlyStopping(patience=2, min_delta=0.0)
    stop_at = None
    for epoch, loss in enumerate([1.0, 0.9, 0.91, 0.92]):
        if early.step(epoch, loss, current_weights=epoch):
            stop_at = epoch
            break
    assert stop_at == 3 and early.best_epoch == 1 and early.best_weights == 1

    early = EarlyStopping(patience=2)
    assert not any(early.step(e, 1.0 / (e + 1), e) for e in range(40))

    early = EarlyStopping(patience=5, min_delta=0.05)
    early.step(0, 1.0, 0)
    early.step(1, 0.97, 1)
    assert early.best_epoch == 0

    # plateau examples
    plateau = ReduceLROnPlateau(initial_lr=0.1, factor=0.5, patience=1)
    plateau.step(0, 1.0)
    assert plateau.step(1, 1.0) == pytest.approx(0.05)

    plateau = ReduceLROnPlateau(initial_lr=0.1, factor=0.5, patience=1)
    assert all(plateau.step(e, 1.0 / (e + 1)) == 0.1 for e in range(20))

    plateau = ReduceLROnPlateau(initial_lr=0.1, factor=0.5, patience=1, min_lr=0.03)
    lr = None
    for e in range(12):
        lr = plateau.step(e, 2.0)
    assert lr == 0.03

    # GBT loss monotonicity
    rng = np.random.default_rng(29)
    for trial in range(20):
        n = int(rng.integers(20, 100))
        d = int(rng.integers(1, 5))
        X = rng.normal(size=(n, d))
        y = (rng.uniform(size=n) < rng.uniform(0.2, 0.8)).astype(int)
        if y.sum() in (0, n):
            y[0] = 1 - y[0]
        model = GradientBoostingModel(n_rounds=20, learning_rate=0.3,
                                      reg_lambda=1.0).fit(X, y, seed=trial)
        assert np.all(np.diff(model.train_losses) <= 1e-12)
    report(8, "early-stop and plateau definitional sequences exact; GBT "
              "training log-loss non-increasing on 20 random datasets")
