import numpy as np
import pytest

from ptsdkit.errors import ConfigError
from ptsdkit.synthetic import (PlantedRule, SyntheticSpec, generate_csv,
                               generate_table)
from ptsdkit.tabular import default_schema, load_csv


def test_imbalance_counts():
    spec = SyntheticSpec(n_rows=100, imbalance=9.0, noise=0.0)
    table, rule, sidecar = generate_table(spec, seed=0)
    labels = table.target_labels()
    assert abs(int(labels.sum()) - 10) <= 1
    assert sidecar["rule_positive_rows"] == sidecar["label_positive_rows"]


def test_noiseless_labels_deterministic_from_features():
    spec = SyntheticSpec(n_rows=300, imbalance=3.0, noise=0.0)
    table, rule, _ = generate_table(spec, seed=1)
    labels = table.target_labels()
    feature_names = table.schema.feature_names
    for i in range(table.n_rows):
        codes = [int(table.column(n)[i][1:]) for n in feature_names]
        assert labels[i] == int(rule.holds(codes))


def test_noiseless_rule_is_learnable_to_perfection():
    from ptsdkit.learners import DecisionTreeModel
    from ptsdkit.preprocess import encode, fit_encoder
    spec = SyntheticSpec(n_rows=400, imbalance=2.0, noise=0.0)
    table, _, _ = generate_table(spec, seed=2)
    cols = [encode(fit_encoder(table.column(n)), table.column(n))
            for n in table.schema.feature_names]
    X = np.stack(cols, axis=1).astype(float)
    y = table.target_labels()
    model = DecisionTreeModel().fit(X, y)
    assert np.mean(model.predict(X) == y) == 1.0


def test_bayes_accuracy_closed_form():
    spec = SyntheticSpec(n_rows=100, noise=0.15)
    assert spec.bayes_accuracy == 0.85


def test_fixed_seed_byte_identical_csv(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    spec = SyntheticSpec(n_rows=150, imbalance=4.0, noise=0.1)
    generate_csv(spec, seed=7, out_path=a)
    generate_csv(spec, seed=7, out_path=b)
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    generate_csv(spec, seed=8, out_path=c)
    assert a.read_bytes() != c.read_bytes()


def test_csv_matches_schema_and_sidecar(tmp_path):
    path = tmp_path / "synth.csv"
    spec = SyntheticSpec(n_rows=80, imbalance=4.0, noise=0.05)
    sidecar = generate_csv(spec, seed=3, out_path=path)
    table = load_csv(path, default_schema())
    assert table.n_rows == 80
    assert sidecar["bayes_accuracy"] == 0.95
    assert len(sidecar["rule"]["conditions"]) <= 3
    import json
    meta = json.loads((tmp_path / "synth.csv.meta.json").read_text())
    assert meta == sidecar


def test_missing_rate_produces_missing_cells():
    spec = SyntheticSpec(n_rows=200, missing_rate=0.2)
    table, _, _ = generate_table(spec, seed=4)
    from ptsdkit.tabular import MISSING
    n_missing = sum(c is MISSING for name in table.schema.feature_names
                    for c in table.column(name))
    assert n_missing > 0
    assert all(c is not MISSING for c in table.column("PTSD"))


def test_spec_validation():
    with pytest.raises(ConfigError):
        SyntheticSpec(noise=0.5)
    with pytest.raises(ConfigError):
        SyntheticSpec(imbalance=0.5)
    with pytest.raises(ConfigError):
        SyntheticSpec(n_rows=1)
    with pytest.raises(ConfigError):
        SyntheticSpec.from_dict({"n_rows": 100, "bogus": 1})


def test_custom_rule_respected():
    rule = PlantedRule(((0, (1,)), (2, (0, 3))))
    spec = SyntheticSpec(n_rows=120, noise=0.0, rule=rule)
    table, used, _ = generate_table(spec, seed=5)
    assert used == rule
    labels = table.target_labels()
    names = table.schema.feature_names
    for i in range(table.n_rows):
        codes = [int(table.column(n)[i][1:]) for n in names]
        assert labels[i] == int(codes[0] == 1 or codes[2] in (0, 3))
