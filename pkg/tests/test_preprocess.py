import numpy as np
import pytest

from ptsdkit.errors import (AllMissingColumn, DegenerateSplit, UnseenCategory)
from ptsdkit.preprocess import (FittedPreprocessor, apply_imputer, apply_scaler,
                                encode, fit_encoder, fit_imputer, fit_scaler,
                                prepare, stratified_split)
from ptsdkit.tabular import MISSING

from conftest import make_table


# -- imputer -------------------------------------------------------------------

def test_imputer_unique_mode():
    table = make_table({"Age": ["a", "b", MISSING, "a"],
                        "Shelter": ["y"] * 4,
                        "PTSD": ["Yes", "No", "No", "No"]})
    assert fit_imputer(table).modes["Age"] == "a"


def test_imputer_tie_breaks_lexicographically():
    table = make_table({"Age": ["b", "a"], "Shelter": ["y", "y"],
                        "PTSD": ["Yes", "No"]})
    assert fit_imputer(table).modes["Age"] == "a"


def test_imputer_all_missing_column():
    table = make_table({"Age": [MISSING, MISSING], "Shelter": ["y", "y"],
                        "PTSD": ["Yes", "No"]})
    with pytest.raises(AllMissingColumn):
        fit_imputer(table)


def test_apply_imputer_fills_only_missing():
    table = make_table({"Age": ["a", MISSING], "Shelter": ["n", "y"],
                        "PTSD": ["Yes", "No"]})
    state = fit_imputer(table)
    out = apply_imputer(state, table)
    assert out.column("Age") == ["a", "a"]
    assert out.column("Shelter") == ["n", "y"]


def test_apply_imputer_identity_when_no_missing():
    table = make_table({"Age": ["a", "b"], "Shelter": ["y", "n"],
                        "PTSD": ["Yes", "No"]})
    out = apply_imputer(fit_imputer(table), table)
    for name in table.schema.names:
        assert out.column(name) == table.column(name)


def test_apply_imputer_preserves_rows_and_order():
    n = 8000
    rng = np.random.default_rng(0)
    age = [MISSING if rng.uniform() < 0.1 else f"a{rng.integers(4)}" for _ in range(n)]
    table = make_table({"Age": age, "Shelter": ["y"] * n,
                        "PTSD": ["Yes" if i % 3 else "No" for i in range(n)]})
    out = apply_imputer(fit_imputer(table), table)
    assert out.n_rows == n
    kept = [i for i, c in enumerate(age) if c is not MISSING]
    assert all(out.column("Age")[i] == age[i] for i in kept)


# -- encoder -------------------------------------------------------------------

def test_encoder_sorted_codes():
    enc = fit_encoder(["flood", "cyclone", "flood"])
    assert enc.category_to_code == {"cyclone": 0, "flood": 1}
    assert encode(enc, ["flood", "cyclone", "flood"]).tolist() == [1, 0, 1]


def test_encoder_single_cell():
    enc = fit_encoder(["flood", "cyclone", "flood"])
    assert encode(enc, ["cyclone"]).tolist() == [0]


def test_encoder_unseen_category():
    enc = fit_encoder(["flood", "cyclone"])
    with pytest.raises(UnseenCategory):
        encode(enc, ["earthquake"])


def test_encoder_is_bijection():
    rng = np.random.default_rng(1)
    for _ in range(20):
        cats = sorted({f"c{rng.integers(100)}" for _ in range(rng.integers(2, 12))})
        column = [cats[rng.integers(len(cats))] for _ in range(50)]
        enc = fit_encoder(column)
        codes = enc.category_to_code
        assert sorted(codes.values()) == list(range(len(enc.categories)))
        for cat, code in codes.items():
            assert enc.decode(code) == cat


# -- scaler --------------------------------------------------------------------

def test_scaler_population_std():
    params = fit_scaler(np.array([[0.0], [2.0]]))
    assert params.mean[0] == 1.0
    assert params.std[0] == 1.0
    scaled = apply_scaler(params, np.array([[0.0], [2.0]]))
    assert scaled[:, 0].tolist() == [-1.0, 1.0]


def test_scaler_constant_column_epsilon_guard():
    X = np.array([[3.0], [3.0], [3.0]])
    params = fit_scaler(X)
    assert apply_scaler(params, X)[:, 0].tolist() == [0.0, 0.0, 0.0]


def test_scaler_recomputed_moments():
    rng = np.random.default_rng(2)
    X = rng.normal(3.0, 2.5, size=(300, 5))
    params = fit_scaler(X)
    Z = apply_scaler(params, X)
    assert np.all(np.abs(Z.mean(axis=0)) < 1e-9)
    assert np.all(np.abs(Z.std(axis=0) - 1.0) < 1e-9)


# -- stratified split ------------------------------------------------------------

def test_split_exact_stratification():
    labels = np.array([0] * 5 + [1] * 5)
    split = stratified_split(labels, 0.2, seed=0)
    test_labels = labels[list(split.test_rows)]
    assert (test_labels == 0).sum() == 1
    assert (test_labels == 1).sum() == 1


def test_split_deterministic():
    labels = np.array([0] * 30 + [1] * 10)
    assert stratified_split(labels, 0.25, 7) == stratified_split(labels, 0.25, 7)


def test_split_8000_rows_gives_1600_test():
    rng = np.random.default_rng(5)
    labels = (rng.uniform(size=8000) < 0.2).astype(int)
    split = stratified_split(labels, 0.2, seed=42)
    assert len(split.test_rows) == 1600
    assert len(split.train_rows) == 6400


def test_split_partition_and_within_one_sample():
    rng = np.random.default_rng(9)
    for trial in range(50):
        n = int(rng.integers(10, 400))
        labels = (rng.uniform(size=n) < rng.uniform(0.2, 0.8)).astype(int)
        if labels.sum() in (0, n):
            continue
        frac = float(rng.uniform(0.1, 0.5))
        split = stratified_split(labels, frac, seed=trial)
        assert sorted(split.train_rows + split.test_rows) == list(range(n))
        assert not set(split.train_rows) & set(split.test_rows)
        for c in (0, 1):
            n_c = int((labels == c).sum())
            t_c = int(sum(labels[i] == c for i in split.test_rows))
            assert abs(t_c - n_c * frac) <= 1.0


def test_split_degenerate():
    with pytest.raises(DegenerateSplit):
        stratified_split(np.array([0, 1]), 0.2, 0)  # round(0.4) == 0 test rows


# -- fitted pipeline --------------------------------------------------------------

def _toy_table(n=80, missing_rate=0.1, seed=0):
    rng = np.random.default_rng(seed)
    cols = {
        "Age": [MISSING if rng.uniform() < missing_rate else f"a{rng.integers(3)}"
                for _ in range(n)],
        "Shelter": [f"s{rng.integers(2)}" for _ in range(n)],
        "PTSD": ["Yes" if rng.uniform() < 0.3 else "No" for _ in range(n)],
    }
    return make_table(cols)


def test_prepare_no_nonfinite_and_balanced():
    table = _toy_table()
    prepared = prepare(table, test_fraction=0.25, seed=3)
    assert np.all(np.isfinite(prepared.train_X))
    assert np.all(np.isfinite(prepared.test_X))
    assert (prepared.train_y == 0).sum() == (prepared.train_y == 1).sum()


def test_prepare_test_rows_never_influence_fitted_state():
    table = _toy_table(seed=4)
    prepared = prepare(table, test_fraction=0.25, seed=11)
    state_before = prepared.fitted.to_json_dict()

    # perturb only test-row feature cells, to categories the train split has
    mutated = {name: list(cells) for name, cells in table.columns.items()}
    modes = prepared.fitted.imputer.modes
    for i in prepared.fitted.split.test_rows:
        for name in table.schema.feature_names:
            mutated[name][i] = modes[name]
    from ptsdkit.tabular import Table
    table2 = Table(table.schema, mutated)
    prepared2 = prepare(table2, test_fraction=0.25, seed=11)
    assert prepared2.fitted.to_json_dict() == state_before


def test_fitted_preprocessor_json_round_trip(tmp_path):
    prepared = prepare(_toy_table(seed=8), test_fraction=0.2, seed=5)
    path = tmp_path / "prep.json"
    prepared.fitted.save(path)
    back = FittedPreprocessor.load(path)
    assert back.to_json_dict() == prepared.fitted.to_json_dict()


def test_apply_imputer_unknown_column():
    from ptsdkit.errors import UnknownColumn
    from ptsdkit.preprocess import ImputerState
    table = make_table({"Age": ["a"], "Shelter": ["y"], "PTSD": ["Yes"]})
    with pytest.raises(UnknownColumn):
        apply_imputer(ImputerState({"Age": "a"}), table)  # Shelter uncovered
