import numpy as np
import pytest

from ptsdkit.errors import (DataError, MissingColumn, RaggedRow,
                            TargetMissingEntries)
from ptsdkit.tabular import (MISSING, ColumnSchema, Schema, Table,
                             default_schema, drop_missing_target, load_csv,
                             validate, write_csv)

from conftest import make_schema, make_table


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_header_whitespace_trimmed(tmp_path):
    path = write(tmp_path, " Age ,PTSD\na,Yes\nb,No\nc,Yes\n")
    table = load_csv(path, make_schema(("Age",)))
    assert table.schema.names == ["Age", "PTSD"]
    assert table.n_rows == 3


def test_empty_cell_becomes_missing(tmp_path):
    path = write(tmp_path, "Age,PTSD\n,Yes\nb,No\n")
    table = load_csv(path, make_schema(("Age",)))
    assert table.column("Age") == [MISSING, "b"]


@pytest.mark.parametrize("token", ["NA", "N/A"])
def test_missing_token_set(tmp_path, token):
    path = write(tmp_path, f"Age,PTSD\n{token},Yes\n")
    table = load_csv(path, make_schema(("Age",)))
    assert table.column("Age") == [MISSING]


def test_missing_tokens_configurable(tmp_path):
    path = write(tmp_path, "Age,PTSD\nNA,Yes\n")
    table = load_csv(path, make_schema(("Age",)), missing_tokens=("",))
    assert table.column("Age") == ["NA"]


def test_eight_thousand_rows_preserved(tmp_path):
    rows = "\n".join(f"a{i % 5},{'Yes' if i % 4 == 0 else 'No'}" for i in range(8000))
    path = write(tmp_path, "Age,PTSD\n" + rows + "\n")
    table = load_csv(path, make_schema(("Age",)))
    assert table.n_rows == 8000


def test_missing_schema_column_rejected(tmp_path):
    path = write(tmp_path, "Age,PTSD\na,Yes\n")
    with pytest.raises(MissingColumn):
        load_csv(path, make_schema(("Age", "Shelter")))


def test_ragged_row_rejected(tmp_path):
    path = write(tmp_path, "Age,PTSD\na,Yes\nb\n")
    with pytest.raises(RaggedRow) as err:
        load_csv(path, make_schema(("Age",)))
    assert err.value.line == 3


def test_extra_csv_columns_ignored(tmp_path):
    path = write(tmp_path, "Age,Junk,PTSD\na,x,Yes\n")
    table = load_csv(path, make_schema(("Age",)))
    assert table.schema.names == ["Age", "PTSD"]


def test_validate_counts():
    table = make_table({"Age": ["a", "b", MISSING, "a"],
                        "Shelter": ["y", "y", "n", "n"],
                        "PTSD": ["Yes", "No", "No", "No"]})
    report = validate(table)
    assert report.missing_counts == {"Age": 1, "Shelter": 0, "PTSD": 0}
    assert report.distinct_counts["Age"] == 2
    assert report.distinct_counts["Shelter"] == 2
    assert report.target_class_counts == {"No": 3, "Yes": 1}


def test_validate_rejects_missing_target():
    table = make_table({"Age": ["a", "b", "c"],
                        "Shelter": ["y", "y", "n"],
                        "PTSD": ["Yes", "No", MISSING]})
    with pytest.raises(TargetMissingEntries):
        validate(table)


def test_drop_missing_target_is_only_row_drop():
    table = make_table({"Age": ["a", "b", "c"],
                        "Shelter": ["y", "y", "n"],
                        "PTSD": ["Yes", MISSING, "No"]})
    kept, dropped = drop_missing_target(table)
    assert dropped == 1
    assert kept.n_rows == 2
    assert kept.column("Age") == ["a", "c"]


def test_distinct_category_count():
    table = make_table({"Age": ["flood", "cyclone", "flood"],
                        "Shelter": ["y", "y", "y"],
                        "PTSD": ["Yes", "No", "No"]})
    assert validate(table).distinct_counts["Age"] == 2


def test_target_labels_positive_is_lexicographically_larger():
    table = make_table({"Age": ["a", "b"], "Shelter": ["y", "n"],
                        "PTSD": ["Yes", "No"]})
    assert table.target_labels().tolist() == [1, 0]


def test_target_labels_positive_override():
    schema = Schema((ColumnSchema("Age"),
                     ColumnSchema("PTSD", kind="target", positive_category="No")))
    table = Table(schema, {"Age": ["a", "b"], "PTSD": ["Yes", "No"]})
    assert table.target_labels().tolist() == [0, 1]


def test_csv_round_trip_preserves_cells(tmp_path):
    rng = np.random.default_rng(3)
    cats = ["x", "y, z", 'quo"te', " pad ", "plain"]
    n = 60
    columns = {
        "Age": [MISSING if rng.uniform() < 0.2 else cats[rng.integers(len(cats))]
                for _ in range(n)],
        "Shelter": [cats[rng.integers(len(cats))] for _ in range(n)],
        "PTSD": [("Yes" if rng.uniform() < 0.5 else "No") for _ in range(n)],
    }
    table = make_table(columns)
    path = tmp_path / "round.csv"
    write_csv(table, path)
    back = load_csv(path, table.schema)
    assert back.n_rows == table.n_rows
    for name in table.schema.names:
        assert back.column(name) == table.column(name)


def test_schema_requires_exactly_one_target():
    with pytest.raises(DataError):
        Schema((ColumnSchema("Age"), ColumnSchema("B")))
    with pytest.raises(DataError):
        Schema((ColumnSchema("A", kind="target"), ColumnSchema("B", kind="target")))


def test_schema_rejects_duplicate_trimmed_names():
    with pytest.raises(DataError):
        Schema((ColumnSchema("Age "), ColumnSchema("Age"),
                ColumnSchema("PTSD", kind="target")))


def test_default_schema_shape():
    schema = default_schema()
    assert len(schema.feature_names) == 7
    assert schema.target.name == "PTSD"


def test_schema_json_round_trip(tmp_path):
    schema = default_schema()
    path = tmp_path / "schema.json"
    import json
    path.write_text(json.dumps(schema.to_json_dict()), encoding="utf-8")
    assert Schema.from_json(path) == schema
