import numpy as np
import pytest

from ptsdkit.tabular import ColumnSchema, Schema, Table


def make_schema(feature_names=("Age", "Shelter"), target="PTSD"):
    cols = [ColumnSchema(n) for n in feature_names]
    cols.append(ColumnSchema(target, kind="target"))
    return Schema(tuple(cols))


def make_table(columns: dict, target="PTSD"):
    features = [n for n in columns if n != target]
    return Table(make_schema(features, target), columns)


@pytest.fixture
def blobs():
    """Two well-separated 7-feature gaussian blobs, labels 0/1."""
    rng = np.random.default_rng(0)
    n = 200
    X = np.vstack([rng.normal(-1.5, 1.0, size=(n // 2, 7)),
                   rng.normal(+1.5, 1.0, size=(n // 2, 7))])
    y = np.array([0] * (n // 2) + [1] * (n // 2))
    return X, y
