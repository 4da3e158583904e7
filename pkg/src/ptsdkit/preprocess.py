"""Preprocessing pipeline: mode imputation, label encoding, stratified
splitting, SMOTE oversampling and standardization.

Every fitted state (imputer modes, encoders, scaler moments) is computed from
training rows only and then applied to both splits, so test rows can never
leak into fitted parameters. The apply order is fixed:

    impute -> encode -> split -> SMOTE (train only) -> scale (fit on train)

The split itself depends only on the label vector and the seed, which is why
it can be computed up front.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (AllMissingColumn, DegenerateSplit, DimensionMismatch,
                     TooFewMinority, UnknownColumn, UnseenCategory)
from .tabular import MISSING, Table

SCALER_STD_FLOOR = 1e-12

PREPROCESSOR_FORMAT_VERSION = "1"


# -- imputation ---------------------------------------------------------------

@dataclass(frozen=True)
class ImputerState:
    """Per-column modal category; ties broken lexicographically."""

    modes: dict[str, str]


def fit_imputer(table: Table, feature_columns=None) -> ImputerState:
    """Mode per feature column. Raises AllMissingColumn if a column is all-MISSING."""
    names = list(feature_columns) if feature_columns is not None else table.schema.feature_names
    modes = {}
    for name in names:
        counts = {}
        for cell in table.column(name):
            if cell is not MISSING:
                counts[cell] = counts.get(cell, 0) + 1
        if not counts:
            raise AllMissingColumn(name)
        # most frequent; lexicographically smallest on ties
        modes[name] = min(counts, key=lambda c: (-counts[c], c))
    return ImputerState(modes)


def apply_imputer(state: ImputerState, table: Table) -> Table:
    """Fill MISSING cells in the covered columns; everything else untouched."""
    for name in table.schema.feature_names:
        if name not in state.modes:
            raise UnknownColumn(name)
    columns = {}
    for name, cells in table.columns.items():
        mode = state.modes.get(name)
        if mode is None:
            columns[name] = list(cells)
        else:
            columns[name] = [mode if c is MISSING else c for c in cells]
    return Table(table.schema, columns)


# -- label encoding -------------------------------------------------------------

@dataclass(frozen=True)
class LabelEncoder:
    """Bijection between category text and codes 0..k-1 in lexicographic order."""

    categories: tuple[str, ...]

    @property
    def category_to_code(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.categories)}

    def decode(self, code: int) -> str:
        return self.categories[code]


def fit_encoder(column) -> LabelEncoder:
    """Fit on an imputed (MISSING-free) column; codes follow sorted category order."""
    cats = {c for c in column}
    if MISSING in cats:
        raise ValueError("fit_encoder requires an imputed column with no MISSING cells")
    return LabelEncoder(tuple(sorted(cats)))


def encode(encoder: LabelEncoder, column, column_name=None) -> np.ndarray:
    mapping = encoder.category_to_code
    codes = np.empty(len(column), dtype=np.int64)
    for i, cell in enumerate(column):
        try:
            codes[i] = mapping[cell]
        except KeyError:
            raise UnseenCategory(cell, column_name) from None
    return codes


# -- stratified split ------------------------------------------------------------

@dataclass(frozen=True)
class SplitIndices:
    train_rows: tuple[int, ...]
    test_rows: tuple[int, ...]
    seed: int


def stratified_split(labels, test_fraction: float, seed: int) -> SplitIndices:
    """Deterministic stratified train/test split.

    The total test size is round(n * test_fraction); test slots are allocated
    per class by floor quotas plus largest remainders, then filled by a seeded
    shuffle within each class. Per-class test counts are therefore always
    within one sample of the class quota.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if not 0.0 < test_fraction < 1.0:
        raise DegenerateSplit(f"test_fraction must be in (0,1), got {test_fraction}")
    classes = np.unique(labels)
    if any((labels == c).sum() < 1 for c in classes):
        raise DegenerateSplit("every class needs at least one member")

    total_test = int(np.floor(n * test_fraction + 0.5))
    if total_test == 0 or total_test == n:
        raise DegenerateSplit()

    quotas = {c: (labels == c).sum() * test_fraction for c in classes}
    alloc = {c: int(np.floor(quotas[c])) for c in classes}
    leftover = total_test - sum(alloc.values())
    # hand remaining slots to the largest fractional remainders; ties to the
    # lexicographically smaller class label for determinism
    by_remainder = sorted(classes, key=lambda c: (-(quotas[c] - alloc[c]), c))
    for c in by_remainder[:leftover]:
        alloc[c] += 1

    rng = np.random.default_rng(seed)
    test_rows = []
    train_rows = []
    for c in classes:  # np.unique is sorted, so class order is deterministic
        members = np.flatnonzero(labels == c)
        order = rng.permutation(len(members))
        shuffled = members[order]
        k = min(alloc[c], len(members))
        test_rows.extend(int(i) for i in shuffled[:k])
        train_rows.extend(int(i) for i in shuffled[k:])
    if not train_rows or not test_rows:
        raise DegenerateSplit()
    return SplitIndices(tuple(sorted(train_rows)), tuple(sorted(test_rows)), seed)


# -- SMOTE -----------------------------------------------------------------------

def knn_minority(points, query_index: int, k: int) -> np.ndarray:
    """Indices of the k nearest points to points[query_index], excluding itself.

    Euclidean distance; ties broken by lower index (stable sort).
    """
    points = np.asarray(points, dtype=np.float64)
    diffs = points - points[query_index]
    dists = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    order = np.argsort(dists, kind="stable")
    order = order[order != query_index]
    return order[:k]


def smote_oversample(features, labels, k: int = 5, seed: int = 0, lambda_draw=None):
    """Balance the minority class by synthetic interpolation.

    Each synthetic point is x_i + lam * (x_n - x_i) with lam uniform on [0, 1]
    and x_n one of the k nearest minority neighbors of minority point x_i.
    Base points cycle through the minority rows in original order; the random
    draws for synthetic point j come from an independent counter-based stream
    seeded by (seed, j), so output is identical however the work is scheduled.

    Originals are preserved verbatim as a prefix of the output. Already
    balanced input is returned unchanged. ``lambda_draw``, when given, maps a
    synthetic index to lam and replaces the uniform draw (test hook).

    Returns (features_out, labels_out).
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(X.shape[0], y.shape[0])

    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == n_neg:
        return X.copy(), y.copy()
    minority_label = 1 if n_pos < n_neg else 0
    minority_idx = np.flatnonzero(y == minority_label)
    n_min = len(minority_idx)
    n_maj = max(n_pos, n_neg)
    if n_min < 2:
        raise TooFewMinority(n_min)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n_min - 1:
        warnings.warn(f"SMOTE k={k} exceeds minority_count-1={n_min - 1}; clamping")
        k = n_min - 1

    minority = X[minority_idx]
    neighbors = [knn_minority(minority, i, k) for i in range(n_min)]

    n_new = n_maj - n_min
    synth = np.empty((n_new, X.shape[1]), dtype=np.float64)
    for j in range(n_new):
        i = j % n_min
        rng = np.random.default_rng([seed, j])
        xn = minority[neighbors[i][rng.integers(0, k)]]
        lam = lambda_draw(j) if lambda_draw is not None else rng.uniform()
        synth[j] = minority[i] + lam * (xn - minority[i])

    X_out = np.concatenate([X, synth], axis=0)
    y_out = np.concatenate([y, np.full(n_new, minority_label, dtype=np.int64)])
    return X_out, y_out


# -- scaling --------------------------------------------------------------------

@dataclass(frozen=True)
class ScalerParams:
    """Per-feature mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray


def fit_scaler(features) -> ScalerParams:
    X = np.asarray(features, dtype=np.float64)
    return ScalerParams(X.mean(axis=0), X.std(axis=0))


def apply_scaler(params: ScalerParams, features) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.shape[1] != params.mean.shape[0]:
        raise DimensionMismatch(params.mean.shape[0], X.shape[1])
    return (X - params.mean) / np.maximum(params.std, SCALER_STD_FLOOR)


# -- fitted pipeline ---------------------------------------------------------------

@dataclass
class FittedPreprocessor:
    """Everything needed to replay an experiment's preprocessing exactly."""

    imputer: ImputerState
    encoders: dict[str, LabelEncoder]
    target_categories: tuple[str, ...]
    scaler: ScalerParams
    split: SplitIndices
    seed: int
    test_fraction: float
    smote_enabled: bool
    smote_k: int

    def to_json_dict(self) -> dict:
        return {
            "format_version": PREPROCESSOR_FORMAT_VERSION,
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "imputer": {"modes": dict(sorted(self.imputer.modes.items()))},
            "encoders": {name: list(enc.categories)
                         for name, enc in sorted(self.encoders.items())},
            "target_categories": list(self.target_categories),
            "scaler": {"mean": self.scaler.mean.tolist(),
                       "std": self.scaler.std.tolist()},
            "split": {"seed": self.split.seed,
                      "train_rows": list(self.split.train_rows),
                      "test_rows": list(self.split.test_rows)},
            "smote": {"enabled": self.smote_enabled, "k": self.smote_k},
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FittedPreprocessor":
        return cls(
            imputer=ImputerState(dict(doc["imputer"]["modes"])),
            encoders={name: LabelEncoder(tuple(cats))
                      for name, cats in doc["encoders"].items()},
            target_categories=tuple(doc["target_categories"]),
            scaler=ScalerParams(np.array(doc["scaler"]["mean"]),
                                np.array(doc["scaler"]["std"])),
            split=SplitIndices(tuple(doc["split"]["train_rows"]),
                               tuple(doc["split"]["test_rows"]),
                               doc["split"]["seed"]),
            seed=doc["seed"],
            test_fraction=doc["test_fraction"],
            smote_enabled=doc["smote"]["enabled"],
            smote_k=doc["smote"]["k"],
        )

    def save(self, path) -> None:
        from .serialize import write_json
        write_json(path, self.to_json_dict())

    @classmethod
    def load(cls, path) -> "FittedPreprocessor":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass
class PreparedData:
    """Scaled matrices for both splits plus the fitted preprocessing state."""

    train_X: np.ndarray
    train_y: np.ndarray
    test_X: np.ndarray
    test_y: np.ndarray
    fitted: FittedPreprocessor
    feature_names: list[str] = field(default_factory=list)
    n_train_before_smote: int = 0


def prepare(table: Table, *, test_fraction: float = 0.2, seed: int = 0,
            smote_enabled: bool = True, smote_k: int = 5) -> PreparedData:
    """Run the full preprocessing pipeline on a validated table.

    Imputer, encoders and scaler are fitted on training rows only. SMOTE is
    applied to the training split only; the scaler is fitted on the post-SMOTE
    training matrix and reused verbatim on the test matrix.
    """
    labels_all = table.target_labels()
    split = stratified_split(labels_all, test_fraction, seed)
    train_tbl = table.take_rows(split.train_rows)
    test_tbl = table.take_rows(split.test_rows)

    imputer = fit_imputer(train_tbl)
    train_tbl = apply_imputer(imputer, train_tbl)
    test_tbl = apply_imputer(imputer, test_tbl)

    feature_names = table.schema.feature_names
    encoders = {}
    train_cols = []
    test_cols = []
    for name in feature_names:
        enc = fit_encoder(train_tbl.column(name))
        encoders[name] = enc
        train_cols.append(encode(enc, train_tbl.column(name), name))
        test_cols.append(encode(enc, test_tbl.column(name), name))
    train_X = np.stack(train_cols, axis=1).astype(np.float64)
    test_X = np.stack(test_cols, axis=1).astype(np.float64)
    train_y = labels_all[list(split.train_rows)]
    test_y = labels_all[list(split.test_rows)]

    n_before = train_X.shape[0]
    if smote_enabled:
        train_X, train_y = smote_oversample(train_X, train_y, k=smote_k, seed=seed)

    scaler = fit_scaler(train_X)
    train_X = apply_scaler(scaler, train_X)
    test_X = apply_scaler(scaler, test_X)

    fitted = FittedPreprocessor(
        imputer=imputer,
        encoders=encoders,
        target_categories=tuple(table.target_categories()),
        scaler=scaler,
        split=split,
        seed=seed,
        test_fraction=test_fraction,
        smote_enabled=smote_enabled,
        smote_k=smote_k,
    )
    return PreparedData(train_X, train_y, test_X, test_y, fitted,
                        feature_names=list(feature_names),
                        n_train_before_smote=n_before)
