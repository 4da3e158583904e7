"""Synthetic survey generator: a desk-scale stand-in dataset with a planted,
noisy decision rule whose Bayes-optimal accuracy is known in closed form.

The label is a disjunction over at most three features ("feature f answered
one of these categories"), flipped with probability ``noise``. The optimal
classifier is the rule itself, so Bayes accuracy = 1 - noise. Class balance
is controlled exactly: rule-positive rows are generated by forcing at least
one condition to hold, rule-negative rows by avoiding all of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .serialize import write_json
from .tabular import Schema, Table, default_schema, write_csv


@dataclass(frozen=True)
class PlantedRule:
    """Disjunction: row is rule-positive iff any feature takes a listed category."""

    conditions: tuple[tuple[int, tuple[int, ...]], ...]  # (feature idx, category idxs)

    def holds(self, row_codes) -> bool:
        return any(row_codes[f] in cats for f, cats in self.conditions)

    def to_dict(self, feature_names, category_names) -> dict:
        return {"type": "disjunction",
                "conditions": [{"feature": feature_names[f],
                                "categories": [category_names[f][c] for c in cats]}
                               for f, cats in self.conditions]}


@dataclass(frozen=True)
class SyntheticSpec:
    n_rows: int = 2000
    imbalance: float = 4.0  # majority:minority ratio
    category_counts: tuple[int, ...] = (4, 4, 4, 4, 4, 4, 4)
    noise: float = 0.05
    rule: PlantedRule | None = None
    missing_rate: float = 0.0  # feature cells blanked at this rate

    def __post_init__(self):
        if self.n_rows < 2:
            raise ConfigError(f"synthetic n_rows must be >= 2, got {self.n_rows}")
        if self.imbalance < 1.0:
            raise ConfigError("imbalance is a majority:minority ratio and must be >= 1")
        if not 0.0 <= self.noise < 0.5:
            raise ConfigError(f"label noise must be in [0, 0.5), got {self.noise}")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ConfigError("missing_rate must be in [0, 1)")
        if any(c < 2 for c in self.category_counts):
            raise ConfigError("every feature needs at least 2 categories")

    @property
    def bayes_accuracy(self) -> float:
        return 1.0 - self.noise

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticSpec":
        known = {"n_rows", "imbalance", "category_counts", "noise", "missing_rate"}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown synthetic spec keys: {sorted(extra)}")
        doc = dict(doc)
        if "category_counts" in doc:
            doc["category_counts"] = tuple(doc["category_counts"])
        return cls(**doc)


def default_rule(spec: SyntheticSpec, seed: int) -> PlantedRule:
    """Derive a 3-feature disjunction from the seed: one category per condition."""
    rng = np.random.default_rng([seed, 7])
    n_features = len(spec.category_counts)
    feats = sorted(int(f) for f in rng.choice(n_features, size=min(3, n_features),
                                              replace=False))
    conditions = tuple((f, (int(rng.integers(0, spec.category_counts[f])),))
                       for f in feats)
    return PlantedRule(conditions)


def category_name(c: int) -> str:
    return f"v{c:02d}"


def generate_table(spec: SyntheticSpec, seed: int,
                   schema: Schema | None = None) -> tuple[Table, PlantedRule, dict]:
    """Build the synthetic Table; returns (table, rule, sidecar metadata)."""
    schema = schema or default_schema()
    feature_names = schema.feature_names
    if len(feature_names) != len(spec.category_counts):
        raise ConfigError(f"schema has {len(feature_names)} features but "
                          f"category_counts lists {len(spec.category_counts)}")
    rule = spec.rule or default_rule(spec, seed)
    condition_cats = dict(rule.conditions)
    negative_choices = {}
    for f, cats in rule.conditions:
        allowed = [c for c in range(spec.category_counts[f]) if c not in cats]
        if not allowed:
            raise ConfigError(f"rule condition on feature {f} covers every "
                              "category; negative rows are impossible")
        negative_choices[f] = allowed

    rng = np.random.default_rng([seed, 11])
    n = spec.n_rows
    n_pos = int(np.floor(n / (1.0 + spec.imbalance) + 0.5))
    n_pos = max(1, min(n - 1, n_pos))
    flags = np.zeros(n, dtype=bool)
    flags[:n_pos] = True
    rng.shuffle(flags)

    n_features = len(feature_names)
    codes = np.empty((n, n_features), dtype=np.int64)
    for i in range(n):
        if flags[i]:
            for f in range(n_features):
                codes[i, f] = rng.integers(0, spec.category_counts[f])
            f, cats = rule.conditions[int(rng.integers(0, len(rule.conditions)))]
            codes[i, f] = cats[int(rng.integers(0, len(cats)))]
        else:
            for f in range(n_features):
                if f in condition_cats:
                    allowed = negative_choices[f]
                    codes[i, f] = allowed[int(rng.integers(0, len(allowed)))]
                else:
                    codes[i, f] = rng.integers(0, spec.category_counts[f])

    flips = rng.uniform(size=n) < spec.noise
    labels = np.where(flips, ~flags, flags)

    columns = {}
    for f, name in enumerate(feature_names):
        cells = [category_name(int(c)) for c in codes[:, f]]
        if spec.missing_rate > 0.0:
            blank = rng.uniform(size=n) < spec.missing_rate
            cells = [None if blank[i] else cells[i] for i in range(n)]
        columns[name] = cells
    columns[schema.target.name] = ["Yes" if v else "No" for v in labels]
    table = Table(schema, columns)

    category_names = [[category_name(c) for c in range(k)] for k in spec.category_counts]
    sidecar = {
        "seed": seed,
        "n_rows": n,
        "rule_positive_rows": int(flags.sum()),
        "label_positive_rows": int(labels.sum()),
        "noise": spec.noise,
        "bayes_accuracy": spec.bayes_accuracy,
        "rule": rule.to_dict(feature_names, category_names),
    }
    return table, rule, sidecar


def generate_csv(spec: SyntheticSpec, seed: int, out_path,
                 schema: Schema | None = None) -> dict:
    """Write the synthetic CSV plus a .meta.json sidecar; returns the sidecar."""
    table, _, sidecar = generate_table(spec, seed, schema)
    write_csv(table, out_path)
    write_json(str(out_path) + ".meta.json", sidecar)
    return sidecar
