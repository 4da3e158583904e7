"""Evaluation suite: confusion matrix, accuracy, precision/recall/F1 with
macro and support-weighted averaging.

Zero-denominator rates (e.g. precision when a class is never predicted) are
reported as 0.0 together with an explicit ``undefined`` flag instead of
raising, so degenerate-but-valid matrices such as fp=0 evaluate cleanly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch

COMPARISON_CSV_HEADER = "model,accuracy,precision,recall,f1"


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts; class 1 is the positive (PTSD) class."""

    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def to_csv(self) -> str:
        """2x2 CSV, rows = true class, columns = predicted class."""
        return ("true\\pred,0,1\n"
                f"0,{self.tn},{self.fp}\n"
                f"1,{self.fn},{self.tp}\n")

    def to_dict(self) -> dict:
        return {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp}


def confusion(y_true, y_pred) -> ConfusionMatrix:
    """Count tn/fp/fn/tp; zero-length inputs give an all-zero matrix."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape[0] != y_pred.shape[0]:
        raise LengthMismatch(y_true.shape[0], y_pred.shape[0])
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    return ConfusionMatrix(tn, fp, fn, tp)


def _rate(num: int, den: int) -> tuple[float, bool]:
    """num/den, or (0.0, undefined=True) when den == 0."""
    if den == 0:
        return 0.0, True
    return num / den, False


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int
    precision_undefined: bool = False
    recall_undefined: bool = False
    f1_undefined: bool = False

    def to_dict(self) -> dict:
        d = {"precision": self.precision, "recall": self.recall,
             "f1": self.f1, "support": self.support}
        undefined = [k for k in ("precision", "recall", "f1")
                     if getattr(self, f"{k}_undefined")]
        if undefined:
            d["undefined"] = undefined
        return d


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    accuracy: float
    per_class: dict[int, ClassScores]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float

    def averaged(self, mode: str = "weighted") -> tuple[float, float, float]:
        if mode == "macro":
            return self.macro_precision, self.macro_recall, self.macro_f1
        if mode == "weighted":
            return self.weighted_precision, self.weighted_recall, self.weighted_f1
        raise ValueError(f"unknown averaging mode {mode!r}")

    def to_dict(self) -> dict:
        return {
            "confusion": self.confusion.to_dict(),
            "accuracy": self.accuracy,
            "per_class": {str(c): s.to_dict() for c, s in sorted(self.per_class.items())},
            "macro": {"precision": self.macro_precision, "recall": self.macro_recall,
                      "f1": self.macro_f1},
            "weighted": {"precision": self.weighted_precision,
                         "recall": self.weighted_recall, "f1": self.weighted_f1},
        }


def scores(cm: ConfusionMatrix) -> EvaluationReport:
    """Accuracy plus per-class and averaged precision/recall/F1."""
    acc, _ = _rate(cm.tp + cm.tn, cm.total)

    per_class = {}
    # class 1 positive, class 0 positive (mirrored counts)
    for cls, (tp_c, fp_c, fn_c) in ((1, (cm.tp, cm.fp, cm.fn)),
                                    (0, (cm.tn, cm.fn, cm.fp))):
        precision, p_undef = _rate(tp_c, tp_c + fp_c)
        recall, r_undef = _rate(tp_c, tp_c + fn_c)
        if precision + recall == 0:
            f1, f_undef = 0.0, True
        else:
            f1, f_undef = 2 * precision * recall / (precision + recall), False
        support = tp_c + fn_c
        per_class[cls] = ClassScores(precision, recall, f1, support,
                                     p_undef, r_undef, f_undef)

    def _avg(metric):
        vals = [getattr(per_class[c], metric) for c in (0, 1)]
        macro = sum(vals) / 2
        total_support = sum(per_class[c].support for c in (0, 1))
        if total_support == 0:
            return macro, 0.0
        weighted = sum(getattr(per_class[c], metric) * per_class[c].support
                       for c in (0, 1)) / total_support
        return macro, weighted

    macro_p, weighted_p = _avg("precision")
    macro_r, weighted_r = _avg("recall")
    macro_f, weighted_f = _avg("f1")
    return EvaluationReport(cm, acc, per_class,
                            macro_p, macro_r, macro_f,
                            weighted_p, weighted_r, weighted_f)


def evaluate(y_true, y_pred) -> EvaluationReport:
    return scores(confusion(y_true, y_pred))


# -- model comparison table ---------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    name: str
    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None
    status: str = "ok"


def compare_table(named_reports, averaging: str = "weighted") -> list[ComparisonRow]:
    """Rows in the given order; metrics averaged per ``averaging``.

    Entries may be (name, EvaluationReport) or (name, None) for a failed
    model; failed rows keep their place with empty metrics.
    """
    rows = []
    for name, report in named_reports:
        label = name if name else "(unnamed)"
        if report is None:
            rows.append(ComparisonRow(label, None, None, None, None, status="failed"))
            continue
        p, r, f = report.averaged(averaging)
        rows.append(ComparisonRow(label, report.accuracy, p, r, f))
    return rows


def _pct(x: float | None) -> str:
    return "" if x is None else f"{100.0 * x:.2f}"


def comparison_csv(rows) -> str:
    out = io.StringIO()
    out.write(COMPARISON_CSV_HEADER + "\n")
    for row in rows:
        out.write(f"{row.name},{_pct(row.accuracy)},{_pct(row.precision)},"
                  f"{_pct(row.recall)},{_pct(row.f1)}\n")
    return out.getvalue()


def comparison_text(rows) -> str:
    """Aligned plain-text table, percentages with 2 decimals."""
    headers = ["Model", "Accuracy (%)", "Precision (%)", "Recall (%)", "F1-Score (%)"]
    body = []
    for row in rows:
        if row.status == "failed":
            body.append([row.name, "failed", "-", "-", "-"])
        else:
            body.append([row.name, _pct(row.accuracy), _pct(row.precision),
                         _pct(row.recall), _pct(row.f1)])
    widths = [max(len(headers[i]), *(len(r[i]) for r in body)) if body else len(headers[i])
              for i in range(len(headers))]
    lines = []
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)))
    lines.append("  ".join("-" * w for w in widths))
    for r in body:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(r))))
    return "\n".join(lines) + "\n"


def accuracy_bars_csv(rows) -> str:
    """Per-model accuracy data for bar-chart rendering."""
    out = io.StringIO()
    out.write("model,accuracy\n")
    for row in rows:
        out.write(f"{row.name},{_pct(row.accuracy)}\n")
    return out.getvalue()


# -- readers for the emitted CSV formats ----------------------------------------

def confusion_from_csv(text: str) -> ConfusionMatrix:
    lines = text.strip().split("\n")
    if lines[0] != "true\\pred,0,1":
        raise ValueError(f"unexpected confusion header: {lines[0]!r}")
    _, tn, fp = lines[1].split(",")
    _, fn, tp = lines[2].split(",")
    return ConfusionMatrix(int(tn), int(fp), int(fn), int(tp))


def _opt_pct(cell: str) -> float | None:
    return None if cell == "" else float(cell) / 100.0


def comparison_from_csv(text: str) -> list[ComparisonRow]:
    lines = text.strip().split("\n")
    if lines[0] != COMPARISON_CSV_HEADER:
        raise ValueError(f"unexpected comparison header: {lines[0]!r}")
    rows = []
    for line in lines[1:]:
        name, acc, prec, rec, f1 = line.split(",")
        failed = acc == ""
        rows.append(ComparisonRow(name, _opt_pct(acc), _opt_pct(prec),
                                  _opt_pct(rec), _opt_pct(f1),
                                  status="failed" if failed else "ok"))
    return rows


def accuracy_bars_from_csv(text: str) -> list[tuple[str, float]]:
    lines = text.strip().split("\n")
    if lines[0] != "model,accuracy":
        raise ValueError(f"unexpected bars header: {lines[0]!r}")
    out = []
    for line in lines[1:]:
        name, acc = line.split(",")
        out.append((name, float(acc) / 100.0 if acc else 0.0))
    return out
