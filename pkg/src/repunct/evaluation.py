"""Scoring: confusion matrices, per-class P/R/F1, macro aggregates, debiasing.

Matrices are 4x4 with rows = predicted class and columns = true class in the
fixed display order (PERIOD, COMMA, QUESTION, EMPTY). Two macro aggregates are
reported: ``macro_punct`` averages the three punctuation classes (the "overall"
convention used for model comparison) and ``macro_all`` additionally includes
EMPTY. All math runs in full precision; presentation rounds half away from
zero to one decimal of the percentage.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import PunctClass

CLASS_ORDER: tuple[PunctClass, ...] = (
    PunctClass.PERIOD,
    PunctClass.COMMA,
    PunctClass.QUESTION,
    PunctClass.EMPTY,
)
PUNCT_CLASSES: tuple[PunctClass, ...] = CLASS_ORDER[:3]

_CLASS_TO_INDEX = {c: i for i, c in enumerate(CLASS_ORDER)}


class UndefinedMetricsError(ValueError):
    """Raised when metrics are requested for an empty matrix."""


@dataclass
class ConfusionMatrix4:
    """4x4 predicted-by-true counts in CLASS_ORDER."""

    counts: list[list[int]] = field(default_factory=lambda: [[0] * 4 for _ in range(4)])

    def __post_init__(self) -> None:
        if len(self.counts) != 4 or any(len(row) != 4 for row in self.counts):
            raise ValueError("confusion matrix must be 4x4")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("confusion matrix counts must be non-negative")

    def add(self, predicted: PunctClass, gold: PunctClass, n: int = 1) -> None:
        self.counts[_CLASS_TO_INDEX[predicted]][_CLASS_TO_INDEX[gold]] += n

    def __add__(self, other: "ConfusionMatrix4") -> "ConfusionMatrix4":
        return ConfusionMatrix4(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.counts, other.counts)]
        )

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(4))

    def tp(self, cls: PunctClass) -> int:
        i = _CLASS_TO_INDEX[cls]
        return self.counts[i][i]

    def row_sum(self, cls: PunctClass) -> int:
        return sum(self.counts[_CLASS_TO_INDEX[cls]])

    def col_sum(self, cls: PunctClass) -> int:
        j = _CLASS_TO_INDEX[cls]
        return sum(row[j] for row in self.counts)

    def format_grid(self) -> str:
        """Integer grid with row/column headers in fixed class order."""
        names = [c.name for c in CLASS_ORDER]
        width = max(max(len(n) for n in names), max(len(str(c)) for row in self.counts for c in row))
        header = " " * (width + 2) + "  ".join(f"{n:>{width}}" for n in names)
        lines = [header]
        for name, row in zip(names, self.counts):
            lines.append(f"{name:>{width}}  " + "  ".join(f"{c:>{width}}" for c in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def parse_grid(cls, text: str) -> "ConfusionMatrix4":
        rows = []
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] in {c.name for c in CLASS_ORDER} and len(parts) == 5:
                rows.append([int(p) for p in parts[1:]])
            elif all(p.lstrip("-").isdigit() for p in parts) and len(parts) == 4:
                rows.append([int(p) for p in parts])
        if len(rows) != 4:
            raise ValueError("expected a 4x4 integer grid")
        return cls(rows)


def confusion(gold: Sequence[PunctClass], pred: Sequence[PunctClass]) -> ConfusionMatrix4:
    """Count (predicted, true) pairs position by position."""
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold labels but {len(pred)} predictions")
    m = ConfusionMatrix4()
    for g, p in zip(gold, pred):
        m.add(predicted=p, gold=g)
    return m


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    undefined: tuple[str, ...] = ()


@dataclass
class EvalReport:
    per_class: dict[PunctClass, ClassMetrics]
    accuracy: float
    macro_punct: ClassMetrics
    macro_all: ClassMetrics
    matrix: ConfusionMatrix4
    debiased: "EvalReport | None" = None


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _class_metrics(m: ConfusionMatrix4, cls: PunctClass) -> ClassMetrics:
    tp = m.tp(cls)
    predicted = m.row_sum(cls)
    actual = m.col_sum(cls)
    undefined = []
    if predicted == 0:
        undefined.append("precision")
    if actual == 0:
        undefined.append("recall")
    precision = tp / predicted if predicted else 0.0
    recall = tp / actual if actual else 0.0
    f1 = f1_score(precision, recall)
    if "precision" in undefined and "recall" in undefined:
        undefined.append("f1")
    return ClassMetrics(precision, recall, f1, tuple(undefined))


def _macro(values: Iterable[ClassMetrics]) -> ClassMetrics:
    values = list(values)
    n = len(values)
    return ClassMetrics(
        precision=sum(v.precision for v in values) / n,
        recall=sum(v.recall for v in values) / n,
        f1=sum(v.f1 for v in values) / n,
    )


def metrics(m: ConfusionMatrix4) -> EvalReport:
    """Per-class and macro precision/recall/F1 plus accuracy.

    0/0 cases report 0.0 and are annotated as undefined rather than omitted.
    """
    if m.total() == 0:
        raise UndefinedMetricsError("cannot compute metrics of an empty confusion matrix")
    per_class = {cls: _class_metrics(m, cls) for cls in CLASS_ORDER}
    return EvalReport(
        per_class=per_class,
        accuracy=m.trace() / m.total(),
        macro_punct=_macro(per_class[c] for c in PUNCT_CLASSES),
        macro_all=_macro(per_class[c] for c in CLASS_ORDER),
        matrix=m,
    )


def empty_balance(m: ConfusionMatrix4) -> tuple[int, int]:
    """(false positives, false negatives) of the EMPTY class.

    FP is the EMPTY predicted row minus its diagonal cell; FN is the EMPTY
    true column minus the same cell. A small difference means the tagger
    neither over- nor under-punctuates.
    """
    empty = PunctClass.EMPTY
    fp = m.row_sum(empty) - m.tp(empty)
    fn = m.col_sum(empty) - m.tp(empty)
    return fp, fn


def _as_positions(positions: Iterable[int | tuple[int, int]]) -> set[int]:
    flat = set()
    for p in positions:
        flat.add(p[1] if isinstance(p, tuple) else int(p))
    return flat


def debias_batch_final(
    gold: Sequence[PunctClass],
    pred: Sequence[PunctClass],
    trivial_positions: Iterable[int | tuple[int, int]],
) -> ConfusionMatrix4:
    """Recount the matrix excluding the trivially predictable batch finals.

    Accepts plain word positions or the (group, position) pairs produced by
    ``batcher.mark_trivial_finals``.
    """
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold labels but {len(pred)} predictions")
    excluded = _as_positions(trivial_positions)
    out_of_range = [p for p in excluded if not 0 <= p < len(gold)]
    if out_of_range:
        raise ValueError(f"trivial positions out of range: {sorted(out_of_range)}")
    m = ConfusionMatrix4()
    for i, (g, p) in enumerate(zip(gold, pred)):
        if i not in excluded:
            m.add(predicted=p, gold=g)
    return m


def round1(value: float) -> float:
    """Round half away from zero to one decimal (presentation rule)."""
    return math.copysign(math.floor(abs(value) * 10 + 0.5) / 10, value)


def _pct(x: float) -> str:
    return f"{round1(x * 100):.1f}"


def format_report_table(report: EvalReport, name: str = "this run") -> str:
    """Text table in the comparison layout: Comma, Period, Question, Overall."""
    groups = [
        ("Comma", report.per_class[PunctClass.COMMA]),
        ("Period", report.per_class[PunctClass.PERIOD]),
        ("Question", report.per_class[PunctClass.QUESTION]),
        ("Overall", report.macro_punct),
    ]
    header1 = f"{'':24s}" + "".join(f"{g:<21s}" for g, _ in groups)
    header2 = f"{'Model':<24s}" + "".join(f"{'P':>5s} {'R':>6s} {'F1':>6s}   " for _ in groups)
    row = f"{name:<24s}" + "".join(
        f"{_pct(v.precision):>5s} {_pct(v.recall):>6s} {_pct(v.f1):>6s}   " for _, v in groups
    )
    extras = [
        f"accuracy: {_pct(report.accuracy)}",
        f"macro (all 4 classes): P {_pct(report.macro_all.precision)}"
        f" R {_pct(report.macro_all.recall)} F1 {_pct(report.macro_all.f1)}",
    ]
    undefined = [
        f"{cls.name}.{name}" for cls, cm in report.per_class.items() for name in cm.undefined
    ]
    if undefined:
        extras.append("undefined (0/0, reported as 0.0): " + ", ".join(undefined))
    return "\n".join([header1, header2, row, "", *extras]) + "\n"


def report_to_json_dict(report: EvalReport) -> dict:
    """Machine-readable report: raw counts plus un-rounded metrics."""
    payload = {
        "class_order": [c.name for c in CLASS_ORDER],
        "counts": report.matrix.counts,
        "accuracy": report.accuracy,
        "per_class": {
            cls.name: {
                "precision": cm.precision,
                "recall": cm.recall,
                "f1": cm.f1,
                "undefined": list(cm.undefined),
            }
            for cls, cm in report.per_class.items()
        },
        "macro_punct": {
            "precision": report.macro_punct.precision,
            "recall": report.macro_punct.recall,
            "f1": report.macro_punct.f1,
        },
        "macro_all": {
            "precision": report.macro_all.precision,
            "recall": report.macro_all.recall,
            "f1": report.macro_all.f1,
        },
    }
    fp_empty, fn_empty = empty_balance(report.matrix)
    payload["empty_balance"] = {"false_positives": fp_empty, "false_negatives": fn_empty}
    if report.debiased is not None:
        payload["debiased"] = report_to_json_dict(report.debiased)
    return payload


def write_report(report: EvalReport, out_dir: str | Path, name: str = "this run", stem: str = "report") -> None:
    out = Path(out_dir)
    (out / f"{stem}.txt").write_text(format_report_table(report, name), encoding="utf-8", newline="\n")
    (out / f"{stem}.json").write_text(
        json.dumps(report_to_json_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    (out / f"{stem}_confusion.txt").write_text(report.matrix.format_grid(), encoding="utf-8", newline="\n")
