"""Micro-averaged precision, recall and F1 over answer selections.

Counts are aggregated globally across queries before any division, which is
what distinguishes the micro score from a per-query (macro) average. Zero
denominators follow fixed conventions: precision is 0 when nothing was
retrieved, recall is 0 when nothing is relevant, F1 is 0 when P + R is 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Mapping

from .corpus import Dataset
from .errors import ValidationError


@dataclass(frozen=True)
class EvalReport:
    retrieved: int
    relevant: int
    correct: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, correct: int, retrieved: int, relevant: int) -> "EvalReport":
        precision = correct / retrieved if retrieved else 0.0
        recall = correct / relevant if relevant else 0.0
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        return cls(retrieved, relevant, correct, precision, recall, f1)

    def to_dict(self) -> dict:
        return {
            "retrieved": self.retrieved,
            "relevant": self.relevant,
            "correct": self.correct,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class ReportDelta:
    retrieved: int
    relevant: int
    correct: int
    precision: float
    recall: float
    f1: float


def micro_prf(
    predictions: Mapping[str, AbstractSet[str]], gold: Dataset
) -> EvalReport:
    """Micro P/R/F1 of predicted answer sets against a labeled dataset.

    Relevant counts cover every gold example, including ones with no
    prediction; predicting for an example outside the dataset is an error.
    """
    if not gold.labeled:
        raise ValidationError("evaluation requires a labeled dataset")
    gold_sets = {ex.example_id: ex.gold for ex in gold.examples}
    unknown = sorted(set(predictions) - set(gold_sets))
    if unknown:
        raise ValidationError(f"predictions for unknown examples {unknown}")
    correct = 0
    retrieved = 0
    relevant = 0
    for example_id, gold_set in gold_sets.items():
        predicted = predictions.get(example_id, frozenset())
        retrieved += len(predicted)
        relevant += len(gold_set)
        correct += len(set(predicted) & gold_set)
    return EvalReport.from_counts(correct, retrieved, relevant)


def compare_reports(a: EvalReport, b: EvalReport) -> ReportDelta:
    """Componentwise signed differences a - b (for ablation tables)."""
    return ReportDelta(
        retrieved=a.retrieved - b.retrieved,
        relevant=a.relevant - b.relevant,
        correct=a.correct - b.correct,
        precision=a.precision - b.precision,
        recall=a.recall - b.recall,
        f1=a.f1 - b.f1,
    )


def format_report(report: EvalReport, title: str = "evaluation") -> str:
    """Aligned text rendering with 4 decimal places."""
    return "\n".join(
        [
            f"{title}",
            f"  correct    {report.correct:6d}",
            f"  retrieved  {report.retrieved:6d}",
            f"  relevant   {report.relevant:6d}",
            f"  precision  {report.precision:.4f}",
            f"  recall     {report.recall:.4f}",
            f"  f1         {report.f1:.4f}",
        ]
    )
