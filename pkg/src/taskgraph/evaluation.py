"""Edge-level comparison of a predicted graph against a reference graph."""

from __future__ import annotations

from dataclasses import dataclass

from .graph import TaskGraph


@dataclass(frozen=True)
class EdgeEvalReport:
    """Edge detection counts and the derived precision/recall/F1.

    Undefined ratios (0/0) are reported as 0.
    """

    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "EdgeEvalReport":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(tp, fp, fn, precision, recall, f1)

    def summary(self) -> str:
        return (
            f"precision={self.precision:.4f} recall={self.recall:.4f} f1={self.f1:.4f} "
            f"tp={self.tp} fp={self.fp} fn={self.fn}"
        )


def edge_prf(predicted: TaskGraph, truth: TaskGraph) -> EdgeEvalReport:
    """Score predicted edges as detections of the reference edges.

    True positives are edges present in both graphs, false positives are
    predicted-only edges, false negatives reference-only edges.  Terminal
    edges count like any others.
    """
    if predicted.taxonomy != truth.taxonomy:
        raise ValueError("graphs must share the same taxonomy")
    tp = len(predicted.edges & truth.edges)
    fp = len(predicted.edges - truth.edges)
    fn = len(truth.edges - predicted.edges)
    return EdgeEvalReport.from_counts(tp, fp, fn)
