"""Online mistake detection by precondition checking, and its scoring.

A learned task graph turns into a detector by a simple online rule: an
action is a mistake when some direct precondition of it, other than START,
has not been executed yet.  Every executed action joins the observed set,
even one that was itself flagged, because the stream records what actually
happened.  Repeated steps are re-checked on every occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .graph import TaskGraph
from .sequences import (
    CORRECT,
    MISTAKE,
    KeySequence,
    SequenceDataset,
    perturb,
)


@dataclass(frozen=True)
class DetectionVerdict:
    """Per-step verdict with the missing preconditions that explain it."""

    label: str
    missing_preconditions: frozenset[int]

    def __post_init__(self):
        if self.label not in (CORRECT, MISTAKE):
            raise ValueError(f"unknown verdict label {self.label!r}")
        if (self.label == MISTAKE) != bool(self.missing_preconditions):
            raise ValueError("missing preconditions must be non-empty exactly for mistakes")


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class OmdReport:
    """Per-class detection scores plus their average F1."""

    correct: ClassMetrics
    mistake: ClassMetrics
    average_f1: float

    def summary(self) -> str:
        return (
            f"avg_f1={self.average_f1:.4f} "
            f"correct(f1={self.correct.f1:.4f} p={self.correct.precision:.4f} r={self.correct.recall:.4f}) "
            f"mistake(f1={self.mistake.f1:.4f} p={self.mistake.precision:.4f} r={self.mistake.recall:.4f})"
        )


def detect_stream(g: TaskGraph, seq: KeySequence) -> list[DetectionVerdict]:
    """Label every step of a stream online, using only its prefix.

    START is always correct.  Any other step is a mistake exactly when a
    direct non-START precondition of it is absent from the steps executed
    so far.
    """
    taxonomy = g.taxonomy
    preconditions = {}
    verdicts = []
    observed: set[int] = set()
    for step in seq.steps:
        if not (0 <= step < taxonomy.size):
            raise ValueError(f"step index {step} outside taxonomy of size {taxonomy.size}")
        if step == taxonomy.start:
            verdicts.append(DetectionVerdict(CORRECT, frozenset()))
        else:
            if step not in preconditions:
                preconditions[step] = g.preconditions(step) - {taxonomy.start}
            missing = frozenset(preconditions[step] - observed)
            label = MISTAKE if missing else CORRECT
            verdicts.append(DetectionVerdict(label, missing))
        observed.add(step)
    return verdicts


def omd_metrics(verdicts: Sequence[DetectionVerdict], labels: Sequence[str]) -> OmdReport:
    """Per-class precision/recall/F1 of verdicts against reference labels."""
    if len(verdicts) != len(labels):
        raise ValueError("verdicts and labels must have the same length")
    predicted = [v.label for v in verdicts]
    per_class = {}
    for cls in (CORRECT, MISTAKE):
        tp = sum(1 for p, t in zip(predicted, labels) if p == cls and t == cls)
        fp = sum(1 for p, t in zip(predicted, labels) if p == cls and t != cls)
        fn = sum(1 for p, t in zip(predicted, labels) if p != cls and t == cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls] = ClassMetrics(precision, recall, f1)
    average = (per_class[CORRECT].f1 + per_class[MISTAKE].f1) / 2
    return OmdReport(per_class[CORRECT], per_class[MISTAKE], average)


def detect_dataset(g: TaskGraph, ds: SequenceDataset) -> tuple[list[list[DetectionVerdict]], OmdReport]:
    """Run the detector over a dataset and score it against its labels.

    Sequences without labels are treated as all-correct for scoring.
    """
    all_verdicts = []
    flat_predicted: list[DetectionVerdict] = []
    flat_labels: list[str] = []
    for seq in ds.sequences:
        verdicts = detect_stream(g, seq)
        all_verdicts.append(verdicts)
        flat_predicted.extend(verdicts)
        flat_labels.extend(seq.labels if seq.labels is not None else [CORRECT] * len(seq))
    return all_verdicts, omd_metrics(flat_predicted, flat_labels)


def perturbation_study(
    g: TaskGraph,
    ds: SequenceDataset,
    rates: Sequence[float],
    seed: int,
) -> list[tuple[float, OmdReport]]:
    """Detection scores under increasing simulated detector noise.

    Each rate perturbs the dataset with its own seed derived from ``seed``,
    runs the detector, and scores against the perturbed labels.  Rate 0
    reproduces the unperturbed report exactly.
    """
    rows = []
    for offset, rate in enumerate(rates):
        noisy = perturb(ds, rate, seed + offset)
        _, report = detect_dataset(g, noisy)
        rows.append((float(rate), report))
    return rows
