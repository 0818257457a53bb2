"""Demonstration sequences: ingestion, expansion, synthetic generation, noise.

Sequences are lists of taxonomy indices framed by the START and END
terminals.  Training requires repetition-free sequences, so recordings with
repeated steps are expanded into every repetition-free reading first.  A
seeded topological-sort sampler doubles as the ground-truth generator for
verification, and a perturbation helper simulates noisy step detectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Taxonomy, TaskGraph, is_dag

CORRECT = "correct"
MISTAKE = "mistake"
LABELS = (CORRECT, MISTAKE)

PERTURBATION_KINDS = ("insert", "delete", "replace")


class ExpansionLimitError(ValueError):
    """Repetition expansion would exceed the configured cap."""


@dataclass(frozen=True)
class KeySequence:
    """One demonstration as taxonomy indices, START-prefixed and END-suffixed.

    ``labels`` optionally carries a per-step correct/mistake annotation,
    aligned with ``steps`` (terminals included).
    """

    steps: tuple[int, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        steps = tuple(int(s) for s in self.steps)
        if len(steps) < 2:
            raise ValueError("sequence must contain at least START and END")
        object.__setattr__(self, "steps", steps)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(steps):
                raise ValueError("labels must align one-to-one with steps")
            bad = set(labels) - set(LABELS)
            if bad:
                raise ValueError(f"unknown labels: {sorted(bad)}")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def inner(self) -> tuple[int, ...]:
        """The real key-steps, terminals stripped."""
        return self.steps[1:-1]

    def has_repetitions(self) -> bool:
        return len(set(self.steps)) != len(self.steps)


def validate_sequence(seq: KeySequence, taxonomy: Taxonomy) -> None:
    """Check terminal framing and index range against a taxonomy."""
    start, end = taxonomy.start, taxonomy.end
    if seq.steps[0] != start:
        raise ValueError("sequence must begin with START")
    if seq.steps[-1] != end:
        raise ValueError("sequence must end with END")
    for s in seq.inner:
        if not (0 <= s < taxonomy.size):
            raise ValueError(f"step index {s} outside taxonomy of size {taxonomy.size}")
        if s in (start, end):
            raise ValueError("terminals may only appear at the sequence ends")


@dataclass(frozen=True)
class SequenceDataset:
    """A taxonomy plus the demonstration sequences recorded for it."""

    taxonomy: Taxonomy
    sequences: tuple[KeySequence, ...]

    def __post_init__(self):
        sequences = tuple(self.sequences)
        if not sequences:
            raise ValueError("dataset must contain at least one sequence")
        for seq in sequences:
            validate_sequence(seq, self.taxonomy)
        object.__setattr__(self, "sequences", sequences)

    def __len__(self) -> int:
        return len(self.sequences)

    @property
    def labeled(self) -> bool:
        return all(seq.labels is not None for seq in self.sequences)


@dataclass(frozen=True)
class ObservationSplit:
    """Observed/unobserved index partition at one step of a sequence.

    ``current`` is the step whose probability is being evaluated; it always
    belongs to the unobserved side.
    """

    observed: frozenset[int]
    unobserved: frozenset[int]
    current: int

    def __post_init__(self):
        observed = frozenset(self.observed)
        unobserved = frozenset(self.unobserved)
        if observed & unobserved:
            raise ValueError("observed and unobserved sets must be disjoint")
        if self.current not in unobserved:
            raise ValueError("current step must be unobserved")
        object.__setattr__(self, "observed", observed)
        object.__setattr__(self, "unobserved", unobserved)

    @classmethod
    def at_step(cls, seq: KeySequence, t: int, taxonomy: Taxonomy) -> "ObservationSplit":
        if not (1 <= t < len(seq)):
            raise ValueError("step index must address a post-START position")
        observed = frozenset(seq.steps[:t])
        unobserved = frozenset(range(taxonomy.size)) - observed
        return cls(observed, unobserved, seq.steps[t])


def wrap_terminals(
    raw: Sequence[int],
    taxonomy: Taxonomy,
    labels: Sequence[str] | None = None,
) -> KeySequence:
    """Frame a raw key-step index list with START and END.

    The raw list must not already contain the terminals.  Optional labels
    align with the raw steps; the added terminals are labeled correct.
    """
    start, end = taxonomy.start, taxonomy.end
    for s in raw:
        if s in (start, end):
            raise ValueError("raw sequence already contains a terminal index")
    wrapped_labels = None
    if labels is not None:
        if len(labels) != len(raw):
            raise ValueError("labels must align one-to-one with raw steps")
        wrapped_labels = (CORRECT, *labels, CORRECT)
    seq = KeySequence((start, *raw, end), wrapped_labels)
    validate_sequence(seq, taxonomy)
    return seq


def expand_repetitions(seq: KeySequence, cap: int = 256) -> list[KeySequence]:
    """All repetition-free readings of a sequence with repeated steps.

    Each repeated step keeps exactly one of its occurrences; every
    combination of such choices yields one candidate reading, duplicates
    are dropped, and relative order is preserved.  A sequence whose choice
    count exceeds ``cap`` is rejected instead of expanded.
    """
    positions: dict[int, list[int]] = {}
    for pos, step in enumerate(seq.steps):
        positions.setdefault(step, []).append(pos)

    combinations = 1
    for occ in positions.values():
        combinations *= len(occ)
    if combinations > cap:
        raise ExpansionLimitError(
            f"sequence {seq.steps} expands to {combinations} readings (cap {cap})"
        )

    results: list[KeySequence] = []
    seen: set[tuple[int, ...]] = set()
    for choice in itertools.product(*positions.values()):
        kept = sorted(choice)
        steps = tuple(seq.steps[p] for p in kept)
        if steps in seen:
            continue
        seen.add(steps)
        labels = tuple(seq.labels[p] for p in kept) if seq.labels is not None else None
        results.append(KeySequence(steps, labels))
    return results


def expand_dataset(ds: SequenceDataset, cap: int = 256) -> SequenceDataset:
    """Expand every sequence of a dataset into repetition-free readings."""
    expanded: list[KeySequence] = []
    for seq in ds.sequences:
        expanded.extend(expand_repetitions(seq, cap=cap))
    return SequenceDataset(ds.taxonomy, tuple(expanded))


def merge_datasets(datasets: Sequence[SequenceDataset]) -> SequenceDataset:
    """Pool sequences from several datasets sharing one taxonomy."""
    if not datasets:
        raise ValueError("nothing to merge")
    taxonomy = datasets[0].taxonomy
    for ds in datasets[1:]:
        if ds.taxonomy != taxonomy:
            raise ValueError("datasets to merge must share the same taxonomy")
    sequences = tuple(seq for ds in datasets for seq in ds.sequences)
    return SequenceDataset(taxonomy, sequences)


def sample_topological_sorts(g: TaskGraph, count: int, seed: int) -> SequenceDataset:
    """Draw seeded random linear extensions of a precondition DAG.

    At each position the next step is chosen uniformly among the unplaced
    steps whose preconditions have all been placed, realizing the uniform
    favorable-case generative model; END is held back until every real
    key-step is placed so each sample is a full extension from START to END.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    if not is_dag(g):
        raise ValueError("sampling requires an acyclic graph")
    taxonomy = g.taxonomy
    preconditions = [g.preconditions(node) for node in range(taxonomy.size)]
    rng = np.random.default_rng(seed)

    sequences = []
    for _ in range(count):
        placed = {taxonomy.start}
        order = [taxonomy.start]
        pending = set(range(taxonomy.size)) - placed
        while pending:
            feasible = sorted(
                node for node in pending
                if node != taxonomy.end and preconditions[node] <= placed
            )
            if not feasible:
                if pending == {taxonomy.end}:
                    break
                raise ValueError(
                    "graph has steps whose preconditions can never all be satisfied"
                )
            nxt = feasible[int(rng.integers(len(feasible)))]
            placed.add(nxt)
            order.append(nxt)
            pending.discard(nxt)
        order.append(taxonomy.end)
        sequences.append(KeySequence(tuple(order)))
    return SequenceDataset(taxonomy, tuple(sequences))


def perturb(
    ds: SequenceDataset,
    rate: float,
    seed: int,
    kinds: Sequence[str] = PERTURBATION_KINDS,
) -> SequenceDataset:
    """Simulate detector noise on every real key-step of a dataset.

    Each non-terminal step is independently hit with probability ``rate``;
    the kind of hit is drawn uniformly from ``kinds``.  An insert places a
    uniformly random step class right after the original one, a delete
    removes the step, and a replace swaps in a different class.  Inserted
    steps are never themselves perturbed.  Labels follow the edits: a
    replaced step keeps its label (the underlying action did not change,
    only its reading), an inserted step counts as correct noise, a deleted
    step takes its label with it.
    """
    if not (0.0 <= rate <= 1.0):
        raise ValueError("perturbation rate must lie in [0, 1]")
    for kind in kinds:
        if kind not in PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation kind {kind!r}")
    taxonomy = ds.taxonomy
    classes = list(taxonomy.step_indices())
    rng = np.random.default_rng(seed)

    sequences = []
    for seq in ds.sequences:
        labeled = seq.labels is not None
        steps: list[int] = [seq.steps[0]]
        labels: list[str] = [seq.labels[0]] if labeled else []
        for pos in range(1, len(seq) - 1):
            step = seq.steps[pos]
            label = seq.labels[pos] if labeled else None
            if rng.random() >= rate:
                steps.append(step)
                if labeled:
                    labels.append(label)
                continue
            kind = kinds[int(rng.integers(len(kinds)))]
            if kind == "insert":
                steps.append(step)
                steps.append(int(rng.choice(classes)))
                if labeled:
                    labels.extend([label, CORRECT])
            elif kind == "delete":
                pass
            else:  # replace with a different class when one exists
                others = [c for c in classes if c != step]
                steps.append(int(rng.choice(others)) if others else step)
                if labeled:
                    labels.append(label)
        steps.append(seq.steps[-1])
        if labeled:
            labels.append(seq.labels[-1])
        sequences.append(KeySequence(tuple(steps), tuple(labels) if labeled else None))
    return SequenceDataset(taxonomy, tuple(sequences))
