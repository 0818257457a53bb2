"""Sequence likelihood under a weighted precondition graph, and its loss.

The model scores how plausible an observed ordering is given row-normalized
edge weights.  The feasibility of a candidate step is the total weight of
its edges into the already-observed steps; the probability of the step
actually observed is its feasibility divided by the summed feasibility of
every still-unobserved step.  Multiplying these per-step probabilities
(START is free) gives the sequence likelihood; summing log-likelihoods over
a dataset gives the training objective, with the normalizing denominator
optionally down-weighted to keep its many addends from dominating the
gradient.  Note the denominator includes the current step's own
feasibility, since the current step is still unobserved at its own turn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import AdjacencyMatrix, ScoreMatrix, softmax_rows
from .sequences import KeySequence, ObservationSplit, SequenceDataset


class DegenerateGraphError(ValueError):
    """No unobserved step has any feasibility mass; probabilities undefined.

    Cannot happen for softmax-produced matrices, whose rows put strictly
    positive weight on every unmasked entry.
    """


@dataclass(frozen=True)
class StepTrace:
    """Numerator, denominator, and value of one step probability."""

    numerator: float
    denominator: float
    probability: float


def step_probability(z: AdjacencyMatrix, split: ObservationSplit) -> StepTrace:
    """Probability of the current step given the observed set.

    Numerator: summed weight from the current step into the observed set.
    Denominator: the same sum taken over every unobserved step.
    """
    size = z.size
    if split.observed | split.unobserved != frozenset(range(size)):
        raise ValueError("split does not partition the node indices of the matrix")
    obs = sorted(split.observed)
    feasibility = z.weights[:, obs].sum(axis=1)
    numerator = float(feasibility[split.current])
    denominator = float(feasibility[sorted(split.unobserved)].sum())
    if denominator == 0.0:
        raise DegenerateGraphError(
            "every unobserved step has zero feasibility for the observed set"
        )
    return StepTrace(numerator, denominator, numerator / denominator)


def _require_trainable(seq: KeySequence, size: int) -> None:
    if seq.has_repetitions():
        raise ValueError(
            "sequence contains repeated steps; expand repetitions before scoring"
        )
    for s in seq.steps:
        if not (0 <= s < size):
            raise ValueError(f"step index {s} outside matrix of size {size}")


def _sequence_traces(z: AdjacencyMatrix, seq: KeySequence) -> list[StepTrace]:
    """Per-step traces after START, sharing one incremental feasibility pass."""
    _require_trainable(seq, z.size)
    weights = z.weights
    unobserved = np.ones(z.size, dtype=bool)
    unobserved[seq.steps[0]] = False
    # feasibility[h] = total weight from h into the observed set so far
    feasibility = weights[:, seq.steps[0]].copy()
    traces = []
    for t in range(1, len(seq)):
        current = seq.steps[t]
        numerator = float(feasibility[current])
        denominator = float(feasibility[unobserved].sum())
        if denominator == 0.0:
            raise DegenerateGraphError(
                "every unobserved step has zero feasibility for the observed set"
            )
        traces.append(StepTrace(numerator, denominator, numerator / denominator))
        unobserved[current] = False
        feasibility += weights[:, current]
    return traces


def sequence_log_likelihood(z: AdjacencyMatrix, seq: KeySequence) -> tuple[float, list[StepTrace]]:
    """Log-likelihood of one terminal-wrapped, repetition-free sequence.

    START contributes probability 1.  A step with zero feasibility makes
    the sequence impossible and the result -inf.
    """
    traces = _sequence_traces(z, seq)
    total = 0.0
    for trace in traces:
        if trace.probability == 0.0:
            return float("-inf"), traces
        total += float(np.log(trace.probability))
    return total, traces


def contrastive_nll(z: AdjacencyMatrix, dataset: SequenceDataset, beta: float) -> float:
    """Negative log-likelihood with a weighted normalizing term.

    Per step the objective takes ``log(numerator) - beta * log(denominator)``
    and negates the dataset total.  At ``beta`` = 1 this is exactly the
    negative log-likelihood of the whole dataset; smaller values soften the
    contrastive push on the denominator's many competing edges.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    total = 0.0
    for seq in dataset.sequences:
        for trace in _sequence_traces(z, seq):
            if trace.numerator == 0.0:
                return float("inf")
            total += float(np.log(trace.numerator)) - beta * float(np.log(trace.denominator))
    return -total


def contrastive_nll_grad(
    scores: ScoreMatrix, dataset: SequenceDataset, beta: float
) -> tuple[float, np.ndarray]:
    """Loss and its exact gradient with respect to the raw scores.

    The weighted matrix is the row softmax of the scores, so the chain rule
    runs through each row's softmax Jacobian; masked entries receive zero
    gradient.  Returns ``(loss, gradient)``.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    z = softmax_rows(scores)
    weights = z.weights
    size = z.size

    loss = 0.0
    dloss_dz = np.zeros_like(weights)
    for seq in dataset.sequences:
        _require_trainable(seq, size)
        unobserved = np.ones(size, dtype=bool)
        unobserved[seq.steps[0]] = False
        observed_idx = [seq.steps[0]]
        feasibility = weights[:, seq.steps[0]].copy()
        for t in range(1, len(seq)):
            current = seq.steps[t]
            numerator = float(feasibility[current])
            denominator = float(feasibility[unobserved].sum())
            if numerator == 0.0 or denominator == 0.0:
                raise DegenerateGraphError(
                    "zero step probability; the loss gradient is undefined"
                )
            loss -= float(np.log(numerator)) - beta * float(np.log(denominator))
            dloss_dz[current, observed_idx] -= 1.0 / numerator
            dloss_dz[np.ix_(unobserved, observed_idx)] += beta / denominator
            unobserved[current] = False
            observed_idx.append(current)
            feasibility += weights[:, current]

    # backprop through the row softmax; rows with zero weight stay zero
    inner = (dloss_dz * weights).sum(axis=1, keepdims=True)
    grad = weights * (dloss_dz - inner)
    return loss, grad
