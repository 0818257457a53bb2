"""Full-batch training of the score matrix with early stopping.

One epoch is one Adam step on the dataset gradient.  After every epoch the
current weights are binarized and checked against the training sequences
with a sequence-accuracy score; training stops once that score has reached
its target and then plateaued, or at the epoch budget.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .graph import (
    AdjacencyMatrix,
    ScoreMatrix,
    TaskGraph,
    binarize,
    softmax_rows,
)
from .likelihood import contrastive_nll_grad
from .sequences import SequenceDataset


class NonFiniteLossError(ArithmeticError):
    """Training aborted because the loss left the finite range."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of a training run.

    Defaults follow the reference recipe for symbolic sequences: learning
    rate 0.1, Adam, contrastive weight 0.005, up to 1000 epochs, stopping
    once sequence accuracy reaches 0.95 and then stalls for 25 epochs.
    Large noisy-domain runs typically raise ``max_epochs`` to 1200.
    """

    learning_rate: float = 0.1
    max_epochs: int = 1000
    beta: float = 0.005
    seed: int = 0
    sa_target: float = 0.95
    sa_patience: int = 25
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.max_epochs < 0:
            raise ValueError("max epochs cannot be negative")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if not (0 < self.sa_target <= 1):
            raise ValueError("sequence-accuracy target must lie in (0, 1]")
        if self.sa_patience < 1:
            raise ValueError("patience must be at least one epoch")


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch telemetry and the final state of a training run."""

    losses: tuple[float, ...]
    sequence_accuracies: tuple[float, ...]
    epochs: int
    stop_reason: str
    scores: ScoreMatrix
    adjacency: AdjacencyMatrix
    config: TrainConfig

    def metrics_csv(self) -> str:
        """Comma-separated per-epoch stream: epoch, loss, sequence accuracy."""
        out = io.StringIO()
        out.write("epoch,loss,sequence_accuracy\n")
        for epoch, (loss, sa) in enumerate(zip(self.losses, self.sequence_accuracies), 1):
            out.write(f"{epoch},{loss!r},{sa!r}\n")
        return out.getvalue()


class Adam:
    """Plain Adam with bias correction, operating on one dense matrix."""

    def __init__(self, shape, lr: float, beta1: float, beta2: float, eps: float):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)

    def step(self, values: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return values - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def sequence_accuracy(graph: TaskGraph, dataset: SequenceDataset) -> float:
    """Compatibility of a binarized graph with the training sequences.

    A position scores 1 when the graph predicts no preconditions and none
    have been seen, the fraction of predicted preconditions already seen
    when both sides are non-empty, and 0 otherwise; sequences average their
    positions and the dataset averages its sequences.
    """
    per_sequence = []
    for seq in dataset.sequences:
        total = 0.0
        for i, step in enumerate(seq.steps):
            prefix = set(seq.steps[:i])
            predicted = graph.preconditions(step)
            if not prefix and not predicted:
                total += 1.0
            elif prefix and predicted:
                total += len(prefix & predicted) / len(predicted)
        per_sequence.append(total / len(seq))
    return float(np.mean(per_sequence))


def train_graph(dataset: SequenceDataset, config: TrainConfig = TrainConfig()) -> TrainReport:
    """Learn edge scores from a repetition-free, terminal-wrapped dataset.

    Runs deterministic full-batch Adam from an all-zero (uniform) score
    matrix.  Masked entries carry zero gradient and are restored after
    every step, so they never change.
    """
    taxonomy = dataset.taxonomy
    scores = ScoreMatrix.initial(taxonomy)
    mask = scores.mask
    optimizer = Adam(
        scores.values.shape,
        lr=config.learning_rate,
        beta1=config.adam_beta1,
        beta2=config.adam_beta2,
        eps=config.adam_epsilon,
    )

    losses: list[float] = []
    accuracies: list[float] = []
    stop_reason = "max_epochs"
    best_sa: float | None = None
    stalled = 0

    values = scores.values.copy()
    for _ in range(config.max_epochs):
        loss, grad = contrastive_nll_grad(scores, dataset, config.beta)
        if not np.isfinite(loss):
            raise NonFiniteLossError(f"loss became {loss} at epoch {len(losses) + 1}")
        values = optimizer.step(values, grad)
        values[mask] = 0.0
        scores = scores.with_values(values)
        losses.append(loss)

        snapshot = binarize(softmax_rows(scores), taxonomy)
        sa = sequence_accuracy(snapshot, dataset)
        accuracies.append(sa)

        if best_sa is None:
            if sa >= config.sa_target:
                best_sa = sa
                stalled = 0
        elif sa > best_sa:
            best_sa = sa
            stalled = 0
        else:
            stalled += 1
            if stalled >= config.sa_patience:
                stop_reason = "sa_plateau"
                break

    return TrainReport(
        losses=tuple(losses),
        sequence_accuracies=tuple(accuracies),
        epochs=len(losses),
        stop_reason=stop_reason,
        scores=scores,
        adjacency=softmax_rows(scores),
        config=config,
    )
