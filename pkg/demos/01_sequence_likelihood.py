"""
How a weighted precondition graph scores an observed sequence
==============================================================

A task graph stores, for every step, a row of weights over its candidate
preconditions.  This demo builds a tiny 4-node graph by hand (START, A, B,
END) and walks through the probability of observing the sequence
START, A, B, END under it, step by step.
"""

import numpy as np

from taskgraph import (
    AdjacencyMatrix,
    KeySequence,
    ObservationSplit,
    SequenceDataset,
    Taxonomy,
    contrastive_nll,
    sequence_log_likelihood,
    step_probability,
)

taxonomy = Taxonomy.from_steps(["A", "B"])
print("taxonomy:", taxonomy.names)

# Rows are distributions over candidate preconditions.  A leans equally on
# START and B; B leans equally on START and A; END mostly waits for A and B.
weights = np.zeros((4, 4))
weights[1, 0], weights[1, 2] = 0.5, 0.5          # A
weights[2, 0], weights[2, 1] = 0.5, 0.5          # B
weights[3, 0], weights[3, 1], weights[3, 2] = 0.2, 0.4, 0.4  # END
z = AdjacencyMatrix(weights)

# After observing only START, how likely is A to come next?  A's feasibility
# is its weight into the observed set; the denominator pools the feasibility
# of everything not yet observed (A, B, and END).
split = ObservationSplit(frozenset({0}), frozenset({1, 2, 3}), current=1)
trace = step_probability(z, split)
print(f"\nP(A | START) = {trace.numerator:.2f} / {trace.denominator:.2f} "
      f"= {trace.probability:.4f}")

# The probabilities of all candidates always share one denominator, so they
# sum to exactly 1.
for candidate in (1, 2, 3):
    s = ObservationSplit(frozenset({0}), frozenset({1, 2, 3}), candidate)
    print(f"  candidate {taxonomy.name(candidate):5s} -> "
          f"{step_probability(z, s).probability:.4f}")

# A full sequence multiplies its per-step probabilities; START is free.
sequence = KeySequence((0, 1, 2, 3))
loglik, traces = sequence_log_likelihood(z, sequence)
print(f"\nlog P(START,A,B,END) = {loglik:.4f}")
for t, trace in enumerate(traces, start=1):
    print(f"  step {taxonomy.name(sequence.steps[t]):5s}: p = {trace.probability:.4f}")

# The training loss is the negated log-likelihood summed over a dataset,
# with the denominator term scaled by beta.  At beta=1 it is the exact
# negative log-likelihood.
dataset = SequenceDataset(taxonomy, (sequence,))
print(f"\nloss at beta=1:     {contrastive_nll(z, dataset, beta=1.0):.4f}")
print(f"loss at beta=0.005: {contrastive_nll(z, dataset, beta=0.005):.4f}")
