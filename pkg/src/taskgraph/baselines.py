"""Order-statistics baseline for graph construction.

Reconstructs precondition edges by counting, for every pair of steps, how
often one appears before the other across the dataset.  The exact counting
rule of the method this stands in for is not published; the per-pair ratio
below is a plain symbolic reconstruction and should be read as approximate.
"""

from __future__ import annotations

import numpy as np

from .graph import TaskGraph, postprocess_graph
from .sequences import SequenceDataset


def count_based_graph(
    ds: SequenceDataset, threshold: float = 0.5, mode: str = "standard"
) -> TaskGraph:
    """Precondition graph from pairwise before/after counts.

    The weight of candidate edge i -> j is the fraction of sequences
    containing both i and j in which j comes first; edges strictly above
    ``threshold`` are kept and the standard post-processing pipeline runs
    on the result.  Expects repetition-free sequences, for which the two
    directions of a co-occurring pair always sum to 1.
    """
    taxonomy = ds.taxonomy
    size = taxonomy.size
    before = np.zeros((size, size))
    together = np.zeros((size, size))
    for seq in ds.sequences:
        if seq.has_repetitions():
            raise ValueError("expand repetitions before counting step orders")
        steps = seq.steps
        for a_pos, a in enumerate(steps):
            for b in steps[a_pos + 1:]:
                together[a, b] += 1
                together[b, a] += 1
                before[b, a] += 1  # a precedes b, so a may be a precondition of b

    with np.errstate(invalid="ignore"):
        weights = np.where(together > 0, before / np.maximum(together, 1), 0.0)
    weights[taxonomy.start, :] = 0.0
    weights[:, taxonomy.end] = 0.0
    np.fill_diagonal(weights, 0.0)

    rows, cols = np.nonzero(weights > threshold)
    edges = frozenset((int(i), int(j)) for i, j in zip(rows, cols))
    scores = {e: float(weights[e]) for e in edges}
    return postprocess_graph(TaskGraph(taxonomy, edges, scores), mode=mode)
