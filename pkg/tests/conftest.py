"""Shared builders for the test suite."""

import numpy as np
import pytest

from taskgraph import (
    AdjacencyMatrix,
    ScoreMatrix,
    TaskGraph,
    Taxonomy,
    build_mask,
    postprocess_graph,
    softmax_rows,
)


def taxonomy_of(n_steps: int) -> Taxonomy:
    return Taxonomy.from_steps([f"K{i}" for i in range(1, n_steps + 1)])


def chain_graph(n_steps: int) -> TaskGraph:
    """S <- K1 <- K2 <- ... <- E as precondition edges."""
    tax = taxonomy_of(n_steps)
    edges = {(i + 1, i) for i in range(tax.size - 1)}
    return TaskGraph(tax, frozenset(edges))


def random_scores(taxonomy: Taxonomy, rng: np.random.Generator, scale: float = 1.0) -> ScoreMatrix:
    mask = build_mask(taxonomy)
    values = np.where(mask, 0.0, rng.normal(scale=scale, size=mask.shape))
    return ScoreMatrix(values, mask)


def random_adjacency(taxonomy: Taxonomy, rng: np.random.Generator) -> AdjacencyMatrix:
    return softmax_rows(random_scores(taxonomy, rng))


def random_weighted_graph(taxonomy: Taxonomy, rng: np.random.Generator, density: float = 0.5) -> TaskGraph:
    """Arbitrary scored digraph respecting only the structural constraints."""
    size = taxonomy.size
    edges = set()
    scores = {}
    for i in range(1, size):
        for j in range(size - 1):
            if i == j:
                continue
            if rng.random() < density:
                edges.add((i, j))
                scores[(i, j)] = float(rng.random())
    return TaskGraph(taxonomy, frozenset(edges), scores)


def random_truth_graph(n_steps: int, density: float, rng: np.random.Generator) -> TaskGraph:
    """Random precondition DAG in canonical (wired, reduced) form."""
    tax = taxonomy_of(n_steps)
    order = list(rng.permutation(list(tax.step_indices())))
    edges = set()
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if rng.random() < density:
                edges.add((order[b], order[a]))
    return postprocess_graph(TaskGraph(tax, frozenset(edges)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240615)
