"""Core graph types and DAG post-processing.

A task graph is a DAG over a key-step taxonomy whose edge (i, j) states
that step j is a precondition of step i.  Two placeholder terminals frame
every procedure: START (index 0, never depends on anything) and END (last
index, depended on by nothing).  This module holds the taxonomy, the raw
trainable score matrix with its structural mask, the row-normalized
adjacency matrix, and all the post-processing used to turn learned weights
into a clean precondition DAG.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

START = 0

Edge = tuple[int, int]


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Taxonomy:
    """Ordered key-step vocabulary with reserved START and END terminals.

    ``names[0]`` is always the START placeholder and ``names[-1]`` the END
    placeholder; the real key-steps sit in between at indices 1..n.
    """

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) < 3:
            raise ValueError("taxonomy needs START, at least one key-step, and END")
        if len(set(self.names)) != len(self.names):
            raise ValueError("taxonomy names must be unique")

    @classmethod
    def from_steps(cls, steps: Iterable[str], start: str = "START", end: str = "END") -> "Taxonomy":
        """Build a taxonomy from real key-step names, adding the terminals."""
        return cls((start, *steps, end))

    @property
    def size(self) -> int:
        """Total node count, terminals included."""
        return len(self.names)

    @property
    def n_steps(self) -> int:
        """Number of real key-steps (terminals excluded)."""
        return len(self.names) - 2

    @property
    def start(self) -> int:
        return START

    @property
    def end(self) -> int:
        return len(self.names) - 1

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown key-step {name!r}") from None

    def name(self, index: int) -> str:
        return self.names[index]

    def step_indices(self) -> range:
        """Indices of the real key-steps."""
        return range(1, self.size - 1)


def build_mask(taxonomy: Taxonomy) -> np.ndarray:
    """Boolean matrix of structurally forbidden score entries.

    Masked (True) cells: the whole diagonal (no self-loops), the whole
    START row (START has no preconditions), and the whole END column
    (nothing depends on END).
    """
    return _structural_mask(taxonomy.size)


def _structural_mask(size: int) -> np.ndarray:
    mask = np.zeros((size, size), dtype=bool)
    np.fill_diagonal(mask, True)
    mask[START, :] = True
    mask[:, size - 1] = True
    return mask


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Unconstrained trainable edge scores plus their structural mask.

    Masked positions never carry meaningful values and are never touched
    by the optimizer; the mask must include at least the structural cells
    from :func:`build_mask`.
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values, float)
        mask = _frozen_array(self.mask, bool)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError("score matrix must be square")
        if mask.shape != values.shape:
            raise ValueError("mask shape must match score matrix shape")
        structural = _structural_mask(values.shape[0])
        if not np.all(mask[structural]):
            raise ValueError("mask must cover the diagonal, the START row, and the END column")
        if not np.all(np.isfinite(values[~mask])):
            raise ValueError("scores must be finite at unmasked positions")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def initial(cls, taxonomy: Taxonomy) -> "ScoreMatrix":
        """All-zero scores: uniform rows after softmax, no ordering bias."""
        size = taxonomy.size
        return cls(np.zeros((size, size)), _structural_mask(size))

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def with_values(self, values: np.ndarray) -> "ScoreMatrix":
        return ScoreMatrix(values, self.mask)


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Row-normalized edge weights in [0, 1].

    Rows are distributions over a node's candidate preconditions; the
    START row is identically zero because START never has preconditions.
    """

    weights: np.ndarray

    def __post_init__(self):
        weights = _frozen_array(self.weights, float)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if np.any(weights < 0) or np.any(weights > 1):
            raise ValueError("weights must lie in [0, 1]")
        structural = _structural_mask(weights.shape[0])
        if np.any(weights[structural] != 0.0):
            raise ValueError("structurally masked entries must be exactly 0")
        sums = weights.sum(axis=1)
        normalized = np.isclose(sums, 1.0, rtol=0.0, atol=1e-9)
        empty = sums == 0.0
        if not np.all(normalized | empty):
            raise ValueError("each non-empty row must sum to 1 within 1e-9")
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.weights.shape[0]


def softmax_rows(scores: ScoreMatrix) -> AdjacencyMatrix:
    """Row-softmax over unmasked entries; masked entries map to exactly 0.

    Numerically stabilized by per-row max subtraction.  Fully masked rows
    (the START row) come out all-zero rather than raising.
    """
    values = scores.values
    mask = scores.mask
    weights = np.zeros_like(values)
    for i in range(values.shape[0]):
        support = ~mask[i]
        if not support.any():
            continue
        row = values[i, support]
        shifted = np.exp(row - row.max())
        weights[i, support] = shifted / shifted.sum()
    return AdjacencyMatrix(weights)


@dataclass(frozen=True)
class TaskGraph:
    """Directed graph of precondition edges over a taxonomy.

    Edge (i, j) reads "j is a precondition of i".  Construction rejects
    self-loops, edges out of START, and edges into END, but allows cycles:
    a freshly binarized matrix may be cyclic until :func:`break_cycles`
    runs.  ``scores`` optionally carries the weight each edge was kept at.
    """

    taxonomy: Taxonomy
    edges: frozenset[Edge]
    scores: Mapping[Edge, float] | None = None

    def __post_init__(self):
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        size = self.taxonomy.size
        for i, j in edges:
            if not (0 <= i < size and 0 <= j < size):
                raise ValueError(f"edge ({i}, {j}) outside taxonomy of size {size}")
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if i == self.taxonomy.start:
                raise ValueError("START cannot have preconditions")
            if j == self.taxonomy.end:
                raise ValueError("END cannot be a precondition")
        object.__setattr__(self, "edges", edges)
        if self.scores is not None:
            scores = {(int(i), int(j)): float(s) for (i, j), s in self.scores.items()}
            unknown = set(scores) - edges
            if unknown:
                raise ValueError(f"scores given for absent edges: {sorted(unknown)}")
            object.__setattr__(self, "scores", scores)

    def preconditions(self, node: int) -> frozenset[int]:
        """Direct preconditions of ``node`` (its outgoing edge targets)."""
        return frozenset(j for i, j in self.edges if i == node)

    def dependents(self, node: int) -> frozenset[int]:
        """Nodes having ``node`` as a direct precondition."""
        return frozenset(i for i, j in self.edges if j == node)

    def score(self, i: int, j: int) -> float | None:
        if self.scores is None:
            return None
        return self.scores.get((i, j))

    def with_edges(self, edges: Iterable[Edge]) -> "TaskGraph":
        """Same taxonomy, new edge set; scores kept where edges survive."""
        edges = frozenset(edges)
        scores = None
        if self.scores is not None:
            scores = {e: s for e, s in self.scores.items() if e in edges}
        return TaskGraph(self.taxonomy, edges, scores)


def binarize(z: AdjacencyMatrix, taxonomy: Taxonomy, threshold: float | None = None) -> TaskGraph:
    """Threshold the weighted matrix into a discrete edge set.

    The default cutoff is 1/N for N the full node count (terminals
    included); pass ``threshold`` to override.  The comparison is strict,
    so a weight exactly at the cutoff drops the edge.  Kept edges carry
    their weight as the edge score.
    """
    if z.size != taxonomy.size:
        raise ValueError("adjacency matrix size does not match taxonomy")
    if threshold is None:
        threshold = 1.0 / taxonomy.size
    rows, cols = np.nonzero(z.weights > threshold)
    edges = {(int(i), int(j)) for i, j in zip(rows, cols)}
    scores = {e: float(z.weights[e]) for e in edges}
    return TaskGraph(taxonomy, frozenset(edges), scores)


def _successors(g: TaskGraph) -> list[list[int]]:
    succ: list[list[int]] = [[] for _ in range(g.taxonomy.size)]
    for i, j in g.edges:
        succ[i].append(j)
    for lst in succ:
        lst.sort()
    return succ


def is_dag(g: TaskGraph) -> bool:
    """True iff the graph has no directed cycle."""
    return _find_cycle(g) is None


def _find_cycle(g: TaskGraph) -> list[Edge] | None:
    """First directed cycle in deterministic node-index DFS order, or None."""
    succ = _successors(g)
    size = g.taxonomy.size
    WHITE, GRAY, BLACK = 0, 1, 2
    color = [WHITE] * size
    parent_edge: dict[int, int] = {}

    for root in range(size):
        if color[root] != WHITE:
            continue
        stack: list[tuple[int, int]] = [(root, 0)]
        color[root] = GRAY
        while stack:
            node, idx = stack[-1]
            if idx < len(succ[node]):
                stack[-1] = (node, idx + 1)
                nxt = succ[node][idx]
                if color[nxt] == GRAY:
                    # back edge: walk the gray chain back to close the cycle
                    cycle = [(node, nxt)]
                    cur = node
                    while cur != nxt:
                        prev = parent_edge[cur]
                        cycle.append((prev, cur))
                        cur = prev
                    cycle.reverse()
                    return cycle
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    parent_edge[nxt] = node
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                stack.pop()
    return None


def break_cycles(g: TaskGraph) -> TaskGraph:
    """Delete the minimum-score edge of each directed cycle until acyclic.

    Cycles are located one at a time by a deterministic depth-first search
    in node-index order; score ties break on the lexicographically smallest
    (i, j) pair.  Acyclic input passes through untouched, scores or not.
    """
    current = g
    while True:
        cycle = _find_cycle(current)
        if cycle is None:
            return current
        if current.scores is None or any(e not in current.scores for e in cycle):
            raise ValueError("cannot break cycles without edge scores")
        victim = min(cycle, key=lambda e: (current.scores[e], e))
        current = current.with_edges(current.edges - {victim})


def _reachability(g: TaskGraph) -> np.ndarray:
    """Boolean reachability closure (paths of length >= 1)."""
    size = g.taxonomy.size
    reach = np.zeros((size, size), dtype=bool)
    for i, j in g.edges:
        reach[i, j] = True
    for k in range(size):
        reach |= np.outer(reach[:, k], reach[k, :])
    return reach


def transitive_reduction(g: TaskGraph) -> TaskGraph:
    """Drop every edge shadowed by a longer directed path.

    An edge (i, j) is redundant when some other path i -> ... -> j of
    length at least 2 exists; removing all redundant edges at once leaves
    reachability unchanged on a DAG.  Cyclic input is rejected because the
    reduction is only well defined for DAGs.
    """
    if not is_dag(g):
        raise ValueError("transitive reduction requires an acyclic graph")
    reach = _reachability(g)
    succ = _successors(g)
    kept = set()
    for i, j in g.edges:
        shadowed = any(w != j and reach[w, j] for w in succ[i])
        if not shadowed:
            kept.add((i, j))
    return g.with_edges(kept)


def omd_prune(g: TaskGraph) -> TaskGraph:
    """Mistake-detection variant of the redundancy cleanup.

    A node whose only two preconditions are START and one other step loses
    the non-START edge outright; all remaining redundancy is handled by the
    ordinary transitive reduction.  Tolerant pruning like this keeps early
    steps lightly constrained, which suits noisy detection streams.
    """
    start = g.taxonomy.start
    drop = set()
    for node in range(1, g.taxonomy.size):
        pre = g.preconditions(node)
        if len(pre) == 2 and start in pre:
            (other,) = pre - {start}
            drop.add((node, other))
    return transitive_reduction(g.with_edges(g.edges - drop))


def wire_terminals(g: TaskGraph) -> TaskGraph:
    """Connect dangling key-steps to the START and END terminals.

    A key-step that is a precondition of nothing gains an incoming edge
    from END; a key-step with no preconditions of its own gains an edge to
    START.  Both rules evaluate against the edge set as given, and neither
    ever touches the terminals themselves.
    """
    edges = set(g.edges)
    has_dependent = {j for _, j in g.edges}
    has_precondition = {i for i, _ in g.edges}
    for node in g.taxonomy.step_indices():
        if node not in has_dependent:
            edges.add((g.taxonomy.end, node))
        if node not in has_precondition:
            edges.add((node, g.taxonomy.start))
    return g.with_edges(edges)


def postprocess_graph(g: TaskGraph, mode: str = "standard") -> TaskGraph:
    """Clean a thresholded graph into its final DAG form.

    Standard mode breaks cycles, wires the terminals, and transitively
    reduces; running the reduction after the wiring is what guarantees the
    output carries no shadowed edges (wiring alone can shadow edges into
    START or out of END).  The ``omd`` mode instead applies the lenient
    START-pair pruning before wiring, matching the detection pipeline.
    """
    if mode not in ("standard", "omd"):
        raise ValueError(f"unknown post-processing mode {mode!r}")
    g = break_cycles(g)
    if mode == "omd":
        g = omd_prune(g)
        return wire_terminals(g)
    g = wire_terminals(g)
    return transitive_reduction(g)


def postprocess(
    z: AdjacencyMatrix,
    taxonomy: Taxonomy,
    threshold: float | None = None,
    mode: str = "standard",
) -> TaskGraph:
    """Binarize a weighted adjacency matrix and post-process the result."""
    return postprocess_graph(binarize(z, taxonomy, threshold), mode=mode)
