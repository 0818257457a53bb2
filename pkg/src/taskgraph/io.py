"""File formats shared by the library, the CLI, and external tooling.

Graphs and datasets are stored as JSON.  A graph file holds the taxonomy
and an edge list with optional scores; a dataset file holds the taxonomy,
the sequences (step names or indices, with or without explicit terminals),
and optional per-step labels.  Graph files can also be exported to DOT for
rendering; DOT output is write-only.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .graph import TaskGraph, Taxonomy
from .sequences import KeySequence, SequenceDataset, wrap_terminals


def resolve_step(taxonomy: Taxonomy, ref: object) -> int:
    """Resolve a step given by name or integer index."""
    if isinstance(ref, bool):
        raise ValueError(f"invalid step reference {ref!r}")
    if isinstance(ref, int):
        if not (0 <= ref < taxonomy.size):
            raise ValueError(f"step index {ref} outside taxonomy of size {taxonomy.size}")
        return ref
    if isinstance(ref, str):
        return taxonomy.index(ref)
    raise ValueError(f"invalid step reference {ref!r}")


def _taxonomy_from(obj: Any) -> Taxonomy:
    names = obj.get("taxonomy")
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise ValueError("'taxonomy' must be a list of step names")
    return Taxonomy(tuple(names))


# -- graphs -----------------------------------------------------------------

def graph_to_dict(g: TaskGraph, config: dict | None = None) -> dict:
    edges = []
    for i, j in sorted(g.edges):
        entry: dict[str, Any] = {"from": g.taxonomy.name(i), "to": g.taxonomy.name(j)}
        score = g.score(i, j)
        if score is not None:
            entry["score"] = score
        edges.append(entry)
    doc: dict[str, Any] = {"taxonomy": list(g.taxonomy.names), "edges": edges}
    if config is not None:
        doc["config"] = config
    return doc


def graph_from_dict(obj: dict) -> TaskGraph:
    taxonomy = _taxonomy_from(obj)
    raw_edges = obj.get("edges")
    if not isinstance(raw_edges, list):
        raise ValueError("'edges' must be a list")
    edges = set()
    scores = {}
    scored = False
    for entry in raw_edges:
        i = resolve_step(taxonomy, entry["from"])
        j = resolve_step(taxonomy, entry["to"])
        edges.add((i, j))
        if "score" in entry and entry["score"] is not None:
            scores[(i, j)] = float(entry["score"])
            scored = True
    return TaskGraph(taxonomy, frozenset(edges), scores if scored else None)


def save_graph(g: TaskGraph, path: str | Path, config: dict | None = None) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g, config), indent=2, sort_keys=True) + "\n")


def load_graph(path: str | Path) -> TaskGraph:
    return graph_from_dict(json.loads(Path(path).read_text()))


def to_dot(g: TaskGraph) -> str:
    """DOT rendering of a graph; read it bottom-up, START sits lowest."""
    lines = ["digraph taskgraph {", "  rankdir=BT;"]
    for idx, name in enumerate(g.taxonomy.names):
        lines.append(f'  n{idx} [label="{name}"];')
    for i, j in sorted(g.edges):
        score = g.score(i, j)
        attr = f' [label="{score:.3f}"]' if score is not None else ""
        lines.append(f"  n{i} -> n{j}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- datasets ---------------------------------------------------------------

def dataset_to_dict(ds: SequenceDataset, config: dict | None = None) -> dict:
    doc: dict[str, Any] = {
        "taxonomy": list(ds.taxonomy.names),
        "sequences": [[ds.taxonomy.name(s) for s in seq.steps] for seq in ds.sequences],
    }
    if any(seq.labels is not None for seq in ds.sequences):
        doc["labels"] = [list(seq.labels) if seq.labels is not None else None for seq in ds.sequences]
    if config is not None:
        doc["config"] = config
    return doc


def dataset_from_dict(obj: dict) -> SequenceDataset:
    taxonomy = _taxonomy_from(obj)
    raw_sequences = obj.get("sequences")
    if not isinstance(raw_sequences, list) or not raw_sequences:
        raise ValueError("'sequences' must be a non-empty list")
    raw_labels = obj.get("labels")
    if raw_labels is not None and len(raw_labels) != len(raw_sequences):
        raise ValueError("'labels' must align one-to-one with 'sequences'")

    sequences = []
    for k, raw in enumerate(raw_sequences):
        steps = [resolve_step(taxonomy, ref) for ref in raw]
        labels = raw_labels[k] if raw_labels is not None else None
        wrapped = steps and steps[0] == taxonomy.start and steps[-1] == taxonomy.end
        if wrapped:
            seq = KeySequence(tuple(steps), tuple(labels) if labels is not None else None)
        else:
            seq = wrap_terminals(steps, taxonomy, labels)
        sequences.append(seq)
    return SequenceDataset(taxonomy, tuple(sequences))


def save_dataset(ds: SequenceDataset, path: str | Path, config: dict | None = None) -> None:
    Path(path).write_text(json.dumps(dataset_to_dict(ds, config), indent=2, sort_keys=True) + "\n")


def load_dataset(path: str | Path) -> SequenceDataset:
    return dataset_from_dict(json.loads(Path(path).read_text()))
