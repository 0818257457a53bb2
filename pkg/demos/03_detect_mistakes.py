"""
Online mistake detection with a learned graph
=============================================

A task graph doubles as an online mistake detector: while a procedure
streams in step by step, any step whose direct preconditions have not all
appeared yet is flagged, together with the preconditions it is missing.
"""

from taskgraph import (
    KeySequence,
    TaskGraph,
    Taxonomy,
    detect_stream,
    omd_metrics,
    postprocess_graph,
)

taxonomy = Taxonomy.from_steps(
    ["unpack tent", "spread tent", "insert poles", "place cover", "stake down"]
)
idx = taxonomy.index
edges = {
    (idx("unpack tent"), 0),
    (idx("spread tent"), idx("unpack tent")),
    (idx("insert poles"), idx("spread tent")),
    (idx("place cover"), idx("insert poles")),
    (idx("stake down"), idx("place cover")),
}
graph = postprocess_graph(TaskGraph(taxonomy, frozenset(edges)))

# A correct run sails through.
clean = KeySequence(tuple([0] + [idx(s) for s in (
    "unpack tent", "spread tent", "insert poles", "place cover", "stake down"
)] + [taxonomy.end]))
print("clean run:")
for step, verdict in zip(clean.steps, detect_stream(graph, clean)):
    print(f"  {taxonomy.name(step):12s} {verdict.label}")

# Now the camper stakes the tent down before the cover is on.  The verdict
# is online: it uses only the steps seen so far, and it names the missing
# precondition.
messy = KeySequence(tuple([0] + [idx(s) for s in (
    "unpack tent", "spread tent", "insert poles", "stake down", "place cover"
)] + [taxonomy.end]))
print("\nrun with a swapped step:")
for step, verdict in zip(messy.steps, detect_stream(graph, messy)):
    missing = ", ".join(taxonomy.name(p) for p in sorted(verdict.missing_preconditions))
    note = f"  (missing: {missing})" if missing else ""
    print(f"  {taxonomy.name(step):12s} {verdict.label}{note}")

# Scoring against ground-truth labels breaks performance down per class.
labels = ["correct"] * len(messy)
labels[4] = "mistake"  # the premature stake-down
report = omd_metrics(detect_stream(graph, messy), labels)
print(f"\nscores on the messy run: {report.summary()}")
