"""Learn precondition DAGs from key-step sequences and put them to work.

The package covers the full pipeline: likelihood-based training of an edge
weight matrix from demonstration sequences, post-processing into a clean
task graph, edge-level evaluation, online mistake detection, a synthetic
sequence generator for verification, and a counting baseline.
"""

from .baselines import count_based_graph
from .detection import (
    ClassMetrics,
    DetectionVerdict,
    OmdReport,
    detect_dataset,
    detect_stream,
    omd_metrics,
    perturbation_study,
)
from .evaluation import EdgeEvalReport, edge_prf
from .graph import (
    AdjacencyMatrix,
    ScoreMatrix,
    TaskGraph,
    Taxonomy,
    binarize,
    break_cycles,
    build_mask,
    is_dag,
    omd_prune,
    postprocess,
    postprocess_graph,
    softmax_rows,
    transitive_reduction,
    wire_terminals,
)
from .io import (
    load_dataset,
    load_graph,
    save_dataset,
    save_graph,
    to_dot,
)
from .likelihood import (
    DegenerateGraphError,
    StepTrace,
    contrastive_nll,
    contrastive_nll_grad,
    sequence_log_likelihood,
    step_probability,
)
from .sequences import (
    CORRECT,
    MISTAKE,
    ExpansionLimitError,
    KeySequence,
    ObservationSplit,
    SequenceDataset,
    expand_dataset,
    expand_repetitions,
    merge_datasets,
    perturb,
    sample_topological_sorts,
    wrap_terminals,
)
from .training import (
    NonFiniteLossError,
    TrainConfig,
    TrainReport,
    sequence_accuracy,
    train_graph,
)

__version__ = "0.1.0"

__all__ = [
    "AdjacencyMatrix",
    "ClassMetrics",
    "CORRECT",
    "DegenerateGraphError",
    "DetectionVerdict",
    "EdgeEvalReport",
    "ExpansionLimitError",
    "KeySequence",
    "MISTAKE",
    "NonFiniteLossError",
    "ObservationSplit",
    "OmdReport",
    "ScoreMatrix",
    "SequenceDataset",
    "StepTrace",
    "TaskGraph",
    "Taxonomy",
    "TrainConfig",
    "TrainReport",
    "binarize",
    "break_cycles",
    "build_mask",
    "contrastive_nll",
    "contrastive_nll_grad",
    "count_based_graph",
    "detect_dataset",
    "detect_stream",
    "edge_prf",
    "expand_dataset",
    "expand_repetitions",
    "is_dag",
    "load_dataset",
    "load_graph",
    "merge_datasets",
    "omd_metrics",
    "omd_prune",
    "perturb",
    "perturbation_study",
    "postprocess",
    "postprocess_graph",
    "sample_topological_sorts",
    "save_dataset",
    "save_graph",
    "sequence_accuracy",
    "sequence_log_likelihood",
    "softmax_rows",
    "step_probability",
    "to_dot",
    "train_graph",
    "transitive_reduction",
    "wire_terminals",
    "wrap_terminals",
]
