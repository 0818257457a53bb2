"""Acceptance gate: one test per release criterion, each printing a
pass/fail line with its runtime (run with ``pytest -v -s`` to see them).

Every expected value is produced by an oracle local to this module,
independent of the library code paths it checks: plain-Python likelihood
re-derivation, central finite differences, Floyd-Warshall closures,
exhaustive occurrence enumeration, and explicit predicate re-checks.
"""

import itertools
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from taskgraph import (
    CORRECT,
    MISTAKE,
    KeySequence,
    ScoreMatrix,
    SequenceDataset,
    TaskGraph,
    TrainConfig,
    Taxonomy,
    build_mask,
    contrastive_nll,
    contrastive_nll_grad,
    detect_stream,
    edge_prf,
    expand_repetitions,
    is_dag,
    perturbation_study,
    postprocess,
    postprocess_graph,
    sample_topological_sorts,
    softmax_rows,
    step_probability,
    train_graph,
)
from taskgraph.cli import main as cli_main
from taskgraph.sequences import ObservationSplit


@contextmanager
def criterion(name: str, budget_seconds: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[acceptance] FAIL {name}")
        raise
    elapsed = time.perf_counter() - start
    assert elapsed < budget_seconds, f"{name}: {elapsed:.2f}s over budget {budget_seconds}s"
    print(f"[acceptance] PASS {name} ({elapsed:.2f}s)")


def taxonomy_of(n_steps):
    return Taxonomy.from_steps([f"K{i}" for i in range(1, n_steps + 1)])


def random_scores(taxonomy, rng, scale=1.0):
    mask = build_mask(taxonomy)
    return ScoreMatrix(np.where(mask, 0.0, rng.normal(scale=scale, size=mask.shape)), mask)


def random_sequences(taxonomy, rng, count):
    """Repetition-free wrapped sequences: full or partial step permutations."""
    steps = list(taxonomy.step_indices())
    out = []
    for k in range(count):
        perm = [int(s) for s in rng.permutation(steps)]
        if k % 3 == 2 and len(perm) > 2:
            perm = perm[: len(perm) - 1]
        out.append(KeySequence((taxonomy.start, *perm, taxonomy.end)))
    return SequenceDataset(taxonomy, tuple(out))


def random_truth_graph(n_steps, density, rng):
    tax = taxonomy_of(n_steps)
    order = list(rng.permutation(list(tax.step_indices())))
    edges = set()
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if rng.random() < density:
                edges.add((order[b], order[a]))
    return postprocess_graph(TaskGraph(tax, frozenset(edges)))


def nll_oracle(weights, sequences, size):
    total = 0.0
    for steps in sequences:
        for t in range(1, len(steps)):
            observed = set(steps[:t])
            unobserved = [h for h in range(size) if h not in observed]
            num = sum(weights[steps[t]][j] for j in observed)
            den = sum(weights[h][j] for h in unobserved for j in observed)
            total += math.log(num / den)
    return -total


def floyd_warshall(edges, size):
    reach = [[False] * size for _ in range(size)]
    for i, j in edges:
        reach[i][j] = True
    for k in range(size):
        for i in range(size):
            for j in range(size):
                reach[i][j] = reach[i][j] or (reach[i][k] and reach[k][j])
    return reach


def test_gradient_correctness():
    # 20 random 5-8-node instances; central differences at h=1e-5 agree
    # with the analytic gradient to 1e-4 per-entry relative error
    with criterion("gradient correctness vs finite differences", 5.0):
        rng = np.random.default_rng(101)
        h = 1e-5
        for k in range(20):
            tax = taxonomy_of(int(rng.integers(3, 7)))  # 5..8 nodes total
            scores = random_scores(tax, rng)
            ds = random_sequences(tax, rng, count=4)
            beta = 1.0 if k % 2 == 0 else 0.005
            _, grad = contrastive_nll_grad(scores, ds, beta)

            size = tax.size
            for i in range(size):
                for j in range(size):
                    if scores.mask[i, j]:
                        assert grad[i, j] == 0.0
                        continue
                    plus = scores.values.copy()
                    plus[i, j] += h
                    minus = scores.values.copy()
                    minus[i, j] -= h
                    up = contrastive_nll(softmax_rows(scores.with_values(plus)), ds, beta)
                    down = contrastive_nll(softmax_rows(scores.with_values(minus)), ds, beta)
                    fd = (up - down) / (2 * h)
                    rel = abs(fd - grad[i, j]) / max(abs(fd), abs(grad[i, j]), 1e-4)
                    assert rel <= 1e-4, f"instance {k} entry ({i},{j}): rel err {rel:.2e}"


def test_likelihood_identity_at_beta_one():
    # the loss at beta=1 is exactly the brute-forced dataset negative
    # log-likelihood, to 1e-9 absolute, on instances up to 8 nodes
    with criterion("beta=1 loss equals brute-forced likelihood", 1.0):
        rng = np.random.default_rng(202)
        for _ in range(30):
            tax = taxonomy_of(int(rng.integers(2, 7)))
            z = softmax_rows(random_scores(tax, rng))
            ds = random_sequences(tax, rng, count=5)
            loss = contrastive_nll(z, ds, beta=1.0)
            oracle = nll_oracle(z.weights.tolist(), [s.steps for s in ds.sequences], tax.size)
            assert abs(loss - oracle) <= 1e-9


def test_step_probability_normalization():
    # candidate probabilities over the unobserved set sum to 1 +- 1e-9
    with criterion("step probabilities normalize over candidates", 1.0):
        rng = np.random.default_rng(303)
        for _ in range(1000):
            tax = taxonomy_of(int(rng.integers(2, 7)))
            z = softmax_rows(random_scores(tax, rng))
            observed = {tax.start} | {
                int(s) for s in tax.step_indices() if rng.random() < 0.4
            }
            unobserved = frozenset(range(tax.size)) - observed
            total = sum(
                step_probability(
                    z, ObservationSplit(frozenset(observed), unobserved, h)
                ).probability
                for h in unobserved
            )
            assert abs(total - 1.0) <= 1e-9


def test_graph_recovery():
    # 10 random truth DAGs, 50 sampled sorts each, reference hyperparameters;
    # mean edge F1 of the post-processed learned graphs must reach 0.90
    with criterion("graph recovery mean F1 >= 0.90", 120.0):
        rng = np.random.default_rng(404)
        f1s = []
        for k in range(10):
            n_steps = int(rng.integers(5, 11))
            density = float(rng.uniform(0.2, 0.4))
            truth = random_truth_graph(n_steps, density, rng)
            ds = sample_topological_sorts(truth, 50, seed=9000 + k)
            report = train_graph(ds, TrainConfig())
            learned = postprocess(report.adjacency, ds.taxonomy)
            f1s.append(edge_prf(learned, truth).f1)
        mean_f1 = float(np.mean(f1s))
        assert mean_f1 >= 0.90, f"mean F1 {mean_f1:.3f}, runs: {[round(f, 3) for f in f1s]}"


def test_postprocessing_soundness():
    # 500 random weighted digraphs: pipeline output is acyclic, transitively
    # reduced per a Floyd-Warshall oracle, and fully terminal-wired
    with criterion("post-processing soundness on random digraphs", 10.0):
        rng = np.random.default_rng(505)
        for _ in range(500):
            tax = taxonomy_of(int(rng.integers(2, 11)))
            size = tax.size
            density = float(rng.uniform(0.15, 0.6))
            edges = set()
            scores = {}
            for i in range(1, size):
                for j in range(size - 1):
                    if i != j and rng.random() < density:
                        edges.add((i, j))
                        scores[(i, j)] = float(rng.random())
            g = postprocess_graph(TaskGraph(tax, frozenset(edges), scores))

            assert is_dag(g)
            reach = floyd_warshall(g.edges, size)
            assert not any(reach[i][i] for i in range(size))
            for i, j in g.edges:
                shadowed = any(
                    (i, w) in g.edges and w != j and reach[w][j] for w in range(size)
                )
                assert not shadowed, f"edge ({i},{j}) shadowed by a longer path"
            preconditions_of = {i for i, _ in g.edges}
            dependents_of = {j for _, j in g.edges}
            for node in tax.step_indices():
                assert node in preconditions_of, f"node {node} has no precondition"
                assert node in dependents_of, f"node {node} has no dependent"


def test_mistake_detection_soundness():
    # the truth graph accepts 1000 clean sorts and flags every adjacent swap
    # that breaks a direct precondition; an explicit predicate re-check is
    # the oracle for both sides
    with criterion("detector sound on clean sorts, complete on swaps", 5.0):
        rng = np.random.default_rng(606)
        g = random_truth_graph(8, 0.3, rng)
        tax = g.taxonomy
        ds = sample_topological_sorts(g, 1000, seed=707)

        flagged_total = 0
        for seq in ds.sequences:
            verdicts = detect_stream(g, seq)
            assert all(v.label == CORRECT for v in verdicts)

            steps = list(seq.steps)
            for t in range(1, len(steps) - 2):
                a, b = steps[t], steps[t + 1]
                if (b, a) not in g.edges:
                    continue  # swap breaks no direct precondition
                swapped = steps[:t] + [b, a] + steps[t + 2:]
                # oracle re-check: b now misses its non-START precondition a
                missing = {
                    p
                    for p in g.preconditions(b)
                    if p != tax.start and p not in set(swapped[:t])
                }
                assert a in missing
                verdict = detect_stream(g, KeySequence(tuple(swapped)))[t]
                assert verdict.label == MISTAKE
                assert verdict.missing_preconditions == missing
                flagged_total += 1
        assert flagged_total > 100  # the check exercised plenty of injections


def test_perturbation_trend():
    # a labeled synthetic benchmark scores strictly worse at rate 0.2 than
    # at rate 0; only the direction is asserted
    with criterion("noise at rate 0.2 strictly degrades average F1", 30.0):
        rng = np.random.default_rng(808)
        g = random_truth_graph(6, 0.35, rng)
        ds = sample_topological_sorts(g, 60, seed=909)
        sequences = []
        for k, seq in enumerate(ds.sequences):
            steps = list(seq.steps)
            labels = [CORRECT] * len(steps)
            if k % 2 == 1:
                swappable = [
                    t for t in range(1, len(steps) - 2)
                    if (steps[t + 1], steps[t]) in g.edges
                ]
                if swappable:
                    t = swappable[int(rng.integers(len(swappable)))]
                    steps[t], steps[t + 1] = steps[t + 1], steps[t]
                    labels[t] = MISTAKE
            sequences.append(KeySequence(tuple(steps), tuple(labels)))
        benchmark = SequenceDataset(ds.taxonomy, tuple(sequences))

        rows = perturbation_study(g, benchmark, rates=[0.0, 0.2], seed=111)
        clean = rows[0][1].average_f1
        noisy = rows[1][1].average_f1
        assert clean == pytest.approx(1.0)
        assert noisy < clean


def exhaustive_expansion_oracle(steps):
    n = len(steps)
    results = set()
    for keep in itertools.product([False, True], repeat=n):
        kept = [steps[i] for i in range(n) if keep[i]]
        if set(kept) == set(steps) and len(kept) == len(set(kept)):
            results.add(tuple(kept))
    return results


def test_repetition_expansion_exactness():
    # expansion equals exhaustive occurrence-choice enumeration for every
    # sequence with up to 3 repeated symbols, including A B C A D
    with criterion("repetition expansion matches exhaustive oracle", 1.0):
        a, b, c, d = 1, 2, 3, 4
        flagship = (0, a, b, c, a, d, 5)
        got = {s.steps for s in expand_repetitions(KeySequence(flagship), cap=4096)}
        assert got == {(0, a, b, c, d, 5), (0, b, c, a, d, 5)}
        assert got == exhaustive_expansion_oracle(flagship)

        rng = np.random.default_rng(121)
        checked = 0
        while checked < 200:
            inner = [int(s) for s in rng.integers(1, 5, size=int(rng.integers(0, 9)))]
            repeated = [s for s in set(inner) if inner.count(s) > 1]
            if len(repeated) > 3:
                continue
            steps = (0, *inner, 5)
            got = {s.steps for s in expand_repetitions(KeySequence(steps), cap=4096)}
            assert got == exhaustive_expansion_oracle(steps)
            checked += 1


def test_training_determinism(tmp_path):
    # identical seeded train commands produce byte-identical graph files
    with criterion("seeded training runs are byte-identical", 60.0):
        rng = np.random.default_rng(131)
        truth = random_truth_graph(6, 0.3, rng)
        from taskgraph import save_graph

        truth_path = tmp_path / "truth.json"
        save_graph(truth, truth_path)
        data_path = tmp_path / "data.json"
        assert cli_main([
            "generate", str(truth_path), "--count", "30", "--seed", "17",
            "--out", str(data_path),
        ]) == 0

        out_a = tmp_path / "a.graph.json"
        out_b = tmp_path / "b.graph.json"
        for out in (out_a, out_b):
            code = cli_main([
                "train", str(data_path), "--seed", "17", "--out", str(out),
            ])
            assert code == 0
        assert out_a.read_bytes() == out_b.read_bytes()
