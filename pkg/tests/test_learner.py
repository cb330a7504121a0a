import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catlinks import _kernels as K_
from catlinks.graph import CategoryAssignment, DocumentGraph, PairExample
from catlinks.learner import (TrainerConfig, classification_measures, cross_validate, example_sequence,
                              holdout_split, pa_update, sequence_arrays, summarize_folds, train)
from catlinks.matrix import CategoryMatrix

from alg_oracle import alg1_step
from conftest import random_cats, random_graph


def one_cat(n):
    return CategoryAssignment.from_sets([[0]] * n, 1)


# ---------------------------------------------------------------- sequence


def test_two_node_graph_records_shortfall():
    g = DocumentGraph.from_arcs([0], [1])
    src, tgt, lab, short = sequence_arrays(g, seed=0)
    assert list(zip(src.tolist(), tgt.tolist(), lab.tolist())) == [(0, 1, 1)]
    assert short == 1


def test_three_node_graph_forces_negative():
    g = DocumentGraph.from_arcs([0], [1], 3)
    for seed in range(20):
        seq = list(example_sequence(g, TrainerConfig(seed=seed)))
        assert seq == [PairExample(0, 1, 1), PairExample(0, 2, -1)]


def test_sequence_is_balanced_and_legal(rng):
    g = random_graph(rng, 300, 1000)
    seq = list(example_sequence(g, TrainerConfig(seed=9)))
    labels = np.array([e.label for e in seq])
    assert labels.size == 2 * g.num_arcs
    assert np.sum(labels > 0) == np.sum(labels < 0) == g.num_arcs
    for e in seq:
        assert e.source != e.target
        assert g.has_arc(e.source, e.target) == (e.label > 0)


def test_sequence_node_order_and_grouping(rng):
    g = random_graph(rng, 50, 200)
    seq = list(example_sequence(g))
    sources = [e.source for e in seq]
    assert sources == sorted(sources)
    for d in range(g.num_nodes):
        labs = [e.label for e in seq if e.source == d]
        k = len(labs) // 2
        assert labs == [1] * k + [-1] * k


def test_self_loops_never_emitted():
    g = DocumentGraph.from_arcs([0, 0, 1], [0, 1, 2], 4)
    seq = list(example_sequence(g))
    assert all(e.source != e.target for e in seq)
    assert sum(e.label > 0 for e in seq) == 2


def test_sequence_depends_on_seed_only(rng):
    g = random_graph(rng, 100, 400)
    a = sequence_arrays(g, 3)
    b = sequence_arrays(g, 3)
    c = sequence_arrays(g, 4)
    assert all(np.array_equal(x, y) for x, y in zip(a[:3], b[:3]))
    assert not np.array_equal(a[1], c[1])


def test_negatives_rejected_against_supplied_graph():
    g = DocumentGraph.from_arcs([0], [1], 4)
    full = DocumentGraph.from_arcs([0, 0], [1, 2], 4)
    for seed in range(10):
        _, tgt, lab, _ = sequence_arrays(g, seed, reject=full)
        assert tgt[lab < 0].tolist() == [3]


def test_negative_targets_roughly_uniform():
    # node 0 links to 1; candidates 2..9 should be hit about equally
    g = DocumentGraph.from_arcs([0], [1], 10)
    hits = np.zeros(10)
    for seed in range(4000):
        _, tgt, lab, _ = sequence_arrays(g, seed)
        hits[tgt[lab < 0]] += 1
    assert hits[0] == hits[1] == 0
    assert np.all(np.abs(hits[2:] - 500) < 5 * math.sqrt(500))


# ---------------------------------------------------------------- pa_update


def test_single_cell_positive():
    w = CategoryMatrix.zeros(1)
    d = pa_update(w, PairExample(0, 1, 1), one_cat(2), K=1.0)
    assert d == 1.0 and w.weights[0, 0] == 1.0


def test_hand_trace_restores_zero():
    cats = CategoryAssignment.from_sets([[0, 1], [2]], 3)
    w = CategoryMatrix.zeros(3)
    assert pa_update(w, PairExample(0, 1, 1), cats, K=1.0) == 0.5
    assert w.weights[0, 2] == w.weights[1, 2] == 0.5
    assert pa_update(w, PairExample(0, 1, -1), cats, K=1.0) == -0.5
    assert np.all(w.weights == 0.0)


def test_aggressiveness_clips():
    w = CategoryMatrix.zeros(1)
    assert pa_update(w, PairExample(0, 1, 1), one_cat(2), K=0.1) == pytest.approx(0.1, abs=0)


def test_empty_category_skips():
    cats = CategoryAssignment.from_sets([[0], []], 1)
    w = CategoryMatrix.zeros(1)
    assert pa_update(w, PairExample(0, 1, 1), cats) == 0.0
    assert w.weights[0, 0] == 0.0


def test_confident_example_is_passive():
    w = CategoryMatrix(np.full((1, 1), 3.0))
    assert pa_update(w, PairExample(0, 1, 1), one_cat(2)) == 0.0
    assert w.weights[0, 0] == 3.0
    # without the clamp the alg1 rule pulls the weight back to the margin
    assert pa_update(w, PairExample(0, 1, 1), one_cat(2), clamp=False) == -2.0


def _random_case(rng, C=12):
    W = rng.normal(0, 0.7, size=(C, C))
    a = sorted(rng.choice(C, size=rng.integers(1, 5), replace=False).tolist())
    b = sorted(rng.choice(C, size=rng.integers(1, 5), replace=False).tolist())
    y = int(rng.choice([-1, 1]))
    K = float(rng.choice([0.05, 0.3, 1.0, 5.0]))
    return W, a, b, y, K


@pytest.mark.parametrize("clamp", [False, True])
def test_matches_plain_evaluator(clamp):
    rng = np.random.default_rng(7)
    for _ in range(200):
        W, a, b, y, K = _random_case(rng)
        cats = CategoryAssignment.from_sets([a, b], W.shape[0])
        w = CategoryMatrix(W.copy())
        got = pa_update(w, PairExample(0, 1, y), cats, K=K, clamp=clamp)
        ref = W.tolist()
        want = alg1_step(ref, a, b, y, K, clamp=clamp)
        assert got == pytest.approx(want, rel=1e-12, abs=1e-300)
        np.testing.assert_allclose(w.weights, np.array(ref), rtol=1e-12, atol=1e-15)


def test_kernel_step_matches_reference():
    rng = np.random.default_rng(8)
    for _ in range(100):
        W, a, b, y, K = _random_case(rng)
        cats = CategoryAssignment.from_sets([a, b], W.shape[0])
        w1, w2 = CategoryMatrix(W.copy()), W.copy()
        d1 = pa_update(w1, PairExample(0, 1, y), cats, K=K)
        d2 = K_.pa_step(w2, cats.offsets, cats.ids, 0, 1, float(y), K, K_.RULE_ALG1, True, True,
                        np.zeros(K_.NUM_STATS, np.int64))
        # the two paths sum mu in different orders, so allow last-ulp differences
        assert d2 == pytest.approx(d1, rel=1e-12, abs=1e-15)
        np.testing.assert_allclose(w2, w1.weights, rtol=1e-12, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_update_touches_only_product_cells(seed):
    rng = np.random.default_rng(seed)
    W, a, b, y, K = _random_case(rng, C=8)
    cats = CategoryAssignment.from_sets([a, b], 8)
    w = CategoryMatrix(W.copy())
    pa_update(w, PairExample(0, 1, y), cats, K=K)
    mask = np.zeros((8, 8), bool)
    mask[np.ix_(a, b)] = True
    assert np.array_equal(w.weights[~mask], W[~mask])
    moved = w.weights[mask] - W[mask]
    np.testing.assert_allclose(moved, moved[0], rtol=0, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unit_margin_after_unclipped_pa1_step(seed):
    rng = np.random.default_rng(seed)
    W, a, b, y, _ = _random_case(rng, C=8)
    cats = CategoryAssignment.from_sets([a, b], 8)
    w = CategoryMatrix(W.copy())
    rho = 1.0 / (len(a) * len(b))
    loss = 1 - y * W[np.ix_(a, b)].sum() * rho
    d = pa_update(w, PairExample(0, 1, y), cats, K=1e9, rule="pa1")
    if loss > 0:
        assert d == pytest.approx(y * loss)
        assert y * w.weights[np.ix_(a, b)].sum() * rho == pytest.approx(1.0, abs=1e-9)
    else:
        assert d == 0.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_alg1_unclipped_margin_identity(seed):
    # alg1 moves the normalised margin from m to m + rho * (1 - m); it reaches 1 only when rho = 1
    rng = np.random.default_rng(seed)
    W, a, b, y, _ = _random_case(rng, C=8)
    cats = CategoryAssignment.from_sets([a, b], 8)
    w = CategoryMatrix(W.copy())
    rho = 1.0 / (len(a) * len(b))
    m = y * W[np.ix_(a, b)].sum() * rho
    pa_update(w, PairExample(0, 1, y), cats, K=1e9)
    m2 = y * w.weights[np.ix_(a, b)].sum() * rho
    want = m + rho * (1 - m) if m < 1 else m
    assert m2 == pytest.approx(want, abs=1e-9)


def test_weights_stay_finite(rng):
    g = random_graph(rng, 200, 3000)
    cats = random_cats(rng, 200, 15)
    w, _ = train(g, cats, TrainerConfig(aggressiveness=50.0, passes=3, clamp=False))
    assert w.is_finite()


# ---------------------------------------------------------------- train


def test_empty_graph():
    w, rep = train(DocumentGraph.empty(5), one_cat(5))
    assert np.all(w.weights == 0) and rep.examples_seen == 0


def test_train_equals_replayed_updates(rng):
    g = random_graph(rng, 80, 600)
    cats = random_cats(rng, 80, 10)
    cfg = TrainerConfig(seed=4, passes=2, aggressiveness=0.7)
    w, rep = train(g, cats, cfg)
    ref = CategoryMatrix.zeros(10)
    skipped = 0
    for ex in example_sequence(g, cfg):
        if cats.of(ex.source).size == 0 or cats.of(ex.target).size == 0:
            skipped += 1
        pa_update(ref, ex, cats, K=cfg.aggressiveness)
    np.testing.assert_allclose(w.weights, ref.weights, rtol=1e-12, atol=1e-12)
    assert rep.skipped == skipped
    assert rep.examples_seen == 2 * g.num_arcs * 2
    assert rep.positives == rep.negatives


def test_train_is_bit_identical(rng):
    g = random_graph(rng, 300, 3000)
    cats = random_cats(rng, 300, 20)
    a, _ = train(g, cats, TrainerConfig(seed=11))
    b, _ = train(g, cats, TrainerConfig(seed=11))
    assert a.weights.tobytes() == b.weights.tobytes()


def test_config_validation():
    with pytest.raises(ValueError):
        TrainerConfig(aggressiveness=0)
    with pytest.raises(ValueError):
        TrainerConfig(passes=0)
    with pytest.raises(ValueError):
        TrainerConfig(rule="pa2")


# ---------------------------------------------------------------- cross-validation


def test_classification_measures():
    m = classification_measures(np.array([1.0, -1.0, 2.0, 0.0]), np.array([1, 1, -1, -1]))
    assert m["accuracy"] == 0.5
    assert m["precision"] == 0.5 and m["recall"] == 0.5 and m["f_measure"] == 0.5
    m = classification_measures(np.array([-1.0]), np.array([-1]))
    assert m["precision"] is None and m["recall"] is None


def _block_instance(n=200, groups=4):
    # exactly the graph of a planted W with positive diagonal: group k carries
    # category k and links to every other member of its group
    grp = np.arange(n) % groups
    s, t = np.nonzero((grp[:, None] == grp[None, :]) & ~np.eye(n, dtype=bool))
    g = DocumentGraph.from_arcs(s, t, n)
    return g, CategoryAssignment.from_sets([[int(k)] for k in grp], groups)


def test_separable_instance_reaches_accuracy_one():
    g, cats = _block_instance()
    results = cross_validate(g, cats, TrainerConfig(seed=1), folds=5)
    assert [r.accuracy for r in results] == [1.0] * 5
    mean, sd = summarize_folds(results)["f_measure"]
    assert mean == 1.0 and sd == 0.0


def test_random_labels_are_near_chance():
    rng = np.random.default_rng(3)
    g = random_graph(rng, 500, 5000)
    cats = random_cats(rng, 500, 8, allow_empty=False)
    results = cross_validate(g, cats, TrainerConfig(seed=2), folds=4)
    acc = np.mean([r.accuracy for r in results])
    assert abs(acc - 0.5) < 0.05


def test_folds_partition_arcs(rng):
    from catlinks.learner import fold_assignment

    g = random_graph(rng, 100, 900)
    a = fold_assignment(g, 10, 0)
    counts = np.bincount(a[a >= 0], minlength=10)
    assert counts.sum() == g.num_arcs and counts.max() - counts.min() <= 1


def test_holdout_negatives_are_non_arcs(rng):
    g = random_graph(rng, 200, 2000)
    train_g, (hs, ht, hl) = holdout_split(g, 0.1, seed=3)
    assert train_g.num_arcs + int(np.sum(hl > 0)) == g.num_arcs
    for s, t, y in zip(hs.tolist(), ht.tolist(), hl.tolist()):
        assert g.has_arc(s, t) == (y > 0)
        if y > 0:
            assert not train_g.has_arc(s, t)
    assert np.sum(hl > 0) == np.sum(hl < 0)


def test_fold_without_positives_reports_absent():
    g = DocumentGraph.from_arcs([0, 1], [1, 2], 4)
    cats = one_cat(4)
    results = cross_validate(g, cats, TrainerConfig(), folds=3)
    empty = [r for r in results if r.positives == 0]
    assert empty and all(r.precision is None and r.recall is None for r in empty)
