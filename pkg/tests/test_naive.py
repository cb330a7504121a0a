import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catlinks.graph import CategoryAssignment, DocumentGraph
from catlinks.naive import CategoryPairCounts, count_pairs, naive_matrix

from conftest import random_cats, random_graph


def brute_counts(g, cats):
    C = cats.num_categories
    counts = np.zeros((C, C), dtype=np.int64)
    members = [[d for d in range(g.num_nodes) if c in set(cats.of(d).tolist())] for c in range(C)]
    for c in range(C):
        for c2 in range(C):
            for d in members[c]:
                for d2 in members[c2]:
                    counts[c, c2] += g.has_arc(d, d2)
    return counts, np.array([len(m) for m in members])


def test_one_arc_one_cell():
    g = DocumentGraph.from_arcs([0], [1])
    cats = CategoryAssignment.from_sets([[0], [1]], 2)
    assert count_pairs(g, cats).link_counts.toarray().tolist() == [[0, 1], [0, 0]]


def test_outer_product_of_sets():
    g = DocumentGraph.from_arcs([0], [1])
    cats = CategoryAssignment.from_sets([[0, 1], [2, 3, 4]], 5)
    c = count_pairs(g, cats).link_counts
    assert c.nnz == 6 and c.sum() == 6


def test_naive_formula_values():
    g = DocumentGraph.from_arcs([0], [1])
    cats = CategoryAssignment.from_sets([[0], [1]], 2)
    w = naive_matrix(count_pairs(g, cats)).weights
    assert w[0, 1] == pytest.approx(math.log(0.5), abs=1e-15)
    assert w[1, 0] == pytest.approx(math.log(0.25), abs=1e-15)


def test_against_brute_force():
    rng = np.random.default_rng(21)
    for _ in range(5):
        n = int(rng.integers(5, 80))
        g = random_graph(rng, n, int(rng.integers(0, 4 * n)), self_loops=True)
        cats = random_cats(rng, n, int(rng.integers(1, 9)))
        counts, sizes = brute_counts(g, cats)
        got = count_pairs(g, cats)
        assert np.array_equal(got.link_counts.toarray(), counts)
        assert np.array_equal(got.category_sizes, sizes)
        ref = np.log((counts + 1) / np.outer(sizes + 1, sizes + 1))
        np.testing.assert_allclose(naive_matrix(got).weights, ref, rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=4, max_size=4), st.integers(0, 3))
def test_adding_a_link_raises_weight(cells, which):
    sizes = np.array([7, 9])
    base = np.array(cells).reshape(2, 2)
    import scipy.sparse as sp

    a = naive_matrix(CategoryPairCounts(sp.csr_matrix(base), sizes)).weights
    bumped = base.copy()
    bumped.flat[which] += 1
    b = naive_matrix(CategoryPairCounts(sp.csr_matrix(bumped), sizes)).weights
    assert b.flat[which] > a.flat[which]
    mask = np.ones(4, bool)
    mask[which] = False
    assert np.array_equal(a.flat[mask], b.flat[mask])


def test_weights_finite_and_negative_when_expected(rng):
    g = random_graph(rng, 100, 700)
    cats = random_cats(rng, 100, 12)
    counts = count_pairs(g, cats)
    w = naive_matrix(counts).weights
    assert np.all(np.isfinite(w))
    dense = counts.link_counts.toarray()
    s = counts.category_sizes
    strict = dense + 1 < np.outer(s + 1, s + 1)
    assert np.all(w[strict] < 0)


def test_rank_equivalent_to_probability_product(rng):
    # ordering pairs by the summed log weights equals ordering by the product of smoothed probabilities
    g = random_graph(rng, 12, 40)
    cats = random_cats(rng, 12, 3, allow_empty=False)
    counts = count_pairs(g, cats)
    w = naive_matrix(counts).weights
    dense, s = counts.link_counts.toarray(), counts.category_sizes
    p = (dense + 1) / np.outer(s + 1, s + 1)
    pairs = [(a, b) for a in range(12) for b in range(12)]
    sums = [sum(w[c, c2] for c in cats.of(a) for c2 in cats.of(b)) for a, b in pairs]
    prods = [math.prod(p[c, c2] for c in cats.of(a) for c2 in cats.of(b)) for a, b in pairs]
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            if abs(sums[i] - sums[j]) > 1e-9:
                assert (sums[i] < sums[j]) == (prods[i] < prods[j])
