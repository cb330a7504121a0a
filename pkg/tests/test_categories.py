import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catlinks.categories import (CategoryHierarchy, apply_remap, build_remap, cleanse, harmonic_centrality,
                                 load_hierarchy, load_remap, save_remap, select_milestones)
from catlinks.graph import CategoryAssignment

from alg_oracle import harmonic_all_pairs, nearest_milestone


def random_hierarchy(rng, n, m):
    c = rng.integers(0, n, size=m)
    p = rng.integers(0, n, size=m)
    keep = c != p
    return CategoryHierarchy.from_arcs(c[keep], p[keep], n)


def arcs_of(h):
    s, t = h.parent_arcs.arcs()
    return list(zip(s.tolist(), t.tolist()))


@pytest.mark.parametrize("undirected", [True, False])
def test_star_center(undirected):
    h = CategoryHierarchy.from_arcs([1, 2, 3, 4, 5], [0] * 5)
    assert harmonic_centrality(h, undirected=undirected)[0] == 5.0


def test_isolated_node_scores_zero():
    h = CategoryHierarchy.from_arcs([0], [1], 3)
    assert harmonic_centrality(h)[2] == 0.0


@pytest.mark.parametrize("undirected", [True, False])
def test_centrality_matches_bfs_oracle(rng, undirected):
    h = random_hierarchy(rng, 200, 260)
    ref = harmonic_all_pairs(200, arcs_of(h), undirected)
    np.testing.assert_allclose(harmonic_centrality(h, undirected), ref, rtol=1e-12, atol=1e-9)


def test_centrality_permutation_equivariant(rng):
    h = random_hierarchy(rng, 60, 90)
    perm = rng.permutation(60)
    c, p = h.parent_arcs.arcs()
    hp = CategoryHierarchy.from_arcs(perm[c], perm[p], 60)
    np.testing.assert_allclose(harmonic_centrality(hp)[perm], harmonic_centrality(h), rtol=1e-12)


def test_sampled_centrality_is_unbiased_on_average(rng):
    h = random_hierarchy(rng, 150, 300)
    exact = harmonic_centrality(h)
    est = np.mean([harmonic_centrality(h, samples=50, seed=s) for s in range(60)], axis=0)
    assert np.abs(est - exact).mean() < 0.1 * exact.mean()


def test_select_milestones_examples():
    assert select_milestones([3, 1, 2], 2).tolist() == [0, 2]
    assert select_milestones([1, 1, 1, 1], 2).tolist() == [0, 1]
    assert select_milestones([0.5, 2, 1], 3).tolist() == [0, 1, 2]
    with pytest.raises(ValueError):
        select_milestones([1, 2], 3)


def test_chain_maps_to_only_milestone():
    h = CategoryHierarchy.from_arcs([0], [1])
    m = build_remap(h, [1])
    assert m[0] == 0 and m[1] == 0


def test_unreachable_is_discarded():
    h = CategoryHierarchy.from_arcs([0], [1], 3)
    m = build_remap(h, [1])
    assert m[2] is None


def test_distance_tie_goes_to_smaller_milestone():
    # 1 sits between 0 and 2
    h = CategoryHierarchy.from_arcs([1, 1], [0, 2])
    assert build_remap(h, [2, 0])[1] == 0


@pytest.mark.parametrize("undirected", [True, False])
def test_remap_matches_bfs_oracle(undirected):
    rng = np.random.default_rng(5)
    for _ in range(5):
        n = int(rng.integers(10, 300))
        h = random_hierarchy(rng, n, int(rng.integers(n // 2, 2 * n)))
        ms = np.sort(rng.choice(n, size=int(rng.integers(1, 12)), replace=False))
        m = build_remap(h, ms, undirected)
        # the directed remap walks child -> parent, i.e. from c towards ancestors
        ref = nearest_milestone(n, arcs_of(h), ms.tolist(), undirected)
        for c in range(n):
            if ref[c] is None:
                assert m[c] is None
            else:
                assert ms[m[c]] == ref[c][0]
                assert m.distance[c] == ref[c][1]


def test_milestones_map_to_themselves(rng):
    h = random_hierarchy(rng, 80, 120)
    ms = [3, 17, 40]
    m = build_remap(h, ms)
    assert [m[c] for c in ms] == [0, 1, 2]


def test_apply_remap_dedups_and_drops():
    h = CategoryHierarchy.from_arcs([0, 1], [2, 2], 4)
    m = build_remap(h, [2])
    cats = CategoryAssignment.from_sets([[0, 1], [3]], 4)
    out = apply_remap(cats, m)
    assert out.num_categories == 1
    assert out.of(0).tolist() == [0] and out.of(1).tolist() == []


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_apply_remap_ids_in_range(seed):
    rng = np.random.default_rng(seed)
    h = random_hierarchy(rng, 40, 50)
    m = build_remap(h, np.sort(rng.choice(40, size=5, replace=False)))
    cats = CategoryAssignment.from_sets([rng.choice(40, size=3, replace=False).tolist() for _ in range(20)], 40)
    out = apply_remap(cats, m)
    assert out.ids.size == 0 or (out.ids.min() >= 0 and out.ids.max() < 5)


def test_remap_file_round_trip(tmp_path, rng):
    h = random_hierarchy(rng, 100, 140)
    m = cleanse(h, k=10)
    save_remap(m, tmp_path / "m.tsv")
    assert load_remap(tmp_path / "m.tsv") == m


def test_load_hierarchy(tmp_path):
    p = tmp_path / "h.txt"
    p.write_text("# nodes 5\n1 0\n2 0\n")
    h = load_hierarchy(p)
    assert h.num_raw_categories == 5 and h.parent_arcs.num_arcs == 2
