import numpy as np
import pytest

from catlinks.learner import TrainerConfig, holdout_split, train
from catlinks.matrix import CategoryMatrix
from catlinks.scoring import partition_links, score_pairs
from catlinks.synth import (PlantedModel, evaluate_recovery, generate, load_labels, random_planted_matrix,
                            save_labels, unexpected_bpref)


def test_all_negative_matrix_gives_empty_graph():
    model = PlantedModel(200, 10, CategoryMatrix(-np.ones((10, 10))), categories_per_node=3)
    assert generate(model, 0).graph.num_arcs == 0


def test_one_positive_cell_links_a_nodes_to_b_nodes():
    w = -np.ones((6, 6)) * 0.01
    w[1, 4] = 10.0
    inst = generate(PlantedModel(150, 6, CategoryMatrix(w), categories_per_node=2), 3)
    s, t = inst.graph.arcs()
    has_a = np.array([1 in set(inst.cats.of(d).tolist()) for d in range(150)])
    has_b = np.array([4 in set(inst.cats.of(d).tolist()) for d in range(150)])
    want = {(a, b) for a in np.flatnonzero(has_a).tolist() for b in np.flatnonzero(has_b).tolist() if a != b}
    assert set(zip(s.tolist(), t.tolist())) == want


def test_noise_accounting_against_recount():
    w = random_planted_matrix(40, seed=2)
    model = PlantedModel(2000, 40, w, noise_rate=0.01)
    inst = generate(model, seed=5)
    s, t = inst.graph.arcs()
    planted = score_pairs(w, inst.cats, s, t) > 0
    # added arcs are exactly the arcs the planted matrix rejects
    assert np.array_equal(~planted, inst.unexpected)
    assert int(inst.unexpected.sum()) == inst.added
    assert inst.graph.num_arcs == inst.model_arcs - inst.removed + inst.added
    # each side of the flip lands near 1% of the model arcs
    assert abs(inst.removed - 0.01 * inst.model_arcs) < 5 * np.sqrt(0.01 * inst.model_arcs)
    assert abs(inst.added - 0.01 * inst.model_arcs) < 5 * np.sqrt(0.01 * inst.model_arcs)


def test_generator_is_deterministic():
    model = PlantedModel(500, 20, random_planted_matrix(20, seed=1), noise_rate=0.02)
    a, b = generate(model, 9), generate(model, 9)
    assert a.graph == b.graph and a.cats == b.cats and np.array_equal(a.unexpected, b.unexpected)


def test_sampled_mode_keeps_sign_rule():
    w = random_planted_matrix(30, seed=4)
    model = PlantedModel(3000, 30, w, exact_limit=1000, candidates_per_node=60)
    inst = generate(model, 1)
    s, t = inst.graph.arcs()
    assert inst.info["exact"] is False
    assert np.all(score_pairs(w, inst.cats, s, t) > 0)


def test_planted_matrix_explains_noiseless_graph():
    w = random_planted_matrix(25, seed=0)
    inst = generate(PlantedModel(400, 25, w), 0)
    assert partition_links(inst.graph, w, inst.cats).ratio == 1.0


def test_planted_matrix_recovers_perfectly():
    w = random_planted_matrix(25, seed=0)
    inst = generate(PlantedModel(400, 25, w), 0)
    rep = evaluate_recovery(w, inst)
    assert rep.f_measure == 1.0 and rep.accuracy == 1.0


def test_pa_recovers_noiseless_instance():
    w = random_planted_matrix(30, seed=3)
    inst = generate(PlantedModel(1500, 30, w), 3)
    train_g, held = holdout_split(inst.graph, 0.1, seed=1)
    learned, _ = train(train_g, inst.cats, TrainerConfig(seed=2))
    assert evaluate_recovery(learned, inst, held).f_measure >= 0.95


def test_random_matrix_bpref_near_null():
    w = random_planted_matrix(30, seed=6)
    inst = generate(PlantedModel(1500, 30, w, noise_rate=0.05), 6)
    rng = np.random.default_rng(0)
    vals = []
    for _ in range(5):
        b, q = unexpected_bpref(inst.graph, rng.random(inst.graph.num_arcs), inst.unexpected)
        vals.append(b)
    assert q > 0 and 0.0 < np.mean(vals) < 0.2


def test_labels_round_trip(tmp_path):
    inst = generate(PlantedModel(300, 15, random_planted_matrix(15, seed=1), noise_rate=0.05), 2)
    save_labels(inst, tmp_path / "l.tsv")
    assert np.array_equal(load_labels(tmp_path / "l.tsv", inst.graph), inst.unexpected)


def test_model_validation():
    with pytest.raises(ValueError):
        PlantedModel(10, 3, CategoryMatrix.zeros(3), categories_per_node=4)
    with pytest.raises(ValueError):
        PlantedModel(10, 3, CategoryMatrix.zeros(3), categories_per_node=2, noise_rate=1.0)


def test_vectorised_bpref_matches_per_query_reference():
    from catlinks.synth import unexpected_bpref_reference

    inst = generate(PlantedModel(800, 20, random_planted_matrix(20, seed=8), noise_rate=0.05), 8)
    rng = np.random.default_rng(1)
    for scores in (rng.random(inst.graph.num_arcs), rng.integers(0, 3, inst.graph.num_arcs).astype(float)):
        a = unexpected_bpref(inst.graph, scores, inst.unexpected)
        b = unexpected_bpref_reference(inst.graph, scores, inst.unexpected)
        assert a[1] == b[1]
        assert a[0] == pytest.approx(b[0], rel=1e-12)
