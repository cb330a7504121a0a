"""Training throughput on a random graph (examples per second, one core)."""

import argparse

import numpy as np

from catlinks.graph import CategoryAssignment, DocumentGraph
from catlinks.learner import TrainerConfig, train


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=100_000)
    ap.add_argument("--arcs", type=int, default=1_000_000)
    ap.add_argument("--cats", type=int, default=1000)
    ap.add_argument("--cats-per-node", type=int, default=4)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.nodes
    g = DocumentGraph.from_arcs(rng.integers(0, n, args.arcs), rng.integers(0, n, args.arcs), n).without_self_loops()
    k = args.cats_per_node
    cats = CategoryAssignment.from_pairs(np.repeat(np.arange(n), k), rng.integers(0, args.cats, k * n), n, args.cats)
    train(DocumentGraph.from_arcs([0], [1], 3), CategoryAssignment.from_sets([[0]] * 3, 1))  # compile
    for r in range(args.repeats):
        _, rep = train(g, cats, TrainerConfig(seed=r), sequence_accuracy=False)
        print(f"run {r}: {rep.examples_seen} examples in {rep.wall_time:.3f}s = {rep.throughput:,.0f}/s")


if __name__ == "__main__":
    main()
