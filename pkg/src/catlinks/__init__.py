"""Latent category matrices for finding unexpected links in categorized graphs."""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    CategoryAssignment,
    DocumentGraph,
    GraphFormatError,
    PairExample,
    has_arc,
    load_categories,
    load_graph,
    save_categories,
    save_graph,
    symmetric_view,
)
from .matrix import CategoryMatrix, load_matrix, save_matrix  # noqa: E402
from .learner import TrainerConfig, TrainReport, cross_validate, example_sequence, pa_update, train  # noqa: E402
from .naive import count_pairs, naive_matrix  # noqa: E402
from .scoring import (  # noqa: E402
    category_neighborhood,
    partition_links,
    rank_links,
    score_pair,
    top_pool,
)

__all__ = [
    "CategoryAssignment", "CategoryMatrix", "DocumentGraph", "GraphFormatError", "PairExample",
    "TrainReport", "TrainerConfig", "category_neighborhood", "count_pairs", "cross_validate",
    "example_sequence", "has_arc", "load_categories", "load_graph", "load_matrix", "naive_matrix",
    "pa_update", "partition_links", "rank_links", "save_categories", "save_graph", "save_matrix",
    "score_pair", "symmetric_view", "top_pool", "train",
]
