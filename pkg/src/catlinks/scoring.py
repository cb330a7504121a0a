"""Expectedness scores of links under a category matrix, and what to do with them.

Scores follow one convention throughout: higher means more expected. The
most unexpected links are therefore the ones with the *lowest* score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as K_
from .graph import CategoryAssignment, DocumentGraph
from .matrix import CategoryMatrix


class LinkScore(NamedTuple):
    source: int
    target: int
    score: float


def _arrays(cats: CategoryAssignment, w: CategoryMatrix):
    if cats.num_categories != w.dim:
        raise ValueError(f"matrix dim {w.dim} != category universe {cats.num_categories}")
    weights = w.weights if w.weights.dtype == np.float64 else w.weights.astype(np.float64)
    return weights, cats.offsets, cats.ids


def score_pair(w: CategoryMatrix, cats: CategoryAssignment, d: int, d2: int) -> float:
    """Sum of ``w[c, c2]`` over ``C_d x C_d2``; 0 when either set is empty."""
    ca, cb = cats.of(d), cats.of(d2)
    if ca.size == 0 or cb.size == 0:
        return 0.0
    weights, off, ids = _arrays(cats, w)
    return float(K_.pair_sum(weights, off, ids, d, d2))


def score_pairs(w: CategoryMatrix, cats: CategoryAssignment, sources, targets) -> np.ndarray:
    weights, off, ids = _arrays(cats, w)
    src = np.ascontiguousarray(sources, dtype=np.int64)
    tgt = np.ascontiguousarray(targets, dtype=np.int64)
    if src.size:
        hi = max(src.max(), tgt.max())
        if min(src.min(), tgt.min()) < 0 or hi >= cats.num_nodes:
            raise IndexError(f"node id out of range [0, {cats.num_nodes})")
    out = np.empty(src.size, dtype=np.float64)
    K_.score_pairs_kernel(weights, off, ids, src, tgt, out)
    return out


def score_arcs(g: DocumentGraph, w: CategoryMatrix, cats: CategoryAssignment) -> np.ndarray:
    """Score of every arc, in CSR order."""
    src, tgt = g.arcs()
    if cats.num_nodes < g.num_nodes:
        cats = cats.resized(g.num_nodes)
    return score_pairs(w, cats, src, tgt)


@dataclass
class ExplainabilityPartition:
    explainable: np.ndarray      # (k, 2) arcs with score > 0
    unexplainable: np.ndarray    # (m - k, 2) arcs with score <= 0
    scores: np.ndarray           # per arc, CSR order

    @property
    def ratio(self) -> float:
        total = len(self.explainable) + len(self.unexplainable)
        return len(self.explainable) / total if total else float("nan")


def partition_links(g: DocumentGraph, w: CategoryMatrix, cats: CategoryAssignment) -> ExplainabilityPartition:
    src, tgt = g.arcs()
    scores = score_arcs(g, w, cats)
    pos = scores > 0
    arcs = np.stack([src, tgt], axis=1)
    return ExplainabilityPartition(arcs[pos], arcs[~pos], scores)


def rank_order(targets: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Indices sorting ascending by score, ties by ascending target id."""
    return np.lexsort((targets, scores))


def rank_links(g: DocumentGraph, w: CategoryMatrix, cats: CategoryAssignment, query: int) -> list[LinkScore]:
    """Out-links of ``query``, most unexpected (lowest score) first."""
    tgt = np.asarray(g.successors(query))
    scores = score_pairs(w, cats, np.full(tgt.size, query, dtype=np.int64), tgt)
    order = rank_order(tgt, scores)
    return [LinkScore(query, int(tgt[i]), float(scores[i])) for i in order]


def top_pool(g: DocumentGraph, w: CategoryMatrix, cats: CategoryAssignment, query: int,
             alpha: float = 0.1) -> list[LinkScore]:
    """The ``floor(alpha * t)`` most unexpected out-links of ``query`` (t = out-degree)."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    ranked = rank_links(g, w, cats, query)
    # guard against 0.1 * 10 evaluating just below 1
    k = math.floor(alpha * len(ranked) + 1e-9)
    return ranked[:k]


def category_neighborhood(w: CategoryMatrix, c: int, k: int = 18, threshold: float = 1.0,
                          direction: str = "out") -> list[tuple[int, int, float]]:
    """Weighted arcs from ``c`` to its ``k`` heaviest neighbours that exceed ``threshold``.

    ``direction='out'`` reads row ``c``; ``'in'`` reads column ``c`` (arcs
    ``(c2, c, w)``); ``'both'`` ranks by the larger of the two directions and
    emits every qualifying arc in either direction.
    """
    if not 0 <= c < w.dim:
        raise IndexError(f"category {c} out of range [0, {w.dim})")
    row = np.asarray(w.weights[c], dtype=np.float64)
    col = np.asarray(w.weights[:, c], dtype=np.float64)
    if direction == "out":
        key = row
    elif direction == "in":
        key = col
    elif direction == "both":
        key = np.maximum(row, col)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    ids = np.arange(w.dim)
    order = np.lexsort((ids, -key))[:k]
    arcs = []
    for j in order.tolist():
        if direction in ("out", "both") and row[j] > threshold:
            arcs.append((c, j, float(row[j])))
        if direction in ("in", "both") and col[j] > threshold and not (direction == "both" and j == c):
            arcs.append((j, c, float(col[j])))
    return arcs
