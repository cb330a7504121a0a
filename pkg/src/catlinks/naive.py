"""Counting-based category matrix with add-one smoothing.

``w[c, c2] = log((links(c, c2) + 1) / ((|D_c| + 1) * (|D_c2| + 1)))`` where
``links(c, c2)`` counts arcs from a document of ``c`` to a document of ``c2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import CategoryAssignment, DocumentGraph
from .matrix import CategoryMatrix


@dataclass
class CategoryPairCounts:
    link_counts: sp.csr_matrix    # (|C|, |C|) integer counts, sparse
    category_sizes: np.ndarray    # |D_c| per category

    @property
    def dim(self) -> int:
        return self.category_sizes.size

    def probability(self) -> sp.csr_matrix:
        """Unsmoothed link probability per category pair (0 where undefined)."""
        sizes = self.category_sizes.astype(np.float64)
        coo = self.link_counts.tocoo()
        denom = sizes[coo.row] * sizes[coo.col]
        return sp.csr_matrix((coo.data / denom, (coo.row, coo.col)), shape=coo.shape)


def count_pairs(g: DocumentGraph, cats: CategoryAssignment) -> CategoryPairCounts:
    """Counts via ``A^T M A`` with A the node-category indicator and M the adjacency.

    Cost is linear in the sum over arcs of ``|C_d| * |C_d2|``.
    """
    if cats.num_nodes < g.num_nodes:
        cats = cats.resized(g.num_nodes)
    A = cats.indicator().astype(np.int64)
    if cats.num_nodes > g.num_nodes:
        A = A[: g.num_nodes]
    M = sp.csr_matrix((np.ones(g.num_arcs, dtype=np.int64), np.asarray(g.targets), np.asarray(g.offsets)),
                      shape=(g.num_nodes, g.num_nodes))
    counts = (A.T @ (M @ A)).tocsr()
    counts.sum_duplicates()
    counts.eliminate_zeros()
    sizes = np.bincount(np.asarray(cats.ids), minlength=cats.num_categories).astype(np.int64)
    return CategoryPairCounts(counts, sizes)


def naive_matrix(counts: CategoryPairCounts) -> CategoryMatrix:
    sizes = np.log(counts.category_sizes.astype(np.float64) + 1.0)
    # zero-link cells: log(1) - log(|D_c|+1) - log(|D_c2|+1)
    w = -(sizes[:, None] + sizes[None, :])
    coo = counts.link_counts.tocoo()
    w[coo.row, coo.col] += np.log1p(coo.data.astype(np.float64))
    return CategoryMatrix(w)
