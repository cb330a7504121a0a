"""Category cleansing: keep the most harmonic-central categories (milestones)
and remap every raw category to its nearest milestone.

Distances are taken on the hierarchy with arc direction ignored unless a
caller asks otherwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels as K_
from .graph import CategoryAssignment, DocumentGraph, GraphFormatError, read_edge_list

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CategoryHierarchy:
    """Child -> parent arcs over raw category ids; cycles and forests allowed."""

    parent_arcs: DocumentGraph

    @classmethod
    def from_arcs(cls, children, parents, num_raw_categories: int | None = None) -> "CategoryHierarchy":
        return cls(DocumentGraph.from_arcs(children, parents, num_raw_categories))

    @property
    def num_raw_categories(self) -> int:
        return self.parent_arcs.num_nodes

    def traversal_graph(self, undirected: bool = True) -> DocumentGraph:
        return self.parent_arcs.symmetric() if undirected else self.parent_arcs


def load_hierarchy(path, num_raw_categories: int | None = None) -> CategoryHierarchy:
    return CategoryHierarchy(read_edge_list(path, num_raw_categories))


def harmonic_centrality(h: CategoryHierarchy | DocumentGraph, undirected: bool = True,
                        samples: int | None = None, seed: int = 0) -> np.ndarray:
    """``H(x) = sum over y != x of 1 / dist(y, x)``, unreachable pairs contributing 0.

    Exact by default (one BFS per node). With ``samples`` set, BFS runs only
    from that many uniformly chosen sources and the sums are scaled by
    ``n / samples``, an unbiased estimate for graphs too large for the exact pass.
    """
    g = h.traversal_graph(undirected) if isinstance(h, CategoryHierarchy) else (h.symmetric() if undirected else h)
    n = g.num_nodes
    out = np.zeros(n, dtype=np.float64)
    if n == 0:
        return out
    if samples is None or samples >= n:
        sources = np.arange(n, dtype=np.int64)
        scale = 1.0
    else:
        rng = np.random.default_rng(seed)
        sources = np.sort(rng.choice(n, size=samples, replace=False)).astype(np.int64)
        scale = n / samples
    K_.harmonic_kernel(g.offsets, g.targets, sources, out)
    return out * scale


def select_milestones(scores, k: int) -> np.ndarray:
    """Ids of the ``k`` largest scores, ties to the smaller id, returned sorted."""
    scores = np.asarray(scores, dtype=np.float64)
    if k > scores.size:
        raise ValueError(f"k={k} exceeds the {scores.size} scored nodes")
    order = np.lexsort((np.arange(scores.size), -scores))
    return np.sort(order[:k])


@dataclass(frozen=True, eq=False)
class MilestoneMap:
    milestones: np.ndarray   # sorted raw ids
    remap: np.ndarray        # raw id -> milestone index, -1 where discarded
    distance: np.ndarray     # hops to the assigned milestone, -1 where discarded

    @property
    def num_milestones(self) -> int:
        return self.milestones.size

    def __getitem__(self, raw: int) -> int | None:
        j = int(self.remap[raw]) if 0 <= raw < self.remap.size else -1
        return None if j < 0 else j

    def __eq__(self, other):
        if not isinstance(other, MilestoneMap):
            return NotImplemented
        return np.array_equal(self.milestones, other.milestones) and np.array_equal(self.remap, other.remap)


def build_remap(h: CategoryHierarchy, milestones, undirected: bool = True) -> MilestoneMap:
    """Map each raw category to its closest milestone (ties: smaller milestone id)."""
    ms = np.unique(np.asarray(milestones, dtype=np.int64))
    n = h.num_raw_categories
    if ms.size and (ms[0] < 0 or ms[-1] >= n):
        raise IndexError("milestone id outside the hierarchy")
    g = h.traversal_graph(undirected)
    labels = np.full(n, -1, dtype=np.int64)
    dist = np.full(n, -1, dtype=np.int64)
    if undirected:
        K_.nearest_label_kernel(g.offsets, g.targets, ms, labels, dist)
    else:
        # distance from c to a milestone along child -> parent arcs
        rev = DocumentGraph.from_arcs(g.arcs()[1], g.arcs()[0], n)
        K_.nearest_label_kernel(rev.offsets, rev.targets, ms, labels, dist)
    return MilestoneMap(ms, labels, dist)


def apply_remap(assign: CategoryAssignment, m: MilestoneMap) -> CategoryAssignment:
    """Replace raw categories by milestone indices; discarded categories vanish."""
    nodes = np.repeat(np.arange(assign.num_nodes, dtype=np.int64), assign.sizes())
    raw = np.asarray(assign.ids)
    mapped = np.full(raw.size, -1, dtype=np.int64)
    inside = raw < m.remap.size
    mapped[inside] = m.remap[raw[inside]]
    keep = mapped >= 0
    return CategoryAssignment.from_pairs(nodes[keep], mapped[keep], assign.num_nodes, m.num_milestones)


def save_remap(m: MilestoneMap, path):
    """TSV ``raw TAB milestone-index``; header comments carry sizes and milestone ids."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# raw {m.remap.size} milestones {m.num_milestones}\n")
        f.write("# milestone-ids " + ",".join(map(str, m.milestones.tolist())) + "\n")
        for raw in np.flatnonzero(m.remap >= 0).tolist():
            f.write(f"{raw}\t{int(m.remap[raw])}\n")


def load_remap(path) -> MilestoneMap:
    """Inverse of :func:`save_remap` (hop distances are not stored and come back as 0)."""
    raw_n = None
    milestones = None
    pairs = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                words = line[1:].split(None, 1)
                if words and words[0] == "milestone-ids":
                    text = words[1] if len(words) > 1 else ""
                    milestones = np.array([int(x) for x in text.split(",") if x], dtype=np.int64)
                elif words and words[0] == "raw":
                    raw_n = int(line[1:].split()[1])
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise GraphFormatError(f"expected 'raw TAB milestone-index', got {line!r}", lineno, str(path))
            pairs.append((int(parts[0]), int(parts[1])))
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    n = raw_n if raw_n is not None else (int(arr[:, 0].max()) + 1 if arr.size else 0)
    remap = np.full(n, -1, dtype=np.int64)
    remap[arr[:, 0]] = arr[:, 1]
    if milestones is None:
        raise GraphFormatError("missing '# milestone-ids' header", path=str(path))
    if arr.size and arr[:, 1].max() >= milestones.size:
        raise GraphFormatError("milestone index out of range", path=str(path))
    return MilestoneMap(milestones, remap, np.where(remap >= 0, 0, -1))


def cleanse(h: CategoryHierarchy, k: int = 20000, undirected: bool = True,
            samples: int | None = None, seed: int = 0) -> MilestoneMap:
    scores = harmonic_centrality(h, undirected=undirected, samples=samples, seed=seed)
    k = min(k, scores.size)
    ms = select_milestones(scores, k)
    log.info("selected %d milestones out of %d categories", ms.size, scores.size)
    return build_remap(h, ms, undirected=undirected)
