"""Document graph and category assignment: storage, ingestion, traversal.

Both structures are compressed-row (CSR) arrays: ``offsets[i]:offsets[i+1]``
delimits the sorted, duplicate-free neighbour (or category) list of node ``i``.
Arrays are marked read-only after construction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np

GRAPH_MAGIC = b"CLGR"
GRAPH_VERSION = 1
_GRAPH_HEADER = struct.Struct("<4sIQQ")
_U32_MAX = np.iinfo(np.uint32).max


class GraphFormatError(ValueError):
    """Malformed graph, category, or hierarchy input."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _csr_from_pairs(rows: np.ndarray, cols: np.ndarray, num_rows: int) -> tuple[np.ndarray, np.ndarray]:
    """Sort and deduplicate (row, col) pairs into CSR offsets/indices."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if rows.size:
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        keep = np.ones(rows.size, dtype=bool)
        keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        rows, cols = rows[keep], cols[keep]
    counts = np.bincount(rows, minlength=num_rows) if rows.size else np.zeros(num_rows, dtype=np.int64)
    offsets = np.zeros(num_rows + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, cols


@dataclass(frozen=True, eq=False)
class DocumentGraph:
    """Immutable directed graph over dense integer node ids."""

    offsets: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        _freeze(self.offsets)
        _freeze(self.targets)

    @classmethod
    def from_arcs(cls, sources: Iterable[int], targets: Iterable[int], num_nodes: int | None = None) -> "DocumentGraph":
        src = np.asarray(list(sources) if not isinstance(sources, np.ndarray) else sources, dtype=np.int64)
        tgt = np.asarray(list(targets) if not isinstance(targets, np.ndarray) else targets, dtype=np.int64)
        if src.shape != tgt.shape:
            raise ValueError("sources and targets differ in length")
        if src.size and (src.min() < 0 or tgt.min() < 0):
            raise ValueError("node ids must be non-negative")
        inferred = int(max(src.max(), tgt.max())) + 1 if src.size else 0
        if num_nodes is None:
            num_nodes = inferred
        elif inferred > num_nodes:
            raise IndexError(f"node id {inferred - 1} out of range for {num_nodes} nodes")
        offsets, cols = _csr_from_pairs(src, tgt, num_nodes)
        return cls(offsets, cols)

    @classmethod
    def empty(cls, num_nodes: int = 0) -> "DocumentGraph":
        return cls(np.zeros(num_nodes + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))

    @property
    def num_nodes(self) -> int:
        return len(self.offsets) - 1

    @property
    def num_arcs(self) -> int:
        return int(self.offsets[-1])

    def successors(self, node: int) -> np.ndarray:
        self._check(node)
        return self.targets[self.offsets[node]:self.offsets[node + 1]]

    def outdegree(self, node: int | None = None):
        if node is None:
            return np.diff(self.offsets)
        self._check(node)
        return int(self.offsets[node + 1] - self.offsets[node])

    def has_arc(self, source: int, target: int) -> bool:
        self._check(source)
        self._check(target)
        row = self.targets[self.offsets[source]:self.offsets[source + 1]]
        i = np.searchsorted(row, target)
        return bool(i < row.size and row[i] == target)

    def arcs(self) -> tuple[np.ndarray, np.ndarray]:
        """All arcs as parallel (source, target) arrays in CSR order."""
        src = np.repeat(np.arange(self.num_nodes, dtype=np.int64), np.diff(self.offsets))
        return src, np.asarray(self.targets)

    def symmetric(self) -> "DocumentGraph":
        src, tgt = self.arcs()
        return DocumentGraph.from_arcs(
            np.concatenate([src, tgt]), np.concatenate([tgt, src]), self.num_nodes
        )

    def without_self_loops(self) -> "DocumentGraph":
        src, tgt = self.arcs()
        keep = src != tgt
        return DocumentGraph.from_arcs(src[keep], tgt[keep], self.num_nodes)

    def _check(self, node: int):
        if not 0 <= node < self.num_nodes:
            raise IndexError(f"node id {node} out of range [0, {self.num_nodes})")

    def __eq__(self, other):
        if not isinstance(other, DocumentGraph):
            return NotImplemented
        return np.array_equal(self.offsets, other.offsets) and np.array_equal(self.targets, other.targets)

    def __repr__(self):
        return f"DocumentGraph(num_nodes={self.num_nodes}, num_arcs={self.num_arcs})"


def symmetric_view(g: DocumentGraph) -> DocumentGraph:
    return g.symmetric()


def has_arc(g: DocumentGraph, s: int, t: int) -> bool:
    return g.has_arc(s, t)


@dataclass(frozen=True, eq=False)
class CategoryAssignment:
    """Per-node sorted sets of category ids drawn from ``range(num_categories)``."""

    offsets: np.ndarray
    ids: np.ndarray
    num_categories: int

    def __post_init__(self):
        _freeze(self.offsets)
        _freeze(self.ids)

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]], num_categories: int) -> "CategoryAssignment":
        rows, cols = [], []
        n = 0
        for node, cs in enumerate(sets):
            n = node + 1
            for c in cs:
                rows.append(node)
                cols.append(c)
        return cls.from_pairs(rows, cols, n, num_categories)

    @classmethod
    def from_pairs(cls, nodes, categories, num_nodes: int, num_categories: int) -> "CategoryAssignment":
        nodes = np.asarray(nodes, dtype=np.int64)
        categories = np.asarray(categories, dtype=np.int64)
        if categories.size:
            if categories.min() < 0 or categories.max() >= num_categories:
                bad = categories[(categories < 0) | (categories >= num_categories)][0]
                raise IndexError(f"category id {bad} out of range [0, {num_categories})")
            if nodes.min() < 0 or nodes.max() >= num_nodes:
                raise IndexError(f"node id {nodes.max()} out of range [0, {num_nodes})")
        offsets, ids = _csr_from_pairs(nodes, categories, num_nodes)
        return cls(offsets, ids, int(num_categories))

    @property
    def num_nodes(self) -> int:
        return len(self.offsets) - 1

    def of(self, node: int) -> np.ndarray:
        if not 0 <= node < self.num_nodes:
            raise IndexError(f"node id {node} out of range [0, {self.num_nodes})")
        return self.ids[self.offsets[node]:self.offsets[node + 1]]

    def sizes(self) -> np.ndarray:
        return np.diff(self.offsets)

    def resized(self, num_nodes: int) -> "CategoryAssignment":
        """Pad with empty sets (or truncate) to exactly ``num_nodes`` nodes."""
        if num_nodes == self.num_nodes:
            return self
        if num_nodes > self.num_nodes:
            pad = np.full(num_nodes - self.num_nodes, self.offsets[-1], dtype=np.int64)
            return CategoryAssignment(np.concatenate([self.offsets, pad]), np.array(self.ids), self.num_categories)
        end = self.offsets[num_nodes]
        return CategoryAssignment(np.array(self.offsets[:num_nodes + 1]), np.array(self.ids[:end]), self.num_categories)

    def indicator(self):
        """Sparse node-by-category 0/1 matrix (scipy CSR)."""
        import scipy.sparse as sp

        data = np.ones(self.ids.size, dtype=np.float64)
        return sp.csr_matrix((data, np.asarray(self.ids), np.asarray(self.offsets)),
                             shape=(self.num_nodes, self.num_categories))

    def __eq__(self, other):
        if not isinstance(other, CategoryAssignment):
            return NotImplemented
        return (self.num_categories == other.num_categories
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.ids, other.ids))

    def __repr__(self):
        return f"CategoryAssignment(num_nodes={self.num_nodes}, num_categories={self.num_categories})"


class PairExample(NamedTuple):
    source: int
    target: int
    label: int


# --------------------------------------------------------------------------
# file formats


def _data_lines(path) -> Iterator[tuple[int, str]]:
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def read_edge_list(path, num_nodes: int | None = None) -> DocumentGraph:
    src, tgt = [], []
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'source target', got {line!r}", lineno, str(path))
        try:
            s, t = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer node id in {line!r}", lineno, str(path)) from None
        if s < 0 or t < 0:
            raise GraphFormatError(f"negative node id in {line!r}", lineno, str(path))
        if s > _U32_MAX or t > _U32_MAX:
            raise IndexError(f"{path}:{lineno}: node id exceeds 32-bit range")
        src.append(s)
        tgt.append(t)
    if num_nodes is None:
        num_nodes = _header_counts(path).get("nodes")
    return DocumentGraph.from_arcs(np.array(src, dtype=np.int64), np.array(tgt, dtype=np.int64), num_nodes)


def write_edge_list(g: DocumentGraph, path):
    src, tgt = g.arcs()
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# nodes {g.num_nodes} arcs {g.num_arcs}\n")
        for s, t in zip(src.tolist(), tgt.tolist()):
            f.write(f"{s} {t}\n")


def write_packed(g: DocumentGraph, path):
    """Little-endian header, u32 degrees, then u32 delta-coded targets per node."""
    if g.num_nodes > _U32_MAX:
        raise IndexError("node count exceeds 32-bit range")
    degrees = np.diff(g.offsets)
    deltas = np.asarray(g.targets, dtype=np.int64).copy()
    if deltas.size:
        same = np.ones(deltas.size, dtype=bool)
        same[g.offsets[:-1][degrees > 0]] = False
        deltas[1:][same[1:]] -= np.asarray(g.targets[:-1])[same[1:]]
    with open(path, "wb") as f:
        f.write(_GRAPH_HEADER.pack(GRAPH_MAGIC, GRAPH_VERSION, g.num_nodes, g.num_arcs))
        f.write(degrees.astype("<u4").tobytes())
        f.write(deltas.astype("<u4").tobytes())


def read_packed(path) -> DocumentGraph:
    data = Path(path).read_bytes()
    if len(data) < _GRAPH_HEADER.size:
        raise GraphFormatError("truncated header", path=str(path))
    magic, version, n, m = _GRAPH_HEADER.unpack_from(data)
    if magic != GRAPH_MAGIC:
        raise GraphFormatError("bad magic, not a packed graph", path=str(path))
    if version != GRAPH_VERSION:
        raise GraphFormatError(f"unsupported version {version}", path=str(path))
    expected = _GRAPH_HEADER.size + 4 * (n + m)
    if len(data) != expected:
        raise GraphFormatError(f"payload size {len(data)} != {expected}", path=str(path))
    pos = _GRAPH_HEADER.size
    degrees = np.frombuffer(data, dtype="<u4", count=n, offset=pos).astype(np.int64)
    deltas = np.frombuffer(data, dtype="<u4", count=m, offset=pos + 4 * n).astype(np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=offsets[1:])
    if offsets[-1] != m:
        raise GraphFormatError("degree sum does not match arc count", path=str(path))
    # segmented prefix sum: restart the running total at each row start
    total = np.cumsum(deltas)
    starts = offsets[:-1][degrees > 0]
    base = np.zeros(m, dtype=np.int64)
    if m:
        before = np.where(starts > 0, total[starts - 1], 0)
        base[starts] = np.diff(np.concatenate([[0], before]))
        base = np.cumsum(base)
    targets = total - base
    if m:
        inner = np.ones(m, dtype=bool)
        inner[starts] = False
        if targets.max() >= n or np.any(deltas[inner] == 0):
            raise GraphFormatError("corrupt adjacency payload", path=str(path))
    return DocumentGraph(offsets, targets)


def load_graph(path, format: str = "auto", num_nodes: int | None = None) -> DocumentGraph:
    """Load an edge-list text file or a packed-binary graph.

    ``format='auto'`` sniffs the packed magic bytes.
    """
    if format == "auto":
        with open(path, "rb") as f:
            format = "packed-binary" if f.read(4) == GRAPH_MAGIC else "edge-list"
    if format == "edge-list":
        return read_edge_list(path, num_nodes)
    if format == "packed-binary":
        g = read_packed(path)
        if num_nodes is not None and num_nodes != g.num_nodes:
            raise IndexError(f"packed graph has {g.num_nodes} nodes, expected {num_nodes}")
        return g
    raise ValueError(f"unknown graph format {format!r}")


def save_graph(g: DocumentGraph, path, format: str = "packed-binary"):
    if format == "packed-binary":
        write_packed(g, path)
    elif format == "edge-list":
        write_edge_list(g, path)
    else:
        raise ValueError(f"unknown graph format {format!r}")


_HEADER_KEYS = ("nodes", "categories", "arcs")


def _header_counts(path) -> dict[str, int]:
    """Counts from a leading ``# nodes N categories C`` comment, if present."""
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline()
    if not first.startswith("#"):
        return {}
    words = first[1:].split()
    out = {}
    for key, val in zip(words[::2], words[1::2]):
        if key in _HEADER_KEYS and val.isdigit():
            out[key] = int(val)
    return out


def load_categories(path, num_categories: int | None = None, num_nodes: int | None = None) -> CategoryAssignment:
    """Read ``node TAB c1,c2,...`` records.

    ``num_categories`` and ``num_nodes`` fall back to the file's header comment,
    then to max id + 1. Nodes that are never listed get empty sets.
    """
    header = _header_counts(path)
    num_categories = num_categories if num_categories is not None else header.get("categories")
    num_nodes = num_nodes if num_nodes is not None else header.get("nodes")
    nodes, cats = [], []
    last_node = -1
    for lineno, line in _data_lines(path):
        head, sep, tail = line.partition("\t")
        if not sep:
            head, _, tail = line.partition(" ")
        try:
            node = int(head)
            ids = [int(x) for x in tail.split(",") if x.strip()]
        except ValueError:
            raise GraphFormatError(f"non-integer id in {line!r}", lineno, str(path)) from None
        if node < 0 or any(c < 0 for c in ids):
            raise GraphFormatError(f"negative id in {line!r}", lineno, str(path))
        if num_categories is not None:
            for c in ids:
                if c >= num_categories:
                    raise IndexError(f"{path}:{lineno}: category id {c} >= {num_categories}")
        last_node = max(last_node, node)
        nodes.extend([node] * len(ids))
        cats.extend(ids)
    if num_categories is None:
        num_categories = max(cats) + 1 if cats else 0
    if num_nodes is None:
        num_nodes = last_node + 1
    elif last_node >= num_nodes:
        raise IndexError(f"node id {last_node} out of range for {num_nodes} nodes")
    return CategoryAssignment.from_pairs(nodes, cats, num_nodes, num_categories)


def save_categories(assign: CategoryAssignment, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# nodes {assign.num_nodes} categories {assign.num_categories}\n")
        for node in range(assign.num_nodes):
            cs = assign.of(node)
            if cs.size:
                f.write(f"{node}\t{','.join(map(str, cs.tolist()))}\n")
