"""Planted-matrix synthetic instances.

A node pair becomes an arc iff its summed planted weight is positive. Noise
then removes a ``noise_rate`` fraction of those arcs and adds about as many
arcs between pairs the planted matrix rejects; the added arcs are the ground
truth "unexpected" links.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .evaluation import JudgedPool, Label, bpref
from .graph import CategoryAssignment, DocumentGraph
from .learner import classification_measures, sequence_arrays
from .matrix import CategoryMatrix
from .scoring import rank_order, score_arcs, score_pairs

log = logging.getLogger(__name__)


class DensityWarning(UserWarning):
    """Generated graph is denser than 1/2; negative sampling will be slow."""


def random_planted_matrix(num_categories: int, kind: str = "gaussian", mean: float = -0.4,
                          sd: float = 1.0, positive_fraction: float = 0.005,
                          categories_per_node: int = 4, seed: int = 0) -> CategoryMatrix:
    """Random planted matrix.

    ``gaussian``: iid ``N(mean, sd^2)`` cells; with 4 categories per node the
    default mean gives a density near 5%.
    ``sparse``: cells in [-1.2, -0.8] except a ``positive_fraction`` of cells in
    [1.5 k^2, 2.5 k^2] (k = categories per node), so a single positive cell
    among the ``k^2`` of a pair always makes it an arc.
    """
    rng = np.random.default_rng([seed, 0x9A7])
    shape = (num_categories, num_categories)
    if kind == "gaussian":
        return CategoryMatrix(rng.normal(mean, sd, size=shape))
    if kind == "sparse":
        k2 = categories_per_node ** 2
        w = rng.uniform(-1.2, -0.8, size=shape)
        hits = rng.random(shape) < positive_fraction
        w[hits] = rng.uniform(1.5 * k2, 2.5 * k2, size=int(hits.sum()))
        return CategoryMatrix(w)
    raise ValueError(f"unknown planted matrix kind {kind!r}")


@dataclass
class PlantedModel:
    num_nodes: int
    num_categories: int
    planted_w: CategoryMatrix
    categories_per_node: int = 4
    noise_rate: float = 0.0
    zipf: float | None = None          # exponent of category popularity, None = uniform
    exact_limit: int = 10_000          # enumerate all pairs up to this many nodes
    candidates_per_node: int = 500     # sampled candidates above exact_limit

    def __post_init__(self):
        if not 0 <= self.noise_rate < 1:
            raise ValueError("noise_rate must lie in [0, 1)")
        if not 1 <= self.categories_per_node <= self.num_categories:
            raise ValueError("categories_per_node must lie in [1, num_categories]")
        if self.planted_w.dim != self.num_categories:
            raise ValueError("planted matrix dimension differs from num_categories")


@dataclass
class SyntheticInstance:
    graph: DocumentGraph
    cats: CategoryAssignment
    unexpected: np.ndarray     # bool per arc (CSR order): added by noise
    model_arcs: int            # arcs the planted matrix produced
    removed: int               # model arcs deleted by noise
    added: int                 # non-model arcs inserted by noise
    info: dict = field(default_factory=dict)


def sample_categories(model: PlantedModel, rng: np.random.Generator) -> CategoryAssignment:
    """``categories_per_node`` distinct categories per node (Gumbel top-k)."""
    n, C, k = model.num_nodes, model.num_categories, model.categories_per_node
    logits = np.zeros(C)
    if model.zipf:
        logits = -model.zipf * np.log(np.arange(1, C + 1, dtype=np.float64))
    cols = np.empty((n, k), dtype=np.int64)
    chunk = max(1, 2_000_000 // max(C, 1))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        keys = logits + rng.gumbel(size=(hi - lo, C))
        cols[lo:hi] = np.argpartition(-keys, k - 1, axis=1)[:, :k]
    nodes = np.repeat(np.arange(n, dtype=np.int64), k)
    return CategoryAssignment.from_pairs(nodes, cols.ravel(), n, C)


def _exact_model_arcs(model: PlantedModel, cats: CategoryAssignment, block: int = 1024):
    A = cats.indicator()
    AW = np.asarray(A @ model.planted_w.weights)      # (n, C): row d = sum over C_d of W rows
    n = model.num_nodes
    src_parts, tgt_parts = [], []
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        S = np.asarray(A @ AW[lo:hi].T).T              # (hi-lo, n) pair scores
        S[np.arange(hi - lo), np.arange(lo, hi)] = 0.0  # no self-loops
        r, c = np.nonzero(S > 0)
        src_parts.append(r + lo)
        tgt_parts.append(c)
    src = np.concatenate(src_parts) if src_parts else np.zeros(0, np.int64)
    tgt = np.concatenate(tgt_parts) if tgt_parts else np.zeros(0, np.int64)
    return src.astype(np.int64), tgt.astype(np.int64)


def _sample_nonmodel_pairs(n: int, count: int, model_codes: np.ndarray, rng) -> np.ndarray:
    """``count`` distinct non-self pair codes ``s * n + t`` outside ``model_codes`` (sorted)."""
    chosen = np.zeros(0, dtype=np.int64)
    while chosen.size < count:
        need = count - chosen.size
        draw = rng.integers(0, n, size=(2, int(need * 1.2) + 16))
        codes = draw[0] * n + draw[1]
        codes = codes[draw[0] != draw[1]]
        pos = np.searchsorted(model_codes, codes)
        pos[pos >= model_codes.size] = 0
        codes = codes[(model_codes.size == 0) | (model_codes[pos] != codes)]
        # keep first occurrences in draw order so the result is reproducible
        merged = np.concatenate([chosen, codes])
        _, first = np.unique(merged, return_index=True)
        chosen = merged[np.sort(first)][:count]
    return chosen


def generate(model: PlantedModel, seed: int = 0) -> SyntheticInstance:
    rng = np.random.default_rng(seed)
    n = model.num_nodes
    cats = sample_categories(model, rng)
    exact = n <= model.exact_limit
    if exact:
        ms, mt = _exact_model_arcs(model, cats)
        pool_size = n * (n - 1)
    else:
        m = model.candidates_per_node
        cs = np.repeat(np.arange(n, dtype=np.int64), m)
        ct = rng.integers(0, n - 1, size=n * m)
        ct = ct + (ct >= cs)                              # skip self
        cand = DocumentGraph.from_arcs(cs, ct, n)
        cs, ct = cand.arcs()
        score = score_pairs(model.planted_w, cats, cs, ct)
        ms, mt = cs[score > 0], ct[score > 0]
        non_s, non_t = cs[score <= 0], ct[score <= 0]
        pool_size = int(cs.size)
    model_arcs = int(ms.size)
    keep = rng.random(model_arcs) >= model.noise_rate
    removed = int(model_arcs - keep.sum())
    nonmodel = pool_size - model_arcs
    p_in = min(1.0, model.noise_rate * model_arcs / nonmodel) if nonmodel > 0 else 0.0
    added = int(rng.binomial(nonmodel, p_in)) if nonmodel > 0 and p_in > 0 else 0
    if exact:
        codes = _sample_nonmodel_pairs(n, added, np.sort(ms * n + mt), rng)
        add_s, add_t = codes // n, codes % n
    else:
        pick = rng.choice(non_s.size, size=added, replace=False) if added else np.zeros(0, np.int64)
        add_s, add_t = non_s[pick], non_t[pick]
    src = np.concatenate([ms[keep], add_s])
    tgt = np.concatenate([mt[keep], add_t])
    flag = np.concatenate([np.zeros(int(keep.sum()), dtype=bool), np.ones(added, dtype=bool)])
    g = DocumentGraph.from_arcs(src, tgt, n)
    order = np.lexsort((tgt, src))
    unexpected = flag[order]
    density = g.num_arcs / (n * (n - 1)) if n > 1 else 0.0
    if density > 0.5:
        warnings.warn(f"generated density {density:.3f} > 0.5", DensityWarning, stacklevel=2)
    log.info("synthetic graph: %d arcs (%d model, %d removed, %d added)", g.num_arcs, model_arcs, removed, added)
    return SyntheticInstance(g, cats, unexpected, model_arcs, removed, added,
                             {"density": density, "exact": exact})


def save_labels(inst: SyntheticInstance, path):
    src, tgt = inst.graph.arcs()
    with open(path, "w", encoding="utf-8") as f:
        for s, t, u in zip(src.tolist(), tgt.tolist(), inst.unexpected.tolist()):
            f.write(f"{s}\t{t}\t{'unexpected' if u else 'expected'}\n")


def load_labels(path, g: DocumentGraph) -> np.ndarray:
    """Boolean 'unexpected' flag per arc of ``g`` (CSR order)."""
    src, tgt = g.arcs()
    index = {(s, t): i for i, (s, t) in enumerate(zip(src.tolist(), tgt.tolist()))}
    out = np.zeros(g.num_arcs, dtype=bool)
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            parts = line.split()
            if len(parts) == 3:
                out[index[(int(parts[0]), int(parts[1]))]] = parts[2] == "unexpected"
    return out


# --------------------------------------------------------------------------
# recovery measures


@dataclass
class RecoveryReport:
    accuracy: float
    precision: float | None
    recall: float | None
    f_measure: float | None
    bpref: float | None
    bpref_queries: int


def unexpected_bpref(g: DocumentGraph, scores: np.ndarray, unexpected: np.ndarray) -> tuple[float | None, int]:
    """Mean bpref over sources with both kinds of out-link, ranking by ascending score.

    Vectorised over all sources at once; :func:`unexpected_bpref_reference`
    computes the same value query by query through :func:`bpref`.
    """
    src, tgt = g.arcs()
    flags = np.asarray(unexpected, dtype=bool)
    order = np.lexsort((tgt, scores, src))
    s, rel = src[order], flags[order]
    R = np.bincount(s, weights=rel, minlength=g.num_nodes)
    N = np.bincount(s, weights=~rel, minlength=g.num_nodes)
    starts = np.asarray(g.offsets[:-1])
    # non-relevant entries ranked above each position, within its source
    nonrel_cum = np.cumsum(~rel) - (~rel)
    base = np.concatenate([[0], np.cumsum(~rel)])[starts]
    above = nonrel_cum - base[s]
    cap = np.minimum(R, N)[s]
    usable_arc = rel & (cap > 0)
    contrib = np.zeros(s.size)
    contrib[usable_arc] = 1.0 - np.minimum(above[usable_arc], cap[usable_arc]) / cap[usable_arc]
    per_query = np.bincount(s, weights=contrib, minlength=g.num_nodes)
    usable = (R > 0) & (N > 0)
    if not usable.any():
        return None, 0
    return float(np.mean(per_query[usable] / R[usable])), int(usable.sum())


def unexpected_bpref_reference(g: DocumentGraph, scores: np.ndarray,
                               unexpected: np.ndarray) -> tuple[float | None, int]:
    vals = []
    for d in range(g.num_nodes):
        lo, hi = int(g.offsets[d]), int(g.offsets[d + 1])
        flags = unexpected[lo:hi]
        if flags.all() or not flags.any():
            continue
        tgt = np.asarray(g.targets[lo:hi])
        pool = JudgedPool(d, {int(t): (Label.TOTALLY_UNEXPECTED if u else Label.TOTALLY_EXPECTED)
                              for t, u in zip(tgt.tolist(), flags.tolist())})
        order = rank_order(tgt, scores[lo:hi])
        vals.append(bpref(tgt[order].tolist(), pool))
    return (float(np.mean(vals)) if vals else None), len(vals)


def evaluate_recovery(trained_w: CategoryMatrix, inst: SyntheticInstance,
                      heldout: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
                      seed: int = 1) -> RecoveryReport:
    """Pair-classification measures on ``heldout`` (source, target, label) and
    bpref of the unexpectedness ranking against the noise-added arcs.

    Without ``heldout`` a fresh balanced sample of the instance's own pairs is used.
    """
    if heldout is None:
        hs, ht, hl, _ = sequence_arrays(inst.graph, seed=seed)
    else:
        hs, ht, hl = heldout
    m = classification_measures(score_pairs(trained_w, inst.cats, hs, ht), np.asarray(hl))
    b, q = unexpected_bpref(inst.graph, score_arcs(inst.graph, trained_w, inst.cats), inst.unexpected)
    return RecoveryReport(m["accuracy"], m["precision"], m["recall"], m["f_measure"], b, q)
