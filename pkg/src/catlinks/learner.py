"""Passive-Aggressive construction of the latent category matrix.

Each training example is a document pair ``(d, d2)`` represented by the outer
product of the two category indicator vectors, normalised to unit L1 norm.
That normalisation is folded into ``rho = 1 / (|C_d| * |C_d2|)``, so the
``|C|^2`` feature vector is never built: an update touches the
``|C_d| * |C_d2|`` cells of ``C_d x C_d2`` and nothing else.

Two update rules are available:

``alg1`` (default)
    ``delta = sigma * rho * min(K, 1 - sigma * mu * rho)`` for every cell,
    applied verbatim with no hinge cut-off of its own.
``pa1``
    the textbook PA-I step under unit-L1 normalisation,
    ``delta = sigma * min(K * rho, 1 - sigma * mu * rho)``. After an unclipped
    step the normalised margin ``sigma * mu' * rho`` is exactly 1.

With ``clamp=True`` (default) a confidently correct example leaves ``W``
untouched instead of being pushed back towards the boundary.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _kernels as K_
from .graph import CategoryAssignment, DocumentGraph, PairExample
from .matrix import CategoryMatrix

log = logging.getLogger(__name__)

_U64 = (1 << 64) - 1
RULES = {"alg1": K_.RULE_ALG1, "pa1": K_.RULE_PA1}


@dataclass(frozen=True)
class TrainerConfig:
    aggressiveness: float = 1.0
    seed: int = 0
    passes: int = 1
    rule: str = "alg1"
    clamp: bool = True

    def __post_init__(self):
        if not self.aggressiveness > 0:
            raise ValueError("aggressiveness must be > 0")
        if self.passes < 1:
            raise ValueError("passes must be >= 1")
        if self.rule not in RULES:
            raise ValueError(f"unknown update rule {self.rule!r}; choose from {sorted(RULES)}")

    @property
    def seed_u64(self) -> np.uint64:
        return np.uint64(self.seed & _U64)


@dataclass
class TrainReport:
    examples_seen: int = 0
    positives: int = 0
    negatives: int = 0
    shortfall: int = 0
    skipped: int = 0
    updates_applied: int = 0
    wall_time: float = 0.0
    final_accuracy_on_sequence: float = float("nan")
    extra: dict = field(default_factory=dict)

    @property
    def throughput(self) -> float:
        return self.examples_seen / self.wall_time if self.wall_time > 0 else float("inf")


def _stats_to_report(stats: np.ndarray, report: TrainReport):
    report.positives = int(stats[K_.ST_POS])
    report.negatives = int(stats[K_.ST_NEG])
    report.shortfall = int(stats[K_.ST_SHORT])
    report.skipped = int(stats[K_.ST_SKIP])
    report.updates_applied = int(stats[K_.ST_UPD])
    report.examples_seen = report.positives + report.negatives


def sequence_arrays(g: DocumentGraph, seed: int = 0, reject: DocumentGraph | None = None):
    """One pass of the balanced example sequence as (source, target, label) arrays.

    Positives come from ``g``; negatives are rejected against ``reject``
    (default ``g``). Returns the arrays and the negative shortfall.
    """
    reject = g if reject is None else reject
    if reject.num_nodes != g.num_nodes:
        raise ValueError("rejection graph must have the same node count")
    cap = 2 * g.num_arcs
    src = np.empty(cap, dtype=np.int64)
    tgt = np.empty(cap, dtype=np.int64)
    lab = np.empty(cap, dtype=np.int8)
    stats = np.zeros(K_.NUM_STATS, dtype=np.int64)
    k = K_.sequence_kernel(g.offsets, g.targets, reject.offsets, reject.targets,
                           np.uint64(seed & _U64), src, tgt, lab, stats)
    return src[:k], tgt[:k], lab[:k], int(stats[K_.ST_SHORT])


def example_sequence(g: DocumentGraph, cfg: TrainerConfig | None = None) -> Iterator[PairExample]:
    """Yield the training sequence: per node, its out-arcs then as many sampled non-arcs.

    Self-loops are not emitted. The sequence repeats identically for each pass.
    """
    cfg = cfg or TrainerConfig()
    src, tgt, lab, _ = sequence_arrays(g, cfg.seed)
    for _ in range(cfg.passes):
        for s, t, y in zip(src.tolist(), tgt.tolist(), lab.tolist()):
            yield PairExample(s, t, y)


def pa_update(w: CategoryMatrix, ex: PairExample, cats: CategoryAssignment, K: float = 1.0,
              rule: str = "alg1", clamp: bool = True) -> float:
    """Apply one Passive-Aggressive step in place and return the per-cell delta.

    Returns 0.0 without touching ``w`` when either endpoint has no category.
    """
    ca, cb = cats.of(ex.source), cats.of(ex.target)
    if ca.size == 0 or cb.size == 0:
        return 0.0
    y = 1.0 if ex.label > 0 else -1.0
    block = w.weights[np.ix_(ca, cb)]
    mu = float(block.sum())
    rho = 1.0 / (ca.size * cb.size)
    loss = 1.0 - y * mu * rho
    if rule == "alg1":
        step = rho * min(K, loss)
    elif rule == "pa1":
        step = min(K * rho, loss)
    else:
        raise ValueError(f"unknown update rule {rule!r}")
    if clamp and step < 0.0:
        step = 0.0
    delta = y * step
    if delta != 0.0:
        w.weights[np.ix_(ca, cb)] = block + delta
    return delta


def _check_inputs(g: DocumentGraph, cats: CategoryAssignment) -> CategoryAssignment:
    if cats.num_nodes < g.num_nodes:
        cats = cats.resized(g.num_nodes)
    elif cats.num_nodes > g.num_nodes:
        raise ValueError(f"category assignment covers {cats.num_nodes} nodes, graph has {g.num_nodes}")
    return cats


def train(g: DocumentGraph, cats: CategoryAssignment, cfg: TrainerConfig | None = None,
          reject: DocumentGraph | None = None, sequence_accuracy: bool = True):
    """Single-writer online training from ``W = 0``; returns ``(CategoryMatrix, TrainReport)``.

    ``reject`` overrides the graph used to reject sampled negatives (held-out
    folds pass the full graph here so held-out arcs are never drawn as negatives).
    """
    cfg = cfg or TrainerConfig()
    cats = _check_inputs(g, cats)
    reject = g if reject is None else reject
    w = CategoryMatrix.zeros(cats.num_categories)
    stats = np.zeros(K_.NUM_STATS, dtype=np.int64)
    report = TrainReport()
    t0 = time.perf_counter()
    K_.train_kernel(w.weights, g.offsets, g.targets, reject.offsets, reject.targets,
                    cats.offsets, cats.ids, float(cfg.aggressiveness), cfg.seed_u64,
                    cfg.passes, RULES[cfg.rule], cfg.clamp, True, stats)
    report.wall_time = time.perf_counter() - t0
    _stats_to_report(stats, report)
    if sequence_accuracy:
        acc = np.zeros(K_.NUM_STATS, dtype=np.int64)
        K_.train_kernel(w.weights, g.offsets, g.targets, reject.offsets, reject.targets,
                        cats.offsets, cats.ids, float(cfg.aggressiveness), cfg.seed_u64,
                        1, RULES[cfg.rule], cfg.clamp, False, acc)
        scored = acc[K_.ST_SCORED]
        report.final_accuracy_on_sequence = float(acc[K_.ST_CORRECT] / scored) if scored else float("nan")
    if report.shortfall:
        log.info("negative sampling shortfall: %d examples", report.shortfall)
    log.debug("trained on %d examples in %.3fs", report.examples_seen, report.wall_time)
    return w, report


# --------------------------------------------------------------------------
# cross-validation


@dataclass
class FoldResult:
    fold: int
    accuracy: float
    precision: float | None
    recall: float | None
    f_measure: float | None
    positives: int
    negatives: int


def classification_measures(scores: np.ndarray, labels: np.ndarray) -> dict:
    """Sign-of-score classification against +1/-1 labels (score > 0 is positive)."""
    pred = scores > 0
    truth = labels > 0
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    fn = int(np.sum(~pred & truth))
    total = labels.size
    acc = float(np.sum(pred == truth) / total) if total else float("nan")
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    if precision is None or recall is None:
        f = None
    else:
        f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"accuracy": acc, "precision": precision, "recall": recall, "f_measure": f}


def fold_assignment(g: DocumentGraph, folds: int, seed: int) -> np.ndarray:
    """Fold id per arc (CSR order); self-loops get -1 and never enter a fold."""
    src, tgt = g.arcs()
    rng = np.random.default_rng([seed & _U64, 0xF01D])
    assign = np.full(g.num_arcs, -1, dtype=np.int64)
    live = np.flatnonzero(src != tgt)
    perm = rng.permutation(live.size)
    assign[live[perm]] = np.arange(live.size) % folds
    return assign


def cross_validate(g: DocumentGraph, cats: CategoryAssignment, cfg: TrainerConfig | None = None,
                   folds: int = 10) -> list[FoldResult]:
    """k-fold cross-validation over document pairs.

    Arcs are split into folds; each fold's held-out positives are paired with
    the same number of sampled non-arcs drawn per source node (rejected
    against the full graph). The model is trained on the remaining arcs with
    its own balanced negatives and held-out pairs are classified by score sign.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    cfg = cfg or TrainerConfig()
    cats = _check_inputs(g, cats)
    from .scoring import score_pairs

    assign = fold_assignment(g, folds, cfg.seed)
    results = []
    for f in range(folds):
        train_g, (hs, ht, hl) = _split(g, assign, f, cats, cfg.seed)
        w, _ = train(train_g, cats, cfg, reject=g, sequence_accuracy=False)
        m = classification_measures(score_pairs(w, cats, hs, ht), hl)
        results.append(FoldResult(f, m["accuracy"], m["precision"], m["recall"], m["f_measure"],
                                  int(np.sum(hl > 0)), int(np.sum(hl < 0))))
        log.info("fold %d: %s", f, m)
    return results


def summarize_folds(results: list[FoldResult]) -> dict[str, tuple[float, float]]:
    """Mean and sample standard deviation per measure, skipping absent values."""
    out = {}
    for name in ("accuracy", "precision", "recall", "f_measure"):
        vals = np.array([getattr(r, name) for r in results if getattr(r, name) is not None], dtype=float)
        if vals.size == 0:
            out[name] = (float("nan"), float("nan"))
        else:
            out[name] = (float(vals.mean()), float(vals.std(ddof=1)) if vals.size > 1 else 0.0)
    return out


def _split(g: DocumentGraph, assign: np.ndarray, fold: int, cats: CategoryAssignment | None, seed: int):
    src, tgt = g.arcs()
    held = assign == fold
    rest = ~held & (assign >= 0)
    train_g = DocumentGraph.from_arcs(src[rest], tgt[rest], g.num_nodes)
    test_g = DocumentGraph.from_arcs(src[held], tgt[held], g.num_nodes)
    hs, ht, hl, _ = sequence_arrays(test_g, seed=seed ^ (0x5EED0000 + fold), reject=g)
    if cats is not None:
        sizes = np.diff(cats.offsets)
        keep = (sizes[hs] > 0) & (sizes[ht] > 0)
        hs, ht, hl = hs[keep], ht[keep], hl[keep]
    return train_g, (hs, ht, hl)


def holdout_split(g: DocumentGraph, fraction: float = 0.1, seed: int = 0,
                  cats: CategoryAssignment | None = None):
    """Hold out ``fraction`` of the arcs plus as many sampled non-arcs.

    Returns ``(train_graph, (sources, targets, labels))``. Train with
    ``reject=g`` so held-out arcs are never drawn as training negatives.
    """
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    src, tgt = g.arcs()
    rng = np.random.default_rng([seed & _U64, 0x401D])
    assign = np.where(src != tgt, (rng.random(g.num_arcs) >= fraction).astype(np.int64), -1)
    return _split(g, assign, 0, cats, seed)
