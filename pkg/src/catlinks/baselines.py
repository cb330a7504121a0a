"""Competing (un)expectedness measures and their linear combination.

Adamic-Adar is an expectedness measure; M2 and M4 are unexpectedness measures
over term profiles. A link ``(q, d)`` is judged against the pool ``R`` of all
documents ``q`` links to.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .graph import DocumentGraph, GraphFormatError

EXPECTEDNESS = "expectedness"
UNEXPECTEDNESS = "unexpectedness"
_ORIENT_ALIASES = {"exp": EXPECTEDNESS, "expectedness": EXPECTEDNESS,
                   "unexp": UNEXPECTEDNESS, "unexpectedness": UNEXPECTEDNESS}
ORIENTATION = {"aa": EXPECTEDNESS, "m2": UNEXPECTEDNESS, "m4": UNEXPECTEDNESS}


class DegenerateVarianceWarning(RuntimeWarning):
    """Studentizing values whose sample standard deviation is zero."""


# --------------------------------------------------------------------------
# link prediction


def adamic_adar(g_sym: DocumentGraph, d: int, d2: int) -> float:
    """Sum of ``1 / ln|Gamma(x)|`` over common neighbours x; degree-1 neighbours are skipped.

    ``g_sym`` should be the symmetric view of the document graph.
    """
    common = np.intersect1d(g_sym.successors(d), g_sym.successors(d2), assume_unique=True)
    if common.size == 0:
        return 0.0
    deg = np.diff(g_sym.offsets)[common]
    deg = deg[deg > 1]
    return float(np.sum(1.0 / np.log(deg)))


def adamic_adar_pairs(g_sym: DocumentGraph, sources, targets) -> np.ndarray:
    return np.array([adamic_adar(g_sym, int(s), int(t)) for s, t in zip(sources, targets)], dtype=np.float64)


# --------------------------------------------------------------------------
# text measures


@dataclass
class TermDocument:
    doc: int
    term_freqs: dict[int, int] = field(default_factory=dict)

    def normalized(self) -> dict[int, float]:
        if not self.term_freqs:
            return {}
        top = max(self.term_freqs.values())
        return {t: f / top for t, f in self.term_freqs.items()}


def pool_profile(docs: Sequence[TermDocument]) -> TermDocument:
    """The pool as one bag of words (frequencies summed across documents)."""
    bag: dict[int, int] = {}
    for doc in docs:
        for t, f in doc.term_freqs.items():
            bag[t] = bag.get(t, 0) + f
    return TermDocument(-1, bag)


def document_frequencies(docs: Sequence[TermDocument]) -> dict[int, int]:
    df: dict[int, int] = {}
    for doc in docs:
        for t in doc.term_freqs:
            df[t] = df.get(t, 0) + 1
    return df


def measure_m2(d: TermDocument, pool: TermDocument, m: int) -> float:
    """Mean over the dictionary of ``max(0, ntf_d(t) - ntf_R(t))``."""
    if not d.term_freqs:
        return 0.0
    if m <= 0:
        raise ValueError("dictionary size must be positive")
    nd = d.normalized()
    nr = pool.normalized()
    total = sum(max(0.0, v - nr.get(t, 0.0)) for t, v in nd.items())
    return total / m


def measure_m4(d: TermDocument, df: Mapping[int, int], pool_size: int) -> float:
    """``max_t ntf_d(t) * log(|R| / df(t))`` over terms of d that occur in R."""
    best = 0.0
    seen = False
    for t, v in d.normalized().items():
        k = df.get(t, 0)
        if k <= 0:
            continue
        val = v * math.log(pool_size / k)
        best = val if not seen else max(best, val)
        seen = True
    return best if seen else 0.0


def load_term_documents(path) -> dict[int, TermDocument]:
    """Read ``doc TAB term:count,term:count,...`` records."""
    out: dict[int, TermDocument] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, tail = line.partition("\t")
            try:
                doc = int(head)
                tf: dict[int, int] = {}
                for item in tail.split(","):
                    item = item.strip()
                    if not item:
                        continue
                    t, _, c = item.partition(":")
                    count = int(c)
                    if count < 1:
                        raise ValueError
                    tf[int(t)] = tf.get(int(t), 0) + count
            except ValueError:
                raise GraphFormatError(f"bad term-document record {line!r}", lineno, str(path)) from None
            out[doc] = TermDocument(doc, tf)
    return out


def save_term_documents(docs: Mapping[int, TermDocument], path):
    with open(path, "w", encoding="utf-8") as f:
        for doc in sorted(docs):
            items = ",".join(f"{t}:{c}" for t, c in sorted(docs[doc].term_freqs.items()))
            f.write(f"{doc}\t{items}\n")


def query_text_measures(g: DocumentGraph, docs: Mapping[int, TermDocument], query: int,
                        m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """M2 and M4 for every out-link of ``query`` (R = all its link targets)."""
    targets = np.asarray(g.successors(query))
    pool_docs = [docs.get(int(t), TermDocument(int(t))) for t in targets]
    profile = pool_profile(pool_docs)
    df = document_frequencies(pool_docs)
    m2 = np.array([measure_m2(doc, profile, m) for doc in pool_docs], dtype=np.float64)
    m4 = np.array([measure_m4(doc, df, len(pool_docs)) for doc in pool_docs], dtype=np.float64)
    return targets, m2, m4


# --------------------------------------------------------------------------
# combination


def studentize(values) -> np.ndarray:
    """``(x - mean) / sample_sd``; zeros plus a :class:`DegenerateVarianceWarning` if sd is 0."""
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        warnings.warn("need at least two values to studentize", DegenerateVarianceWarning, stacklevel=2)
        return np.zeros_like(x)
    resid = x - x.mean()
    sd = x.std(ddof=1)
    # rounding can leave a constant list with sd ~ 1e-17
    if not np.isfinite(sd) or sd <= 1e-12 * max(1.0, float(np.abs(x).max())):
        warnings.warn("zero sample standard deviation", DegenerateVarianceWarning, stacklevel=2)
        return np.zeros_like(x)
    return resid / sd


def orientation_sign(orientation: str) -> float:
    try:
        o = _ORIENT_ALIASES[orientation]
    except KeyError:
        raise ValueError(f"unknown orientation {orientation!r}") from None
    return 1.0 if o == EXPECTEDNESS else -1.0


def combine(measures: Mapping[str, Sequence[float]], weights: Mapping[str, float],
            orientations: Mapping[str, str]) -> np.ndarray:
    """Weighted sum of studentized measures, as an expectedness score.

    Call once per query pool; unexpectedness measures enter with a minus sign.
    """
    lengths = {name: len(v) for name, v in measures.items()}
    if len(set(lengths.values())) > 1:
        raise ValueError(f"measure lengths differ: {lengths}")
    n = next(iter(lengths.values()), 0)
    total = np.zeros(n, dtype=np.float64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateVarianceWarning)
        for name, vals in measures.items():
            total += weights.get(name, 0.0) * orientation_sign(orientations[name]) * studentize(vals)
    return total


def parse_combination(spec: str) -> list[tuple[str, float, str]]:
    """Parse ``"name:weight:orient,..."`` (orient in exp/unexp)."""
    out = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        bits = part.split(":")
        if len(bits) != 3:
            raise ValueError(f"bad combination term {part!r}; expected name:weight:orientation")
        name, weight, orient = bits
        orientation_sign(orient)
        out.append((name, float(weight), _ORIENT_ALIASES[orient]))
    if not out:
        raise ValueError("empty combination spec")
    return out
