"""Ranking evaluation against human judgments: bpref and percentile precision/recall."""

from __future__ import annotations

import csv
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .graph import GraphFormatError


class Label(str, Enum):
    TOTALLY_EXPECTED = "totally-expected"
    SLIGHTLY_EXPECTED = "slightly-expected"
    SLIGHTLY_UNEXPECTED = "slightly-unexpected"
    TOTALLY_UNEXPECTED = "totally-unexpected"

    @property
    def relevant(self) -> bool:
        return self in (Label.SLIGHTLY_UNEXPECTED, Label.TOTALLY_UNEXPECTED)


# 1..4 ordinal ratings, from most expected to most unexpected
_ORDINAL = {str(i + 1): lab for i, lab in enumerate(Label)}


def parse_label(token: str) -> Label:
    key = token.strip().strip('"').lower().replace("_", "-").replace(" ", "-")
    if key in _ORDINAL:
        return _ORDINAL[key]
    try:
        return Label(key)
    except ValueError:
        raise ValueError(f"unknown judgment label {token!r}") from None


@dataclass
class JudgedPool:
    query: int
    judgments: dict[int, Label] = field(default_factory=dict)

    @property
    def relevant(self) -> set[int]:
        return {t for t, lab in self.judgments.items() if lab.relevant}

    @property
    def nonrelevant(self) -> set[int]:
        return {t for t, lab in self.judgments.items() if not lab.relevant}

    def usable(self) -> bool:
        return bool(self.relevant) and bool(self.nonrelevant)


@dataclass
class EvalDataset:
    pools: list[JudgedPool]
    all_pools: list[JudgedPool]

    @property
    def num_queries(self) -> int:
        return len(self.pools)

    @property
    def num_judged(self) -> int:
        return sum(len(p.judgments) for p in self.all_pools)

    @classmethod
    def from_pools(cls, pools: Iterable[JudgedPool]) -> "EvalDataset":
        pools = list(pools)
        return cls([p for p in pools if p.usable()], pools)


_QUERY_COLS = ("query", "source", "from", "page", "src")
_TARGET_COLS = ("target", "link", "to", "dest", "destination", "tgt")
_LABEL_COLS = ("label", "judgment", "judgement", "rating", "class", "evaluation")


def _find(header: list[str], names: Sequence[str]) -> int | None:
    for i, h in enumerate(header):
        if h.strip().lower() in names:
            return i
    return None


def _resolve(token: str, names: Mapping[str, int] | None, lineno: int, path) -> int:
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    if names is not None and token in names:
        return names[token]
    raise GraphFormatError(f"unresolvable document {token!r}", lineno, str(path))


def load_judgments(path, names: Mapping[str, int] | None = None) -> EvalDataset:
    """Read ``query TAB target TAB label`` rows.

    A header row naming the columns (e.g. ``source``/``target``/``rating``) is
    detected and honoured, so files with extra or reordered columns load as
    well. Non-integer documents are resolved through ``names``.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        text = f.read()
    delim = "\t" if "\t" in text.split("\n", 1)[0] else ","
    rows = [r for r in csv.reader(text.splitlines(), delimiter=delim)]
    cols = (0, 1, 2)
    start = 0
    while start < len(rows) and (not rows[start] or rows[start][0].startswith("#")):
        start += 1
    if start < len(rows):
        header = rows[start]
        q, t, lab = _find(header, _QUERY_COLS), _find(header, _TARGET_COLS), _find(header, _LABEL_COLS)
        if q is not None and t is not None and lab is not None:
            cols = (q, t, lab)
            start += 1
    pools: "OrderedDict[int, JudgedPool]" = OrderedDict()
    for lineno, row in enumerate(rows[start:], start + 1):
        if not row or not "".join(row).strip() or row[0].startswith("#"):
            continue
        if len(row) <= max(cols):
            raise GraphFormatError(f"expected at least {max(cols) + 1} columns", lineno, str(path))
        query = _resolve(row[cols[0]], names, lineno, path)
        target = _resolve(row[cols[1]], names, lineno, path)
        try:
            label = parse_label(row[cols[2]])
        except ValueError as e:
            raise GraphFormatError(str(e), lineno, str(path)) from None
        pools.setdefault(query, JudgedPool(query)).judgments[target] = label
    return EvalDataset.from_pools(pools.values())


def save_judgments(ds: EvalDataset, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write("query\ttarget\tlabel\n")
        for pool in ds.all_pools:
            for target, label in pool.judgments.items():
                f.write(f"{pool.query}\t{target}\t{label.value}\n")


def bpref(ranking: Sequence[int], pool: JudgedPool) -> float | None:
    """TREC bpref of ``ranking`` (most relevant first); None if R or N is 0.

    Unjudged entries are ignored. Each relevant result contributes
    ``1 - min(n_above, min(R, N)) / min(R, N)``; relevant documents absent from
    the ranking contribute 0.
    """
    rel, nonrel = pool.relevant, pool.nonrelevant
    R, N = len(rel), len(nonrel)
    if R == 0 or N == 0:
        return None
    cap = min(R, N)
    above = 0
    total = 0.0
    seen = set()
    for doc in ranking:
        if doc in seen:
            continue
        seen.add(doc)
        if doc in rel:
            total += 1.0 - min(above, cap) / cap
        elif doc in nonrel:
            above += 1
    return total / R


def mean_bpref(rankings: Mapping[int, Sequence[int]], ds: EvalDataset) -> float:
    vals = []
    for pool in ds.pools:
        if pool.query not in rankings:
            raise ValueError(f"no ranking for query {pool.query}")
        vals.append(bpref(rankings[pool.query], pool))
    return sum(vals) / len(vals) if vals else float("nan")


def precision_recall_at_percentiles(rankings: Mapping[int, Sequence[int]], ds: EvalDataset,
                                    percentiles: Sequence[float] = (1, 2, 5, 8, 10, 15, 25, 50, 100)):
    """Per percentile: precision/recall after cutting each judged-only ranking, averaged over queries.

    The cut keeps ``ceil(p% of the judged entries)`` results, at least one.
    """
    rows = []
    for p in percentiles:
        if not 0 < p <= 100:
            raise ValueError(f"percentile {p} outside (0, 100]")
        precs, recs = [], []
        for pool in ds.pools:
            judged = []
            seen = set()
            for doc in rankings.get(pool.query, ()):
                if doc in pool.judgments and doc not in seen:
                    seen.add(doc)
                    judged.append(doc)
            if not judged:
                precs.append(0.0)
                recs.append(0.0)
                continue
            cut = max(1, math.ceil(p * len(judged) / 100 - 1e-9))
            rel = pool.relevant
            hits = sum(1 for doc in judged[:cut] if doc in rel)
            precs.append(hits / cut)
            recs.append(hits / len(rel))
        n = len(precs)
        rows.append({"percentile": p,
                     "precision": sum(precs) / n if n else float("nan"),
                     "recall": sum(recs) / n if n else float("nan")})
    return rows
