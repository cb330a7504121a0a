"""Command-line entry point: ``catlinks <subcommand> ...``.

Data goes to the files named by ``--out``-style flags (or stdout); progress and
reports go to stderr. Every file-producing run writes ``<output>.manifest``
next to its main output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from collections import OrderedDict
from pathlib import Path

import numpy as np

from . import __version__
from .graph import GraphFormatError

log = logging.getLogger("catlinks")

SUBCOMMANDS = ("ingest", "cleanse", "train", "train-naive", "crossval", "score", "rank", "partition",
               "neighborhood", "baseline", "combine", "eval", "synth")


def _fmt(x: float) -> str:
    return repr(float(x))


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


_INPUT_FLAGS = ("graph", "cats", "matrix", "hierarchy", "edges", "categories", "pairs", "docs",
                "judgments", "names", "config")


def write_manifest(out_path, args: argparse.Namespace, wall_time: float, extra: dict | None = None):
    lines = OrderedDict()
    lines["subcommand"] = args.command
    lines["tool_version"] = __version__
    lines["seed"] = getattr(args, "seed", "")
    for key, val in sorted(vars(args).items()):
        if key in ("command", "func"):
            continue
        lines[f"config.{key}"] = val
    for key in _INPUT_FLAGS:
        val = getattr(args, key, None)
        if isinstance(val, str) and Path(val).is_file():
            lines[f"input.{key}.sha256"] = _digest(val)
    for spec in getattr(args, "input", None) or []:
        name, _, path = spec.partition("=")
        if Path(path).is_file():
            lines[f"input.{name}.sha256"] = _digest(path)
    for key, val in (extra or {}).items():
        lines[key] = val
    lines["wall_time"] = f"{wall_time:.6f}"
    with open(f"{out_path}.manifest", "w", encoding="utf-8") as f:
        for k, v in lines.items():
            f.write(f"{k}\t{v}\n")


def _open_out(path):
    if path is None or path == "-":
        return _Stdout()
    return open(path, "w", encoding="utf-8")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _load_gc(args):
    from .graph import load_categories, load_graph

    g = load_graph(args.graph)
    cats = load_categories(args.cats, getattr(args, "num_categories", None), g.num_nodes)
    return g, cats


def _load_gcw(args):
    from .matrix import load_matrix

    g, cats = _load_gc(args)
    w = load_matrix(args.matrix)
    if cats.num_categories < w.dim:
        cats = type(cats)(np.array(cats.offsets), np.array(cats.ids), w.dim)
    elif cats.num_categories > w.dim:
        raise ValueError(f"categories use {cats.num_categories} ids but matrix has dim {w.dim}")
    return g, cats, w


# --------------------------------------------------------------------------
# subcommands


def cmd_ingest(args):
    """Map string-keyed TSV inputs to dense ids and write id-based files."""
    from .graph import CategoryAssignment, DocumentGraph, save_categories, save_graph

    names: dict[str, int] = {}

    def node_id(name):
        if name not in names:
            names[name] = len(names)
        return names[name]

    src, tgt = [], []
    with open(args.edges, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise GraphFormatError("expected 'source TAB target'", lineno, args.edges)
            src.append(node_id(parts[0]))
            tgt.append(node_id(parts[1]))
    cat_names: dict[str, int] = {}

    def cat_id(name):
        if name not in cat_names:
            cat_names[name] = len(cat_names)
        return cat_names[name]

    cat_rows = []
    if args.categories:
        with open(args.categories, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                node = node_id(parts[0])
                cat_rows.extend((node, cat_id(c)) for c in parts[1:] if c)
    hier = []
    if args.hierarchy:
        with open(args.hierarchy, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise GraphFormatError("expected 'child TAB parent'", lineno, args.hierarchy)
                hier.append((cat_id(parts[0]), cat_id(parts[1])))
    prefix = args.out_prefix
    g = DocumentGraph.from_arcs(np.array(src, dtype=np.int64), np.array(tgt, dtype=np.int64), len(names))
    save_graph(g, f"{prefix}.graph", args.graph_format)
    with open(f"{prefix}.nodes.tsv", "w", encoding="utf-8") as f:
        for name, i in names.items():
            f.write(f"{i}\t{name}\n")
    if args.categories or args.hierarchy:
        with open(f"{prefix}.categories.tsv", "w", encoding="utf-8") as f:
            for name, i in cat_names.items():
                f.write(f"{i}\t{name}\n")
    if args.categories:
        rows = np.array(cat_rows, dtype=np.int64).reshape(-1, 2)
        save_categories(CategoryAssignment.from_pairs(rows[:, 0], rows[:, 1], len(names), len(cat_names)),
                        f"{prefix}.cats")
    if args.hierarchy:
        with open(f"{prefix}.hierarchy", "w", encoding="utf-8") as f:
            f.write(f"# nodes {len(cat_names)}\n")
            for c, p in hier:
                f.write(f"{c} {p}\n")
    print(f"nodes\t{len(names)}\narcs\t{g.num_arcs}\ncategories\t{len(cat_names)}", file=sys.stderr)
    return f"{prefix}.graph", {"nodes": len(names), "arcs": g.num_arcs}


def cmd_cleanse(args):
    from .categories import apply_remap, cleanse, load_hierarchy, save_remap
    from .graph import load_categories, save_categories

    num = None
    if args.num_raw_categories is not None:
        num = args.num_raw_categories
    h = load_hierarchy(args.hierarchy, num)
    m = cleanse(h, k=args.k, undirected=not args.directed, samples=args.samples, seed=args.seed)
    save_remap(m, args.out_map)
    mapped = int(np.sum(m.remap >= 0))
    extra = {"milestones": m.num_milestones, "mapped": mapped}
    if args.cats:
        raw = load_categories(args.cats, max(h.num_raw_categories, 1))
        new = apply_remap(raw, m)
        out = args.out_cats or f"{args.out_map}.cats"
        save_categories(new, out)
        sizes = new.sizes()
        extra["mean_categories_per_node"] = f"{sizes.mean():.4f}" if sizes.size else "nan"
    print("\n".join(f"{k}\t{v}" for k, v in extra.items()), file=sys.stderr)
    return args.out_map, extra


def _trainer_config(args):
    from .learner import TrainerConfig

    return TrainerConfig(aggressiveness=args.k_aggr, seed=args.seed, passes=args.passes,
                         rule=args.rule, clamp=not args.no_clamp)


def cmd_train(args):
    from .learner import train
    from .matrix import save_matrix

    g, cats = _load_gc(args)
    w, rep = train(g, cats, _trainer_config(args))
    save_matrix(w, args.out, args.width)
    report = {"examples_seen": rep.examples_seen, "positives": rep.positives, "negatives": rep.negatives,
              "shortfall": rep.shortfall, "skipped": rep.skipped, "updates_applied": rep.updates_applied,
              "final_accuracy_on_sequence": f"{rep.final_accuracy_on_sequence:.6f}",
              "train_seconds": f"{rep.wall_time:.3f}"}
    print("\n".join(f"{k}\t{v}" for k, v in report.items()), file=sys.stderr)
    report.pop("train_seconds")
    return args.out, report


def cmd_train_naive(args):
    from .matrix import save_matrix
    from .naive import count_pairs, naive_matrix

    g, cats = _load_gc(args)
    w = naive_matrix(count_pairs(g, cats))
    save_matrix(w, args.out, args.width)
    return args.out, {"dim": w.dim}


def cmd_crossval(args):
    from .learner import cross_validate, summarize_folds

    g, cats = _load_gc(args)
    results = cross_validate(g, cats, _trainer_config(args), folds=args.folds)
    summary = summarize_folds(results)

    def cell(v):
        return "NA" if v is None else f"{v:.6f}"

    with _open_out(args.out) as f:
        f.write("fold\taccuracy\tprecision\trecall\tf_measure\tpositives\tnegatives\n")
        for r in results:
            f.write(f"{r.fold}\t{cell(r.accuracy)}\t{cell(r.precision)}\t{cell(r.recall)}\t"
                    f"{cell(r.f_measure)}\t{r.positives}\t{r.negatives}\n")
        f.write("#\n# measure\tmean\tsd\n")
        for name, label in (("accuracy", "Accuracy"), ("precision", "Precision"),
                            ("recall", "Recall"), ("f_measure", "F-Measure")):
            mean, sd = summary[name]
            f.write(f"# {label}\t{100 * mean:.1f}%\t{100 * sd:.2f}\n")
    return args.out, {}


def cmd_score(args):
    from .scoring import score_arcs, score_pairs

    g, cats, w = _load_gcw(args)
    if args.pairs:
        from .graph import read_edge_list

        pg = read_edge_list(args.pairs, g.num_nodes)
        src, tgt = pg.arcs()
        scores = score_pairs(w, cats, src, tgt)
    else:
        src, tgt = g.arcs()
        scores = score_arcs(g, w, cats)
    with _open_out(args.out) as f:
        for s, t, v in zip(src.tolist(), tgt.tolist(), scores.tolist()):
            f.write(f"{s}\t{t}\t{_fmt(v)}\n")
    return args.out, {"pairs": int(src.size)}


def cmd_rank(args):
    from .scoring import rank_links, top_pool

    g, cats, w = _load_gcw(args)
    queries = [args.query] if args.query is not None else range(g.num_nodes)
    rows = 0
    with _open_out(args.out) as f:
        for q in queries:
            ranked = top_pool(g, w, cats, q, args.alpha) if args.alpha < 1 else rank_links(g, w, cats, q)
            for ls in ranked:
                f.write(f"{ls.source}\t{ls.target}\t{_fmt(ls.score)}\n")
            rows += len(ranked)
    return args.out, {"rows": rows}


def cmd_partition(args):
    from .scoring import partition_links

    g, cats, w = _load_gcw(args)
    part = partition_links(g, w, cats)
    report = {"arcs": g.num_arcs, "explainable": len(part.explainable),
              "unexplainable": len(part.unexplainable), "ratio": f"{part.ratio:.6f}"}
    with _open_out(args.out) as f:
        for k, v in report.items():
            f.write(f"{k}\t{v}\n")
    if args.out_unexplainable:
        with open(args.out_unexplainable, "w", encoding="utf-8") as f:
            for s, t in part.unexplainable.tolist():
                f.write(f"{s}\t{t}\n")
    return args.out, report


def cmd_neighborhood(args):
    from .matrix import load_matrix
    from .scoring import category_neighborhood

    w = load_matrix(args.matrix)
    arcs = category_neighborhood(w, args.category, args.k, args.threshold, args.direction)
    with _open_out(args.out) as f:
        for a, b, v in arcs:
            f.write(f"{a}\t{b}\t{_fmt(v)}\n")
    return args.out, {"arcs": len(arcs)}


def cmd_baseline(args):
    from .baselines import ORIENTATION, adamic_adar_pairs, load_term_documents, query_text_measures
    from .graph import load_graph

    g = load_graph(args.graph)
    queries = [args.query] if args.query is not None else range(g.num_nodes)
    orient = ORIENTATION[args.method]
    if args.method == "aa":
        g_sym = g.symmetric()
    else:
        if not args.docs or not args.dict_size:
            raise ValueError(f"--docs and --dict-size are required for {args.method}")
        docs = load_term_documents(args.docs)
    rows = 0
    with _open_out(args.out) as f:
        f.write(f"# measure {args.method} orientation {orient}\n")
        for q in queries:
            if args.method == "aa":
                tgt = np.asarray(g.successors(q))
                vals = adamic_adar_pairs(g_sym, np.full(tgt.size, q), tgt)
            else:
                tgt, m2, m4 = query_text_measures(g, docs, q, args.dict_size)
                vals = m2 if args.method == "m2" else m4
            # most unexpected first, ties by target id
            key = vals if orient == "expectedness" else -vals
            for i in np.lexsort((tgt, key)).tolist():
                f.write(f"{q}\t{int(tgt[i])}\t{_fmt(vals[i])}\n")
            rows += tgt.size
    return args.out, {"rows": rows, "orientation": orient}


def read_score_table(path) -> "OrderedDict[int, list[tuple[int, float]]]":
    """``source TAB target TAB score`` rows grouped by source, file order kept."""
    table: "OrderedDict[int, list[tuple[int, float]]]" = OrderedDict()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise GraphFormatError("expected 'source TAB target [TAB score]'", lineno, str(path))
            score = float(parts[2]) if len(parts) > 2 else math.nan
            table.setdefault(int(parts[0]), []).append((int(parts[1]), score))
    return table


def cmd_combine(args):
    from .baselines import combine, parse_combination

    terms = parse_combination(args.spec)
    inputs = dict(spec.split("=", 1) for spec in args.input)
    missing = [name for name, _, _ in terms if name not in inputs]
    if missing:
        raise ValueError(f"no --input given for {missing}")
    tables = {name: read_score_table(inputs[name]) for name, _, _ in terms}
    first = tables[terms[0][0]]
    rows = 0
    with _open_out(args.out) as f:
        for q in first:
            targets = sorted(t for t, _ in first[q])
            measures = {}
            for name, _, _ in terms:
                lookup = dict(tables[name].get(q, []))
                if any(t not in lookup for t in targets):
                    raise ValueError(f"measure {name!r} lacks some links of query {q}")
                measures[name] = [lookup[t] for t in targets]
            if len(targets) < 2:
                combined = np.zeros(len(targets))
            else:
                combined = combine(measures, {n: w for n, w, _ in terms}, {n: o for n, _, o in terms})
            tarr = np.array(targets, dtype=np.int64)
            for i in np.lexsort((tarr, combined)).tolist():
                f.write(f"{q}\t{targets[i]}\t{_fmt(combined[i])}\n")
            rows += len(targets)
    return args.out, {"rows": rows}


def cmd_eval(args):
    from .evaluation import load_judgments, mean_bpref, precision_recall_at_percentiles

    names = None
    if args.names:
        names = {}
        with open(args.names, "r", encoding="utf-8") as f:
            for line in f:
                i, _, name = line.rstrip("\n").partition("\t")
                if name:
                    names[name] = int(i)
    ds = load_judgments(args.judgments, names)
    print(f"judged_links\t{ds.num_judged}\nqueries\t{len(ds.all_pools)}\nretained_queries\t{ds.num_queries}",
          file=sys.stderr)
    root = Path(args.rankings)
    files = sorted(root.glob("*.tsv")) if root.is_dir() else [root]
    if not files:
        raise ValueError(f"no *.tsv rankings in {root}")
    systems = OrderedDict()
    for path in files:
        systems[path.stem] = {q: [t for t, _ in rows] for q, rows in read_score_table(path).items()}
    for name, ranking in systems.items():
        for pool in ds.pools:
            ranking.setdefault(pool.query, [])
    percentiles = [float(p) for p in args.percentiles.split(",") if p]
    with _open_out(args.out) as f:
        if args.metric == "bpref":
            f.write("algorithm\taverage_bpref\tqueries\n")
            for name, ranking in systems.items():
                f.write(f"{name}\t{mean_bpref(ranking, ds):.3f}\t{ds.num_queries}\n")
        else:
            f.write("algorithm\tpercentile\tprecision\trecall\n")
            for name, ranking in systems.items():
                for row in precision_recall_at_percentiles(ranking, ds, percentiles):
                    f.write(f"{name}\t{row['percentile']:g}\t{row['precision']:.6f}\t{row['recall']:.6f}\n")
    return args.out, {"retained_queries": ds.num_queries}


def cmd_synth(args):
    from .graph import save_categories, save_graph
    from .matrix import save_matrix
    from .synth import PlantedModel, generate, random_planted_matrix, save_labels

    w = random_planted_matrix(args.cats, kind=args.kind, mean=args.mean, sd=args.sd,
                              positive_fraction=args.positive_fraction,
                              categories_per_node=args.cats_per_node, seed=args.seed)
    model = PlantedModel(args.nodes, args.cats, w, args.cats_per_node, args.noise, zipf=args.zipf)
    inst = generate(model, seed=args.seed)
    p = args.out_prefix
    save_graph(inst.graph, f"{p}.graph", args.graph_format)
    save_categories(inst.cats, f"{p}.cats")
    save_matrix(w, f"{p}.planted.bin")
    save_labels(inst, f"{p}.labels.tsv")
    report = {"nodes": inst.graph.num_nodes, "arcs": inst.graph.num_arcs, "model_arcs": inst.model_arcs,
              "removed": inst.removed, "added": inst.added, "density": f"{inst.info['density']:.6f}"}
    print("\n".join(f"{k}\t{v}" for k, v in report.items()), file=sys.stderr)
    return f"{p}.graph", report


# --------------------------------------------------------------------------
# parser


def _add_train_flags(p):
    p.add_argument("--k-aggr", type=float, default=1.0, help="aggressiveness K (default 1.0)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--passes", type=int, default=1)
    p.add_argument("--rule", choices=("alg1", "pa1"), default="alg1")
    p.add_argument("--no-clamp", action="store_true", help="allow updates on confidently correct examples")


def _add_gc(p, matrix=False):
    p.add_argument("--graph", required=True)
    p.add_argument("--cats", required=True)
    p.add_argument("--num-categories", type=int, default=None)
    if matrix:
        p.add_argument("--matrix", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catlinks", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file of defaults, flat or keyed by subcommand")
    parser.add_argument("--threads", type=int, default=1, help="worker cap for parallel-safe stages")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", help="map named edge/category files to dense ids")
    p.add_argument("--edges", required=True)
    p.add_argument("--categories")
    p.add_argument("--hierarchy")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--graph-format", choices=("packed-binary", "edge-list"), default="packed-binary")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cleanse", help="select milestone categories and remap")
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--k", type=int, default=20000)
    p.add_argument("--out-map", required=True)
    p.add_argument("--cats", help="raw category assignment to remap")
    p.add_argument("--out-cats")
    p.add_argument("--num-raw-categories", type=int)
    p.add_argument("--directed", action="store_true", help="follow child->parent arcs only")
    p.add_argument("--samples", type=int, help="approximate centrality from this many BFS sources")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cleanse)

    p = sub.add_parser("train", help="learn the matrix with Passive-Aggressive updates")
    _add_gc(p)
    _add_train_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, choices=(4, 8), default=8, help="stored float width in bytes")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("train-naive", help="counting matrix with add-one smoothing")
    _add_gc(p)
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, choices=(4, 8), default=8)
    p.set_defaults(func=cmd_train_naive)

    p = sub.add_parser("crossval", help="k-fold pair classification")
    _add_gc(p)
    _add_train_flags(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("score", help="expectedness score per arc (or per listed pair)")
    _add_gc(p, matrix=True)
    p.add_argument("--pairs", help="edge-list of pairs to score instead of the arcs")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="out-links by ascending expectedness")
    _add_gc(p, matrix=True)
    p.add_argument("--query", type=int)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("partition", help="explainable / unexplainable arc counts")
    _add_gc(p, matrix=True)
    p.add_argument("--out")
    p.add_argument("--out-unexplainable")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("neighborhood", help="heaviest neighbours of a category")
    p.add_argument("--matrix", required=True)
    p.add_argument("--category", type=int, required=True)
    p.add_argument("--k", type=int, default=18)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--direction", choices=("out", "in", "both"), default="out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_neighborhood)

    p = sub.add_parser("baseline", help="Adamic-Adar, M2 or M4 per out-link")
    p.add_argument("--method", choices=("aa", "m2", "m4"), required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--docs", help="term-document file (m2, m4)")
    p.add_argument("--dict-size", type=int, help="dictionary size m (m2)")
    p.add_argument("--query", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("combine", help="studentized linear combination of score files")
    p.add_argument("--spec", required=True, help='e.g. "pa:0.5:exp,aa:0.5:exp"')
    p.add_argument("--input", action="append", required=True, metavar="NAME=FILE")
    p.add_argument("--out")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("eval", help="bpref or percentile precision/recall of rankings")
    p.add_argument("--rankings", required=True, help="directory of <system>.tsv rankings, or one file")
    p.add_argument("--judgments", required=True)
    p.add_argument("--names", help="id TAB name table for titled judgments")
    p.add_argument("--metric", choices=("bpref", "pr"), default="bpref")
    p.add_argument("--percentiles", default="1,2,5,8,10,15,25,50,100")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="planted-matrix synthetic instance")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--cats", type=int, required=True)
    p.add_argument("--cats-per-node", type=int, default=4)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=("gaussian", "sparse"), default="gaussian")
    p.add_argument("--mean", type=float, default=-0.4)
    p.add_argument("--sd", type=float, default=1.0)
    p.add_argument("--positive-fraction", type=float, default=0.005)
    p.add_argument("--zipf", type=float, default=None)
    p.add_argument("--graph-format", choices=("packed-binary", "edge-list"), default="packed-binary")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def _config_defaults(parser, argv):
    """Apply ``--config`` values as subparser defaults so explicit flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config, "r", encoding="utf-8") as f:
        cfg = json.load(f)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sp in subparsers.choices.items():
        values = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
        values.update(cfg.get(name, {}))
        values = {k.replace("-", "_"): v for k, v in values.items()}
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in values.items() if k in dests})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _config_defaults(parser, argv)
    except (OSError, ValueError) as e:
        print(f"catlinks: error: bad config: {e}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s", stream=sys.stderr)
    t0 = time.perf_counter()
    try:
        out, extra = args.func(args)
    except (GraphFormatError, ValueError, IndexError, KeyError, OSError) as e:
        print(f"catlinks {args.command}: error: {e}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - t0
    if out is not None and out != "-":
        write_manifest(out, args, elapsed, extra)
    log.info("%s finished in %.3fs", args.command, elapsed)
    return 0


if __name__ == "__main__":
    sys.exit(main())
