"""Command-line interface.

Subcommands: generate, workload, ingest, query, bench, report.  Every
configuration key (B, u, m, seed, n, c, maxDepth, P, W, bounds) is exposed
as a flag of the same name and may also come from a key=value file via
--config; flags win.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import os
import shutil
import sys

from . import __version__
from .bench import build_index, run_bench, summary_row, write_outputs, SUMMARY_COLUMNS
from .config import INDEX_KINDS, RunConfig, apply_overrides, load_config_file, parse_bounds
from .core import DomainError
from .signature import dump_frequency_file
from .datagen import DEFAULT_BOUNDS, SPATIAL_MODELS, SynthSpec, generate_objects
from .fileio import (
    ParseError,
    Vocabulary,
    object_from_row,
    query_from_row,
    read_object_file,
    read_query_file,
    write_object_file,
    write_query_file,
)
from .reporting import read_query_log, read_summary, render_figures, render_table
from .search import search_top_k
from .workload import WorkloadSpec, build_workload

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we reserve that
        raise UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value configuration file")
    for key, help_text in (
        ("B", "signature width in bits"),
        ("u", "frequency block count"),
        ("m", "hash functions per term"),
        ("seed", "hash seed"),
        ("n", "grid fanout per axis"),
        ("c", "leaf capacity"),
        ("maxDepth", "split cutoff depth"),
        ("P", "segment capacity (objects)"),
        ("W", "retention (max sealed objects)"),
    ):
        p.add_argument(f"--{key}", type=int, help=help_text)
    p.add_argument("--bounds", help="global rectangle minX,minY,maxX,maxY")


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = load_config_file(args.config, cfg)
    return apply_overrides(
        cfg,
        B=args.B, u=args.u, m=args.m, seed=args.seed, n=args.n, c=args.c,
        maxDepth=args.maxDepth, P=args.P, W=args.W, bounds=args.bounds,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="geotopk", description=__doc__)
    parser.add_argument("--version", action="version", version=f"geotopk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic object stream")
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--zipf-s", type=float, default=1.0)
    g.add_argument("--terms", type=int, default=10_000, help="term universe size")
    g.add_argument("--spatial", choices=SPATIAL_MODELS, default="uniform")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--bounds", default=None)
    g.add_argument("--mean-terms", type=float, default=10.0)
    g.add_argument("--mean-gap-ms", type=float, default=10.0)
    g.add_argument("--clusters", type=int, default=8)
    g.add_argument("--start-t", type=int, default=0)
    g.add_argument("-o", "--out", required=True)

    w = sub.add_parser("workload", help="build a query workload from an object file")
    w.add_argument("--objects", required=True)
    w.add_argument("--queries", type=int, default=1000)
    w.add_argument("--l", type=int, default=3, help="keywords per query")
    w.add_argument("--k", type=int, default=10)
    w.add_argument("--alpha", type=float, default=0.5)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("-o", "--out", required=True)

    i = sub.add_parser("ingest", help="stream an object file into an index and print stats")
    i.add_argument("--objects", required=True)
    i.add_argument("--index", choices=INDEX_KINDS, default="ssg")
    i.add_argument("--freq", help="historical frequency table (token<TAB>count); default: 10%% stream prefix")
    i.add_argument("--image-out", help="directory to write a rebuildable index image")
    _add_config_flags(i)

    q = sub.add_parser("query", help="one-shot query against a built index image or object file")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", help="index image directory written by ingest")
    src.add_argument("--objects", help="object file to build from")
    q.add_argument("--index", choices=INDEX_KINDS, default="ssg")
    q.add_argument("--freq", help="historical frequency table (token<TAB>count)")
    q.add_argument("--keywords", required=True, help="space-separated query tokens")
    q.add_argument("--loc", required=True, help="query location x,y")
    q.add_argument("--t", type=int, default=None, help="query timestamp (default: newest)")
    q.add_argument("--k", type=int, default=10)
    q.add_argument("--alpha", type=float, default=0.5)
    _add_config_flags(q)

    b = sub.add_parser("bench", help="run the benchmark and emit reports")
    b.add_argument("--objects", required=True)
    b.add_argument("--queries", required=True)
    b.add_argument("--index", default="ssg", help="ssg, ifq, sifq, or a comma list")
    b.add_argument("--rate", type=float, default=4000.0, help="arrival rate, objects/s")
    b.add_argument("--afap", action="store_true", help="stream as fast as possible")
    b.add_argument("--interleave", action="store_true", help="run queries during ingestion")
    b.add_argument("--freq", help="historical frequency table (token<TAB>count)")
    b.add_argument("--verify", type=int, default=0, metavar="N",
                   help="oracle-check every N-th query (1 = all)")
    b.add_argument("--no-filter", action="store_true", help="disable textual pruning")
    b.add_argument("--serial", action="store_true", default=True,
                   help="serialize writer and readers (always on; kept for scripts)")
    b.add_argument("-o", "--out", required=True, help="output path prefix")
    _add_config_flags(b)

    r = sub.add_parser("report", help="render summary CSVs as a table and figures")
    r.add_argument("--summary", nargs="+", required=True, help="summary.csv files")
    r.add_argument("--queries", nargs="*", default=[], metavar="KIND=CSV",
                   help="per-kind query logs, e.g. ssg=run.ssg.queries.csv")
    r.add_argument("--out-dir", required=True)
    return parser


def _cmd_generate(args) -> int:
    bounds = parse_bounds(args.bounds) if args.bounds else DEFAULT_BOUNDS
    spec = SynthSpec(
        count=args.count, zipf_s=args.zipf_s, term_universe=args.terms,
        spatial=args.spatial, seed=args.seed, bounds=bounds,
        mean_terms=args.mean_terms, mean_gap_ms=args.mean_gap_ms,
        clusters=args.clusters, start_t=args.start_t,
    )
    write_object_file(args.out, generate_objects(spec))
    print(f"wrote {args.count} objects to {args.out}")
    return EXIT_OK


def _cmd_workload(args) -> int:
    rows = read_object_file(args.objects)
    spec = WorkloadSpec(query_count=args.queries, l=args.l, k=args.k,
                        alpha=args.alpha, seed=args.seed)
    write_query_file(args.out, build_workload(rows, spec))
    print(f"wrote {args.queries} queries to {args.out}")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    cfg = _config_from_args(args)
    rows = read_object_file(args.objects)
    vocab = Vocabulary()
    index = build_index(args.index, cfg, rows, vocab, freq_path=args.freq)
    from .bench import history_token_counts

    for row in rows:
        index.insert(object_from_row(row, vocab))
    for key, value in index.stats().as_dict().items():
        print(f"{key}={value}")
    if args.image_out:
        os.makedirs(args.image_out, exist_ok=True)
        shutil.copyfile(args.objects, os.path.join(args.image_out, "objects.tsv"))
        freq_dest = os.path.join(args.image_out, "freq.tsv")
        if args.freq:
            shutil.copyfile(args.freq, freq_dest)
        else:
            dump_frequency_file(freq_dest, dict(history_token_counts(rows)))
        with open(os.path.join(args.image_out, "config.kv"), "w", encoding="utf-8") as fh:
            fh.write(f"B={cfg.B}\nu={cfg.u}\nm={cfg.m}\nseed={cfg.seed}\n")
            fh.write(f"n={cfg.n}\nc={cfg.c}\nmaxDepth={cfg.maxDepth}\nP={cfg.P}\nW={cfg.W}\n")
            fh.write(f"bounds={cfg.bounds.min_x},{cfg.bounds.min_y},{cfg.bounds.max_x},{cfg.bounds.max_y}\n")
        with open(os.path.join(args.image_out, "index.kv"), "w", encoding="utf-8") as fh:
            fh.write(f"kind={args.index}\n")
        print(f"image={args.image_out}")
    return EXIT_OK


def _cmd_query(args) -> int:
    freq_path = args.freq
    if args.image:
        cfg = load_config_file(os.path.join(args.image, "config.kv"))
        objects_path = os.path.join(args.image, "objects.tsv")
        image_freq = os.path.join(args.image, "freq.tsv")
        if freq_path is None and os.path.exists(image_freq):
            freq_path = image_freq
        kind = args.index
        kind_file = os.path.join(args.image, "index.kv")
        if os.path.exists(kind_file):
            with open(kind_file, encoding="utf-8") as fh:
                for line in fh:
                    if line.startswith("kind="):
                        kind = line.strip().split("=", 1)[1]
    else:
        cfg = _config_from_args(args)
        objects_path = args.objects
        kind = args.index
    rows = read_object_file(objects_path)
    vocab = Vocabulary()
    index = build_index(kind, cfg, rows, vocab, freq_path=freq_path)
    for row in rows:
        index.insert(object_from_row(row, vocab))

    tokens = tuple(args.keywords.split())
    if not tokens:
        raise UsageError("--keywords must contain at least one token")
    try:
        x, y = (float(v) for v in args.loc.split(","))
    except ValueError as exc:
        raise UsageError(f"--loc must be x,y: {exc}") from exc
    if not cfg.bounds.contains(x, y):
        raise UsageError(f"query location ({x}, {y}) outside bounds {cfg.bounds}")
    qt = args.t if args.t is not None else (index.newest_t() or 0)
    q = query_from_row((0, qt, x, y, args.k, args.alpha, tokens), vocab)
    results, trace = search_top_k(index, q)
    print("rank\toid\tscore\tt")
    for rank, r in enumerate(results, 1):
        print(f"{rank}\t{r.oid}\t{r.score:.6f}\t{r.t}")
    print(
        f"# nodes_accessed={trace.nodes_accessed} objects_scored={trace.objects_scored} "
        f"signature_rejections={trace.signature_rejections} segments_opened={trace.segments_opened}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_bench(args) -> int:
    kinds = [k.strip() for k in args.index.split(",") if k.strip()]
    for kind in kinds:
        if kind not in INDEX_KINDS:
            raise UsageError(f"unknown index kind {kind!r}")
    cfg = _config_from_args(args)
    rows = read_object_file(args.objects)
    query_rows = read_query_file(args.queries)
    rate = None if args.afap else args.rate

    failures = 0
    combined: list[list[str]] = []
    for kind in kinds:
        report, outcomes = run_bench(
            rows, query_rows, kind, cfg,
            rate=rate, interleave=args.interleave,
            verify_every=args.verify, use_filter=not args.no_filter,
            freq_path=args.freq,
        )
        prefix = f"{args.out}.{kind}" if len(kinds) > 1 else args.out
        paths = write_outputs(prefix, report, outcomes)
        combined.append(summary_row(report))
        print(f"[{kind}] inserts/s={report.inserts_per_s:.0f} "
              f"mean_latency_us={report.mean_latency_us:.1f} "
              f"mean_nodes={report.mean_nodes_accessed:.1f} "
              f"textual_bytes={report.stats.get('textual_bytes')} "
              f"mismatches={len(report.mismatches)}")
        if report.mismatches:
            failures += len(report.mismatches)
            for mm in report.mismatches[:5]:
                print(f"  mismatch qid={mm.qid}: got={mm.got} expected={mm.expected}",
                      file=sys.stderr)
            print(f"  details in {paths['report']}", file=sys.stderr)
    if len(kinds) > 1:
        with open(f"{args.out}.summary.csv", "w", encoding="utf-8") as fh:
            fh.write(",".join(SUMMARY_COLUMNS) + "\n")
            for row in combined:
                fh.write(",".join(row) + "\n")
    return EXIT_VERIFY if failures else EXIT_OK


def _cmd_report(args) -> int:
    rows = read_summary(args.summary)
    if not rows:
        raise UsageError("summary files contain no rows")
    logs = {}
    for spec in args.queries:
        kind, _, path = spec.partition("=")
        if not path:
            raise UsageError(f"--queries entries must be KIND=CSV, got {spec!r}")
        logs[kind] = read_query_log(path)
    table = render_table(rows)
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "table.txt"), "w", encoding="utf-8") as fh:
        fh.write(table + "\n")
    figures = render_figures(rows, args.out_dir, logs or None)
    print(table)
    for path in figures:
        print(f"figure: {path}")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "workload": _cmd_workload,
    "ingest": _cmd_ingest,
    "query": _cmd_query,
    "bench": _cmd_bench,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
