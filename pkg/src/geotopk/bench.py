"""Benchmark driver: ingest a stream, run a query workload, emit a report.

The first 10% of the stream is the historical sample that estimates term
frequencies (the signature block layout is built from it before indexing
begins); the whole stream is then indexed.  Queries run after ingestion or
interleaved with it.  With verification enabled, sampled queries are
re-answered by the brute-force oracle over the retained set and any
mismatch fails the run.

Writer and readers are serialized, which trivially satisfies the snapshot
contract; ``--serial`` in the CLI is therefore the default and the only
mode, kept as a flag for compatibility with scripted runs.
"""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

from .config import RunConfig, make_index
from .core import DomainError, TskQuery
from .fileio import ObjectRow, QueryRow, Vocabulary, object_from_row, query_from_row
from .search import SearchTrace, brute_force_topk, search_top_k
from .signature import FrequencyTable, build_block_layout, load_frequency_file

HISTORY_FRACTION = 0.1


@dataclass(slots=True)
class QueryOutcome:
    qid: int
    latency_us: float
    result_oids: tuple[int, ...]
    result_scores: tuple[float, ...]
    trace: SearchTrace


@dataclass(slots=True)
class Mismatch:
    qid: int
    query: TskQuery
    got: tuple[int, ...]
    expected: tuple[int, ...]


@dataclass(slots=True)
class BenchReport:
    kind: str
    objects: int
    inserted: int
    insert_seconds: float
    inserts_per_s: float
    max_lag_ms: float
    queries: int
    mean_latency_us: float
    p95_latency_us: float
    mean_nodes_accessed: float
    total_nodes_accessed: int
    total_objects_scored: int
    total_signature_rejections: int
    total_segments_opened: int
    empty_results: int
    empty_result_rate: float
    verified: int
    mismatches: list[Mismatch] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    note: str = ""

    def kv_lines(self) -> list[str]:
        lines = [f"note={self.note}"] if self.note else []
        skip = {"mismatches", "stats", "config", "note"}
        for name in (
            "kind", "objects", "inserted", "insert_seconds", "inserts_per_s",
            "max_lag_ms", "queries", "mean_latency_us", "p95_latency_us",
            "mean_nodes_accessed", "total_nodes_accessed", "total_objects_scored",
            "total_signature_rejections", "total_segments_opened",
            "empty_results", "empty_result_rate", "verified",
        ):
            if name not in skip:
                lines.append(f"{name}={getattr(self, name)}")
        lines.append(f"mismatch_count={len(self.mismatches)}")
        for key, value in self.stats.items():
            lines.append(f"stats.{key}={value}")
        for key, value in self.config.items():
            lines.append(f"config.{key}={value}")
        return lines


SUMMARY_COLUMNS = (
    "kind", "objects", "inserted", "inserts_per_s", "max_lag_ms", "queries",
    "mean_latency_us", "p95_latency_us", "mean_nodes_accessed",
    "total_nodes_accessed", "total_objects_scored", "total_signature_rejections",
    "total_segments_opened", "empty_result_rate", "verified", "mismatch_count",
    "textual_bytes", "node_bytes", "object_bytes", "total_bytes",
)


def summary_row(report: BenchReport) -> list[str]:
    vals = {
        **{c: getattr(report, c) for c in SUMMARY_COLUMNS if hasattr(report, c)},
        "mismatch_count": len(report.mismatches),
        "textual_bytes": report.stats.get("textual_bytes", 0),
        "node_bytes": report.stats.get("node_bytes", 0),
        "object_bytes": report.stats.get("object_bytes", 0),
        "total_bytes": report.stats.get("total_bytes", 0),
    }
    return [str(vals[c]) for c in SUMMARY_COLUMNS]


def history_token_counts(rows: list[ObjectRow]) -> Counter:
    """Token counts over the stream's 10% prefix (the historical sample)."""
    prefix = rows[: max(1, int(len(rows) * HISTORY_FRACTION))]
    counts: Counter = Counter()
    for _, _, _, _, tokens in prefix:
        counts.update(tokens)
    return counts


def build_history(rows: list[ObjectRow], vocab: Vocabulary) -> FrequencyTable:
    """Frequency table from the stream's 10% prefix, ids in first-seen order."""
    counts = history_token_counts(rows)
    return FrequencyTable.from_counts({vocab.get_or_add(tok): c for tok, c in counts.items()})


def build_index(kind: str, cfg: RunConfig, rows: list[ObjectRow], vocab: Vocabulary,
                freq_path=None):
    """Build an empty index; the block layout comes from ``freq_path`` when
    given, otherwise from the stream's own prefix."""
    if freq_path is not None:
        freq = load_frequency_file(freq_path, vocab)
    else:
        freq = build_history(rows, vocab)
    layout = build_block_layout(freq, cfg.signature_config())
    return make_index(kind, cfg, layout)


def run_bench(
    rows: list[ObjectRow],
    query_rows: list[QueryRow],
    kind: str,
    cfg: RunConfig,
    *,
    rate: float | None = 4000.0,
    interleave: bool = False,
    verify_every: int = 0,
    use_filter: bool = True,
    freq_path=None,
) -> tuple[BenchReport, list[QueryOutcome]]:
    """Run one benchmark; ``rate=None`` streams as fast as possible.

    ``verify_every=n`` checks every n-th query against the oracle (1 checks
    all, 0 disables verification).
    """
    if rate is not None and rate <= 0:
        raise DomainError(f"arrival rate must be positive, got {rate}")
    vocab = Vocabulary()
    index = build_index(kind, cfg, rows, vocab, freq_path=freq_path)

    outcomes: list[QueryOutcome] = []
    mismatches: list[Mismatch] = []
    verified = 0

    def run_query(qid: int, qrow: QueryRow) -> None:
        nonlocal verified
        q = query_from_row(qrow, vocab)
        if not cfg.bounds.contains(q.x, q.y):
            raise DomainError(f"query {qid} location outside index bounds")
        t0 = time.perf_counter()
        results, trace = search_top_k(index, q, use_filter=use_filter)
        latency_us = (time.perf_counter() - t0) * 1e6
        outcomes.append(
            QueryOutcome(
                qid=qid,
                latency_us=latency_us,
                result_oids=tuple(r.oid for r in results),
                result_scores=tuple(r.score for r in results),
                trace=trace,
            )
        )
        if verify_every and qid % verify_every == 0:
            expected = brute_force_topk(index.retained_objects(), q, index.context_for(q))
            verified += 1
            if [r.oid for r in expected] != list(outcomes[-1].result_oids):
                mismatches.append(
                    Mismatch(
                        qid=qid,
                        query=q,
                        got=outcomes[-1].result_oids,
                        expected=tuple(r.oid for r in expected),
                    )
                )

    # interleave schedule: query j fires after roughly (j+1)/(Q+1) of the stream
    fire_after = {}
    if interleave and query_rows:
        for j in range(len(query_rows)):
            fire_after.setdefault((j + 1) * len(rows) // (len(query_rows) + 1), []).append(j)

    start = time.perf_counter()
    max_lag = 0.0
    inserted = 0
    for i, row in enumerate(rows):
        if rate is not None:
            due = start + i / rate
            now = time.perf_counter()
            if now < due:
                time.sleep(due - now)
            else:
                max_lag = max(max_lag, (now - due) * 1e3)
        index.insert(object_from_row(row, vocab))
        inserted += 1
        for j in fire_after.get(inserted, ()):
            run_query(j, query_rows[j])
    insert_seconds = time.perf_counter() - start

    if not interleave:
        for j, qrow in enumerate(query_rows):
            run_query(j, qrow)

    latencies = sorted(o.latency_us for o in outcomes)
    nq = len(outcomes)
    empty = sum(1 for o in outcomes if not o.result_oids)
    report = BenchReport(
        kind=kind,
        objects=len(rows),
        inserted=inserted,
        insert_seconds=insert_seconds,
        inserts_per_s=inserted / insert_seconds if insert_seconds > 0 else float("inf"),
        max_lag_ms=max_lag,
        queries=nq,
        mean_latency_us=sum(latencies) / nq if nq else 0.0,
        p95_latency_us=latencies[min(nq - 1, int(0.95 * nq))] if nq else 0.0,
        mean_nodes_accessed=(
            sum(o.trace.nodes_accessed for o in outcomes) / nq if nq else 0.0
        ),
        total_nodes_accessed=sum(o.trace.nodes_accessed for o in outcomes),
        total_objects_scored=sum(o.trace.objects_scored for o in outcomes),
        total_signature_rejections=sum(o.trace.signature_rejections for o in outcomes),
        total_segments_opened=sum(o.trace.segments_opened for o in outcomes),
        empty_results=empty,
        empty_result_rate=empty / nq if nq else 0.0,
        verified=verified,
        mismatches=mismatches,
        stats=index.stats().as_dict(),
        config={
            "B": cfg.B, "u": cfg.u, "m": cfg.m, "seed": cfg.seed, "n": cfg.n,
            "c": cfg.c, "maxDepth": cfg.maxDepth, "P": cfg.P, "W": cfg.W,
            "bounds": f"{cfg.bounds.min_x},{cfg.bounds.min_y},{cfg.bounds.max_x},{cfg.bounds.max_y}",
            "rate": "afap" if rate is None else rate,
            "interleave": interleave,
            "use_filter": use_filter,
        },
        note="synthetic desk-scale corpus (Zipf keywords, ~10 terms/object)",
    )
    return report, outcomes


def write_outputs(prefix, report: BenchReport, outcomes: list[QueryOutcome]) -> dict[str, str]:
    """Emit results.tsv (deterministic), queries.csv (run log), report.txt, summary.csv."""
    prefix = str(prefix)
    paths = {
        "results": prefix + ".results.tsv",
        "queries": prefix + ".queries.csv",
        "report": prefix + ".report.txt",
        "summary": prefix + ".summary.csv",
    }
    with open(paths["results"], "w", encoding="utf-8") as fh:
        fh.write("qid\toids\tscores\tnodes_accessed\tobjects_scored\tsignature_rejections\tsegments_opened\n")
        for o in outcomes:
            oids = ",".join(str(i) for i in o.result_oids)
            scores = ",".join(repr(s) for s in o.result_scores)
            fh.write(
                f"{o.qid}\t{oids}\t{scores}\t{o.trace.nodes_accessed}\t"
                f"{o.trace.objects_scored}\t{o.trace.signature_rejections}\t{o.trace.segments_opened}\n"
            )
    with open(paths["queries"], "w", encoding="utf-8") as fh:
        fh.write("qid,latency_us,result_count,nodes_accessed,objects_scored,signature_rejections,segments_opened\n")
        for o in outcomes:
            fh.write(
                f"{o.qid},{o.latency_us:.3f},{len(o.result_oids)},{o.trace.nodes_accessed},"
                f"{o.trace.objects_scored},{o.trace.signature_rejections},{o.trace.segments_opened}\n"
            )
    with open(paths["report"], "w", encoding="utf-8") as fh:
        for line in report.kv_lines():
            fh.write(line + "\n")
        for mm in report.mismatches:
            fh.write(f"mismatch.qid={mm.qid} query={mm.query} got={mm.got} expected={mm.expected}\n")
    with open(paths["summary"], "w", encoding="utf-8") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        fh.write(",".join(summary_row(report)) + "\n")
    return paths
