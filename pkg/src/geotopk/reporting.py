"""Turn benchmark CSV output into a readable table and comparison figures.

Figures are rendered to PNG files next to the delimited output; the table
goes to stdout (and table.txt) so runs can be eyeballed without tooling.
"""
from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

TABLE_COLUMNS = (
    ("kind", "index"),
    ("objects", "objects"),
    ("inserts_per_s", "ins/s"),
    ("mean_latency_us", "lat mean us"),
    ("p95_latency_us", "lat p95 us"),
    ("mean_nodes_accessed", "nodes/query"),
    ("textual_bytes", "textual B"),
    ("total_bytes", "total B"),
    ("empty_result_rate", "empty rate"),
    ("mismatch_count", "mismatch"),
)


def read_summary(paths) -> list[dict]:
    rows: list[dict] = []
    for path in paths:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows.extend(csv.DictReader(fh))
    return rows


def read_query_log(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(value: str) -> str:
    try:
        f = float(value)
    except (TypeError, ValueError):
        return str(value)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return f"{f:.3f}"


def render_table(rows: list[dict]) -> str:
    headers = [label for _, label in TABLE_COLUMNS]
    grid = [headers]
    for row in rows:
        grid.append([_fmt(row.get(key, "")) for key, _ in TABLE_COLUMNS])
    widths = [max(len(r[i]) for r in grid) for i in range(len(headers))]
    lines = []
    for gi, r in enumerate(grid):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
        if gi == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _bar_figure(rows: list[dict], key: str, title: str, ylabel: str, path: str) -> None:
    kinds = [r["kind"] for r in rows]
    values = [float(r.get(key, 0) or 0) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(kinds, values, color=["#4878cf", "#e8795b", "#6acc65"][: len(kinds)])
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_figures(rows: list[dict], out_dir: str, query_logs: dict[str, list[dict]] | None = None) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    made: list[str] = []

    for key, title, ylabel, fname in (
        ("inserts_per_s", "Insertion throughput", "objects/s", "throughput.png"),
        ("mean_latency_us", "Mean query latency", "microseconds", "latency_mean.png"),
        ("p95_latency_us", "p95 query latency", "microseconds", "latency_p95.png"),
        ("mean_nodes_accessed", "Node accesses per query", "nodes", "nodes_accessed.png"),
        ("textual_bytes", "Textual structure memory", "bytes", "textual_bytes.png"),
        ("total_bytes", "Total estimated memory", "bytes", "total_bytes.png"),
    ):
        path = os.path.join(out_dir, fname)
        _bar_figure(rows, key, title, ylabel, path)
        made.append(path)

    if query_logs:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        for kind, log in sorted(query_logs.items()):
            lats = sorted(float(r["latency_us"]) for r in log)
            frac = [i / len(lats) for i in range(1, len(lats) + 1)]
            ax.plot(lats, frac, label=kind)
        ax.set_xlabel("query latency (us)")
        ax.set_ylabel("fraction of queries")
        ax.set_title("Latency distribution")
        ax.legend()
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, "latency_cdf.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        made.append(path)

        fig, ax = plt.subplots(figsize=(5, 3.2))
        for kind, log in sorted(query_logs.items()):
            nodes = sorted(int(r["nodes_accessed"]) for r in log)
            frac = [i / len(nodes) for i in range(1, len(nodes) + 1)]
            ax.plot(nodes, frac, label=kind)
        ax.set_xlabel("nodes accessed")
        ax.set_ylabel("fraction of queries")
        ax.set_title("Per-query node accesses")
        ax.legend()
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, "nodes_cdf.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        made.append(path)

    return made
