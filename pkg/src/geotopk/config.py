"""Run configuration: key=value files, defaults, and index construction.

Recognized keys (also exposed 1:1 as CLI flags): B, u, m, seed, n, c,
maxDepth, P, W, bounds.  ``bounds`` is ``minX,minY,maxX,maxY``.  P is the
segment capacity (objects per window) and W the retention (maximum sealed
objects; the paper-scale values are 400000 and 5000000, the desk defaults
50000 and 500000).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .baselines import InvertedQuadtreeIndex, SegmentedInvertedIndex
from .core import DomainError, Rect
from .gridtree import GridConfig
from .signature import BlockLayout, FrequencyTable, SignatureConfig, build_block_layout
from .stream import SegmentedSignatureIndex

INDEX_KINDS = ("ssg", "ifq", "sifq")


@dataclass(frozen=True, slots=True)
class RunConfig:
    B: int = 512
    u: int = 2
    m: int = 2
    seed: int = 1
    n: int = 2
    c: int = 100
    maxDepth: int = 12
    P: int = 50_000
    W: int = 500_000
    bounds: Rect = Rect(0.0, 0.0, 100.0, 100.0)

    def signature_config(self) -> SignatureConfig:
        return SignatureConfig(bits=self.B, blocks=self.u, hashes=self.m, seed=self.seed)

    def grid_config(self) -> GridConfig:
        return GridConfig(fanout=self.n, leaf_capacity=self.c, max_depth=self.maxDepth)


def parse_bounds(text: str) -> Rect:
    parts = text.split(",")
    if len(parts) != 4:
        raise DomainError(f"bounds must be minX,minY,maxX,maxY, got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise DomainError(f"bounds must be numeric: {text!r}") from exc
    return Rect(*vals)


_INT_KEYS = ("B", "u", "m", "seed", "n", "c", "maxDepth", "P", "W")


def load_config_file(path, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key in _INT_KEYS:
                try:
                    overrides[key] = int(value)
                except ValueError as exc:
                    raise DomainError(f"{path}:{lineno}: {key} must be an integer") from exc
            elif key == "bounds":
                overrides[key] = parse_bounds(value)
            else:
                raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
    return replace(cfg, **overrides)


def apply_overrides(cfg: RunConfig, **kv) -> RunConfig:
    provided = {k: v for k, v in kv.items() if v is not None}
    if "bounds" in provided and isinstance(provided["bounds"], str):
        provided["bounds"] = parse_bounds(provided["bounds"])
    return replace(cfg, **provided)


def make_index(kind: str, cfg: RunConfig, layout: BlockLayout | None = None):
    """Build an empty index of the requested kind.

    The signature index needs a block layout; pass the one built from the
    historical frequency sample, or None for the degenerate single-block
    fallback (empty frequency table).
    """
    if kind == "ssg":
        if layout is None:
            layout = build_block_layout(FrequencyTable({}, 0), cfg.signature_config())
        return SegmentedSignatureIndex(
            bounds=cfg.bounds,
            sig_cfg=cfg.signature_config(),
            grid_cfg=cfg.grid_config(),
            layout=layout,
            segment_capacity=cfg.P,
            retention=cfg.W,
        )
    if kind == "ifq":
        return InvertedQuadtreeIndex(
            bounds=cfg.bounds, grid_cfg=cfg.grid_config(), retention=cfg.W
        )
    if kind == "sifq":
        return SegmentedInvertedIndex(
            bounds=cfg.bounds,
            grid_cfg=cfg.grid_config(),
            segment_capacity=cfg.P,
            retention=cfg.W,
        )
    raise DomainError(f"unknown index kind {kind!r}; expected one of {INDEX_KINDS}")
