"""Frequency superimposed-coding signatures.

A signature is a fixed-width bit array where every term sets ``m`` hashed
bits.  The array is partitioned into blocks sized proportionally to the
aggregate frequency of the terms routed to them, so a handful of hot terms
gets a large sparse block while the long tail is confined to its own bits.
Node signatures are the OR of their descendants'; a query passes a node iff
the query's bits are a subset of the node's.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import DomainError, InvariantViolation, TermId

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


def _mix64(x: int) -> int:
    # splitmix64 finalizer: deterministic across runs and platforms
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX_A) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX_B) & _MASK64
    return x ^ (x >> 31)


def term_hash(term: TermId, seed: int, i: int) -> int:
    """The i-th seeded 64-bit hash of a term; i mixes into the seed."""
    return _mix64((term * 0xD1B54A32D192ED03 + seed + (i + 1) * _GOLDEN) & _MASK64)


@dataclass(frozen=True, slots=True)
class SignatureConfig:
    bits: int = 512        # signature width B
    blocks: int = 2        # frequency block count u: hot block + tail block
    hashes: int = 2        # hash functions per term m
    seed: int = 1

    def __post_init__(self) -> None:
        if self.bits < self.blocks or self.blocks < 1:
            raise DomainError(f"need bits >= blocks >= 1, got B={self.bits} u={self.blocks}")
        if self.hashes < 1:
            raise DomainError(f"need at least one hash function, got m={self.hashes}")


@dataclass(frozen=True, slots=True)
class FrequencyTable:
    """Term frequencies estimated from a historical sample."""

    counts: dict[TermId, int]
    total: int

    @classmethod
    def from_counts(cls, counts: dict[TermId, int]) -> "FrequencyTable":
        return cls(counts=dict(counts), total=sum(counts.values()))


@dataclass(frozen=True, slots=True)
class BlockLayout:
    """Bit-range per frequency block plus the term-to-block routing table."""

    block_count: int
    offsets: tuple[int, ...]
    sizes: tuple[int, ...]
    term_block: dict[TermId, int]
    default_block: int

    def validate(self, width: int) -> None:
        if sum(self.sizes) != width:
            raise InvariantViolation(f"block sizes {self.sizes} do not sum to {width}")
        if any(s < 1 for s in self.sizes):
            raise InvariantViolation(f"zero-width block in {self.sizes}")
        run = 0
        for off, size in zip(self.offsets, self.sizes):
            if off != run:
                raise InvariantViolation("block offsets are not the prefix sums of sizes")
            run += size


@dataclass(frozen=True, slots=True)
class Signature:
    """Fixed-width bit array stored as an int; bit i is position i."""

    bits: int
    width: int

    def popcount(self) -> int:
        return self.bits.bit_count()


def build_block_layout(freq: FrequencyTable, cfg: SignatureConfig) -> BlockLayout:
    """Partition terms into frequency blocks and size each block's bit range.

    Terms sorted by descending frequency are grouped greedily: a group closes
    once its running sum reaches total/u (keeping at least one term for every
    later group).  Block i gets round((group_freq_i / total) * B) bits via
    largest-remainder apportionment, corrected so sizes sum to B and every
    block keeps at least one bit.  Unknown terms route to the last (lowest
    frequency) block.
    """
    width = cfg.bits
    if not freq.counts or freq.total <= 0:
        return BlockLayout(1, (0,), (width,), {}, 0)

    terms_desc = sorted(freq.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    u = min(cfg.blocks, len(terms_desc))
    target = freq.total / u

    groups: list[list[TermId]] = []
    group_freqs: list[int] = []
    cur: list[TermId] = []
    cur_sum = 0
    for idx, (term, count) in enumerate(terms_desc):
        cur.append(term)
        cur_sum += count
        terms_left = len(terms_desc) - idx - 1
        groups_needed = u - len(groups) - 1
        if len(groups) < u - 1 and terms_left >= groups_needed:
            if cur_sum >= target or terms_left == groups_needed:
                groups.append(cur)
                group_freqs.append(cur_sum)
                cur = []
                cur_sum = 0
    groups.append(cur)
    group_freqs.append(cur_sum)

    sizes = _apportion(group_freqs, freq.total, width)

    term_block: dict[TermId, int] = {}
    for bi, group in enumerate(groups):
        for term in group:
            term_block[term] = bi
    offsets = []
    run = 0
    for s in sizes:
        offsets.append(run)
        run += s
    return BlockLayout(u, tuple(offsets), tuple(sizes), term_block, u - 1)


def _apportion(freqs: list[int], total: int, width: int) -> list[int]:
    """Largest-remainder split of ``width`` bits proportional to ``freqs``, min 1 each."""
    quotas = [f / total * width for f in freqs]
    sizes = [int(q) for q in quotas]
    remainders = sorted(
        range(len(freqs)), key=lambda i: (-(quotas[i] - sizes[i]), i)
    )
    short = width - sum(sizes)
    for i in range(short):
        sizes[remainders[i % len(freqs)]] += 1
    # every block keeps at least one bit: steal from the largest
    for i, s in enumerate(sizes):
        if s < 1:
            donor = max(range(len(sizes)), key=lambda j: (sizes[j], -j))
            if sizes[donor] <= 1:
                raise InvariantViolation("cannot give every block a bit")
            sizes[donor] -= 1
            sizes[i] += 1
    return sizes


def term_bit_positions(term: TermId, layout: BlockLayout, cfg: SignatureConfig) -> list[int]:
    """The m bit positions a term sets, all inside its block (collisions legal)."""
    blk = layout.term_block.get(term, layout.default_block)
    off = layout.offsets[blk]
    size = layout.sizes[blk]
    seed = cfg.seed
    return [off + term_hash(term, seed, i) % size for i in range(cfg.hashes)]


def object_signature(terms, layout: BlockLayout, cfg: SignatureConfig) -> Signature:
    """Signature of a term set: the OR of all terms' bit positions."""
    bits = 0
    for term in terms:
        for pos in term_bit_positions(term, layout, cfg):
            bits |= 1 << pos
    return Signature(bits, cfg.bits)


def superimpose(a: Signature, b: Signature) -> Signature:
    """Bitwise OR of two equal-width signatures."""
    if a.width != b.width:
        raise InvariantViolation(f"signature width mismatch: {a.width} != {b.width}")
    return Signature(a.bits | b.bits, a.width)


def subset_test(query_sig: Signature, node_sig: Signature) -> bool:
    """True iff every set bit of the query signature is set in the node signature."""
    if query_sig.width != node_sig.width:
        raise InvariantViolation(f"signature width mismatch: {query_sig.width} != {node_sig.width}")
    return query_sig.bits & ~node_sig.bits == 0


@dataclass(slots=True)
class SignatureFactory:
    """Caches per-term bit masks so object signatures are a few dict hits.

    Produces the same bits as :func:`object_signature`; the cache is an
    optimization for the insert path, not a second code path (tested for
    equality).
    """

    layout: BlockLayout
    cfg: SignatureConfig
    _masks: dict[TermId, int] = field(default_factory=dict)

    def term_mask(self, term: TermId) -> int:
        mask = self._masks.get(term)
        if mask is None:
            mask = 0
            for pos in term_bit_positions(term, self.layout, self.cfg):
                mask |= 1 << pos
            self._masks[term] = mask
        return mask

    def terms_bits(self, terms) -> int:
        bits = 0
        masks = self._masks
        lookup = masks.get
        for term in terms:
            mask = lookup(term)
            if mask is None:
                mask = self.term_mask(term)
            bits |= mask
        return bits

    def signature(self, terms) -> Signature:
        return Signature(self.terms_bits(terms), self.cfg.bits)


def load_frequency_file(path, vocabulary) -> FrequencyTable:
    """Read a `token<TAB>count` file, registering tokens in file order."""
    counts: dict[TermId, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                token, raw = line.split("\t")
                count = int(raw)
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: expected `token<TAB>count`") from exc
            if count < 0:
                raise DomainError(f"{path}:{lineno}: negative count")
            counts[vocabulary.get_or_add(token)] = count
    return FrequencyTable(counts=counts, total=sum(counts.values()))


def dump_frequency_file(path, counts_by_token: dict[str, int]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for token, count in counts_by_token.items():
            fh.write(f"{token}\t{count}\n")
