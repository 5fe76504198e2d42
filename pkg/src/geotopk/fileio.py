"""File formats and the vocabulary builder.

Object files are TSV: ``oid<TAB>t_millis<TAB>x<TAB>y<TAB>token token ...``.
Query files are TSV: ``qid<TAB>t_millis<TAB>x<TAB>y<TAB>k<TAB>alpha<TAB>token token ...``.
Tokens are raw; the vocabulary assigns dense integer ids in first-seen
order, and term-id lists are stored sorted ascending with duplicates
removed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import GeoTextualObject, TskQuery


class ParseError(ValueError):
    """Malformed input file."""


@dataclass(slots=True)
class Vocabulary:
    """Token -> dense TermId, assigned in first-seen order."""

    _ids: dict[str, int] = field(default_factory=dict)
    _tokens: list[str] = field(default_factory=list)

    def get_or_add(self, token: str) -> int:
        tid = self._ids.get(token)
        if tid is None:
            tid = len(self._tokens)
            self._ids[token] = tid
            self._tokens.append(token)
        return tid

    def get(self, token: str) -> int | None:
        return self._ids.get(token)

    def token(self, tid: int) -> str:
        return self._tokens[tid]

    def __len__(self) -> int:
        return len(self._tokens)

    def term_ids(self, tokens) -> tuple[int, ...]:
        """Sorted duplicate-free term ids for a token sequence."""
        return tuple(sorted({self.get_or_add(tok) for tok in tokens}))


ObjectRow = tuple[int, int, float, float, tuple[str, ...]]
QueryRow = tuple[int, int, float, float, int, float, tuple[str, ...]]


def format_object_row(row: ObjectRow) -> str:
    oid, t, x, y, tokens = row
    return f"{oid}\t{t}\t{x:.6f}\t{y:.6f}\t{' '.join(tokens)}\n"


def parse_object_line(line: str, lineno: int = 0) -> ObjectRow:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 5:
        raise ParseError(f"line {lineno}: expected 5 tab-separated fields, got {len(parts)}")
    try:
        oid = int(parts[0])
        t = int(parts[1])
        x = float(parts[2])
        y = float(parts[3])
    except ValueError as exc:
        raise ParseError(f"line {lineno}: {exc}") from exc
    tokens = tuple(tok for tok in parts[4].split(" ") if tok)
    if not tokens:
        raise ParseError(f"line {lineno}: object {oid} has no terms")
    return (oid, t, x, y, tokens)


def read_object_file(path) -> list[ObjectRow]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                rows.append(parse_object_line(line, lineno))
    return rows


def write_object_file(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(format_object_row(row))


def format_query_row(row: QueryRow) -> str:
    qid, t, x, y, k, alpha, tokens = row
    return f"{qid}\t{t}\t{x:.6f}\t{y:.6f}\t{k}\t{alpha:g}\t{' '.join(tokens)}\n"


def parse_query_line(line: str, lineno: int = 0) -> QueryRow:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 7:
        raise ParseError(f"line {lineno}: expected 7 tab-separated fields, got {len(parts)}")
    try:
        qid = int(parts[0])
        t = int(parts[1])
        x = float(parts[2])
        y = float(parts[3])
        k = int(parts[4])
        alpha = float(parts[5])
    except ValueError as exc:
        raise ParseError(f"line {lineno}: {exc}") from exc
    tokens = tuple(tok for tok in parts[6].split(" ") if tok)
    if not tokens:
        raise ParseError(f"line {lineno}: query {qid} has no keywords")
    return (qid, t, x, y, k, alpha, tokens)


def read_query_file(path) -> list[QueryRow]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                rows.append(parse_query_line(line, lineno))
    return rows


def write_query_file(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(format_query_row(row))


def object_from_row(row: ObjectRow, vocab: Vocabulary) -> GeoTextualObject:
    oid, t, x, y, tokens = row
    return GeoTextualObject(oid=oid, terms=vocab.term_ids(tokens), x=x, y=y, t=t)


def query_from_row(row: QueryRow, vocab: Vocabulary) -> TskQuery:
    qid, t, x, y, k, alpha, tokens = row
    return TskQuery(terms=vocab.term_ids(tokens), x=x, y=y, t=t, k=k, alpha=alpha)


STOPLIST_DEFAULT = frozenset(
    "a an and are as at be by for from has he in is it its of on or that the to was were will with".split()
)


def tokenize(text: str, stoplist=STOPLIST_DEFAULT) -> tuple[str, ...]:
    """Lowercase, split on non-alphanumerics, drop short tokens and stopwords.

    Only used when ingesting raw text; synthetic corpora are pre-tokenized.
    """
    out = []
    word = []
    for ch in text.lower():
        if ch.isalnum():
            word.append(ch)
        elif word:
            tok = "".join(word)
            if len(tok) >= 2 and tok not in stoplist:
                out.append(tok)
            word = []
    if word:
        tok = "".join(word)
        if len(tok) >= 2 and tok not in stoplist:
            out.append(tok)
    return tuple(out)
