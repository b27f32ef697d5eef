"""
Core corpus types, the IOB2 codec and the token-per-line column format.

Column files are UTF-8 with one token per line and TAB-separated columns::

    surface  lemma  pos  chunk  [tag]

Sentences end with a blank line.  A document starts with a line
``-DOCSTART- <id>`` that may be followed by one ``# key=value ...`` metadata
line (keys ``source``, ``topic``, ``time``).  The tag column is optional, but
all tokens of a sentence must agree on whether it is present.
"""
from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

__all__ = [
    "EntityType", "Tag", "O", "LABELS", "Token", "Sentence", "Document", "DocMeta",
    "EntitySpan", "IOBError", "ColumnFormatError", "parse_tag", "parse_tags",
    "is_valid_iob", "encode_iob", "decode_iob", "repair_iob", "read_column_file",
    "write_column_file", "parse_columns", "format_columns", "corpus_stats",
    "CorpusStats", "TypeStats",
]


class EntityType(str, enum.Enum):
    PER = "PER"
    LOC = "LOC"
    ORG = "ORG"
    DAT = "DAT"
    TIM = "TIM"
    PCT = "PCT"
    MON = "MON"

    def __str__(self):
        return self.value

    @property
    def rank(self) -> int:
        """Position in the fixed type order PER < LOC < ORG < DAT < TIM < PCT < MON."""
        return _TYPE_RANK[self]


_TYPE_RANK = {t: i for i, t in enumerate(EntityType)}


@dataclass(frozen=True)
class Tag:
    """One IOB2 label: ``O``, ``B-XXX`` or ``I-XXX``."""

    prefix: str
    etype: Optional[EntityType] = None

    def __post_init__(self):
        if self.prefix == "O":
            if self.etype is not None:
                raise ValueError("O tag carries no entity type")
        elif self.prefix in ("B", "I"):
            if not isinstance(self.etype, EntityType):
                raise ValueError(f"{self.prefix} tag needs an entity type")
        else:
            raise ValueError(f"bad tag prefix {self.prefix!r}")

    def __str__(self):
        return "O" if self.prefix == "O" else f"{self.prefix}-{self.etype.value}"

    def __repr__(self):
        return f"Tag({str(self)!r})"

    @property
    def is_outside(self) -> bool:
        return self.prefix == "O"


O = Tag("O")
LABELS: tuple[Tag, ...] = (O,) + tuple(
    Tag(p, t) for t in EntityType for p in ("B", "I")
)
_TAG_CACHE = {str(t): t for t in LABELS}


def parse_tag(text: str) -> Tag:
    try:
        return _TAG_CACHE[text]
    except KeyError:
        raise ValueError(f"unparsable tag {text!r}") from None


def parse_tags(items: Iterable[str | Tag] | str) -> list[Tag]:
    """Parse tag strings; a single string is split on whitespace."""
    if isinstance(items, str):
        items = items.split()
    return [t if isinstance(t, Tag) else parse_tag(t) for t in items]


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str = ""
    pos: str = ""
    chunk: str = ""

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        if any(ch.isspace() for ch in self.surface):
            raise ValueError(f"token surface contains whitespace: {self.surface!r}")


class IOBError(ValueError):
    """Invalid IOB2 sequence or span set; ``index`` locates the first offender."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    gold_tags: Optional[tuple[Tag, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.gold_tags is not None:
            tags = tuple(self.gold_tags)
            object.__setattr__(self, "gold_tags", tags)
            if len(tags) != len(self.tokens):
                raise ValueError(
                    f"{len(tags)} tags for {len(self.tokens)} tokens"
                )
            check_iob(tags)

    def __len__(self):
        return len(self.tokens)

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def with_tags(self, tags: Optional[Sequence[Tag]]) -> "Sentence":
        return Sentence(self.tokens, None if tags is None else tuple(tags))

    @classmethod
    def from_words(cls, words, tags=None, pos=None) -> "Sentence":
        """Convenience constructor: surfaces (str or list), optional tags and POS."""
        if isinstance(words, str):
            words = words.split()
        if pos is None:
            pos = [""] * len(words)
        elif isinstance(pos, str):
            pos = pos.split()
        tokens = [Token(w, w, p, "") for w, p in zip(words, pos)]
        return cls(tuple(tokens), None if tags is None else tuple(parse_tags(tags)))


@dataclass(frozen=True)
class DocMeta:
    source: str = ""
    topic: str = ""
    timestamp: Optional[int] = None


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[Sentence, ...] = ()
    meta: Optional[DocMeta] = None

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if not self.id or any(ch.isspace() for ch in self.id):
            raise ValueError(f"bad document id {self.id!r}")


@dataclass(frozen=True)
class EntitySpan:
    """Half-open token span ``[start, end)`` of one entity."""

    sentence_index: int
    start: int
    end: int
    etype: EntityType

    def __post_init__(self):
        if self.sentence_index < 0 or not 0 <= self.start < self.end:
            raise ValueError(f"bad span bounds {self}")

    def __len__(self):
        return self.end - self.start

    def sort_key(self):
        return (self.sentence_index, self.start, self.end, self.etype.rank)


# -- IOB2 codec ---------------------------------------------------------------

def _first_invalid(tags: Sequence[Tag]) -> Optional[int]:
    prev = O
    for i, tag in enumerate(tags):
        if tag.prefix == "I" and (prev.prefix == "O" or prev.etype is not tag.etype):
            return i
        prev = tag
    return None


def is_valid_iob(tags: Sequence[Tag]) -> bool:
    return _first_invalid(tags) is None


def check_iob(tags: Sequence[Tag]) -> None:
    i = _first_invalid(tags)
    if i is not None:
        prev = tags[i - 1] if i else None
        raise IOBError(
            f"invalid IOB2 at index {i}: {tags[i]} follows {prev if prev else 'sentence start'}",
            index=i,
        )


def encode_iob(spans: Sequence[EntitySpan], sentence_len: int) -> list[Tag]:
    tags = [O] * sentence_len
    prev_end = 0
    for span in spans:
        if span.end > sentence_len:
            raise IOBError(f"span {span} exceeds sentence length {sentence_len}", index=span.start)
        if span.start < prev_end:
            raise IOBError(f"span {span} overlaps or is out of order", index=span.start)
        tags[span.start] = Tag("B", span.etype)
        for i in range(span.start + 1, span.end):
            tags[i] = Tag("I", span.etype)
        prev_end = span.end
    return tags


def decode_iob(tags: Sequence[Tag], sentence_index: int = 0) -> list[EntitySpan]:
    check_iob(tags)
    spans = []
    start = None
    for i, tag in enumerate(tags):
        if tag.prefix != "I" and start is not None:
            spans.append(EntitySpan(sentence_index, start, i, tags[start].etype))
            start = None
        if tag.prefix == "B":
            start = i
    if start is not None:
        spans.append(EntitySpan(sentence_index, start, len(tags), tags[start].etype))
    return spans


def repair_iob(tags: Sequence[Tag]) -> list[Tag]:
    """Promote every I-X that does not continue an X entity to B-X."""
    out = []
    prev = O
    for tag in tags:
        if tag.prefix == "I" and (prev.prefix == "O" or prev.etype is not tag.etype):
            tag = Tag("B", tag.etype)
        out.append(tag)
        prev = tag
    return out


# -- column files -------------------------------------------------------------

class ColumnFormatError(ValueError):
    def __init__(self, message, line=None, path=None):
        where = f"{path or '<input>'}:{line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.path = path


_META_RE = re.compile(r"(source|topic|time)=(.*?)(?=\s+(?:source|topic|time)=|\s*$)")


def _parse_meta(text: str, lineno: int) -> DocMeta:
    fields = {}
    pos = 0
    body = text.strip()
    for m in _META_RE.finditer(body):
        if body[pos:m.start()].strip():
            raise ColumnFormatError(f"bad metadata line {text!r}", lineno)
        fields[m.group(1)] = m.group(2)
        pos = m.end()
    if body[pos:].strip() or not fields:
        raise ColumnFormatError(f"bad metadata line {text!r}", lineno)
    ts = fields.get("time")
    if ts is not None:
        try:
            ts = int(ts)
        except ValueError:
            raise ColumnFormatError(f"metadata time is not an integer: {ts!r}", lineno) from None
    return DocMeta(fields.get("source", ""), fields.get("topic", ""), ts)


def _format_meta(meta: DocMeta) -> str:
    parts = []
    if meta.source:
        parts.append(f"source={meta.source}")
    if meta.topic:
        parts.append(f"topic={meta.topic}")
    if meta.timestamp is not None:
        parts.append(f"time={meta.timestamp}")
    return "# " + " ".join(parts) if parts else ""


def parse_columns(text: str, path=None, default_doc_id: str = "doc0") -> list[Document]:
    """Parse column-format text.  Tokens before any ``-DOCSTART-`` line go to ``default_doc_id``."""
    docs: list[Document] = []
    cur_id: Optional[str] = None
    cur_meta: Optional[DocMeta] = None
    cur_sents: list[Sentence] = []
    rows: list[tuple[int, list[str]]] = []
    meta_allowed = False

    def flush_sentence():
        if not rows:
            return
        widths = {len(cols) for _, cols in rows}
        if len(widths) != 1:
            raise ColumnFormatError("mixed column counts within a sentence", rows[-1][0], path)
        tokens, tags = [], []
        for lineno, cols in rows:
            try:
                tokens.append(Token(*cols[:4]))
            except ValueError as exc:
                raise ColumnFormatError(str(exc), lineno, path) from None
            if len(cols) == 5:
                try:
                    tags.append(parse_tag(cols[4]))
                except ValueError as exc:
                    raise ColumnFormatError(str(exc), lineno, path) from None
        try:
            cur_sents.append(Sentence(tuple(tokens), tuple(tags) if tags else None))
        except IOBError as exc:
            raise ColumnFormatError(str(exc), rows[exc.index][0], path) from None
        rows.clear()

    def flush_doc():
        if cur_id is not None:
            docs.append(Document(cur_id, tuple(cur_sents), cur_meta))

    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if line.startswith("-DOCSTART-") and "\t" not in line:
            flush_sentence()
            flush_doc()
            parts = line.split()
            if len(parts) != 2:
                raise ColumnFormatError("expected '-DOCSTART- <id>'", lineno, path)
            cur_id, cur_meta, cur_sents = parts[1], None, []
            meta_allowed = True
            continue
        if line.startswith("#") and "\t" not in line and not rows:
            if not meta_allowed:
                continue  # stray comment
            cur_meta = _parse_meta(line[1:], lineno)
            meta_allowed = False
            continue
        meta_allowed = False
        if not line.strip():
            flush_sentence()
            continue
        cols = line.split("\t")
        if len(cols) not in (4, 5):
            raise ColumnFormatError(f"expected 4 or 5 tab-separated columns, got {len(cols)}", lineno, path)
        if cur_id is None:
            cur_id, cur_sents = default_doc_id, []
        rows.append((lineno, cols))
    flush_sentence()
    flush_doc()
    return docs


def format_columns(docs: Iterable[Document]) -> str:
    out = []
    for doc in docs:
        out.append(f"-DOCSTART- {doc.id}\n")
        if doc.meta is not None:
            meta = _format_meta(doc.meta)
            if meta:
                out.append(meta + "\n")
        out.append("\n")
        for sent in doc.sentences:
            tags = sent.gold_tags
            for i, tok in enumerate(sent.tokens):
                cols = [tok.surface, tok.lemma, tok.pos, tok.chunk]
                if tags is not None:
                    cols.append(str(tags[i]))
                out.append("\t".join(cols) + "\n")
            out.append("\n")
    return "".join(out)


def read_column_file(path) -> list[Document]:
    path = Path(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw.count(b"\n", 0, exc.start) + 1
        raise ColumnFormatError("file is not valid UTF-8", line, path) from None
    if text.startswith("﻿"):
        text = text[1:]
    return parse_columns(text, path=path)


def write_column_file(docs: Iterable[Document], path) -> None:
    Path(path).write_text(format_columns(docs), encoding="utf-8")


# -- statistics ---------------------------------------------------------------

@dataclass
class TypeStats:
    entities: int = 0
    tokens: int = 0
    unique: int = 0


@dataclass
class CorpusStats:
    documents: int = 0
    sentences: int = 0
    tokens: int = 0
    entity_tokens: int = 0
    entities: int = 0
    unique_entities: int = 0
    per_type: dict = field(default_factory=lambda: {t: TypeStats() for t in EntityType})

    def to_tsv(self) -> str:
        lines = ["type\tentities\ttokens\tunique"]
        for t in EntityType:
            s = self.per_type[t]
            lines.append(f"{t}\t{s.entities}\t{s.tokens}\t{s.unique}")
        lines.append(f"total\t{self.entities}\t{self.entity_tokens}\t{self.unique_entities}")
        lines.append("")
        lines.append(f"documents\t{self.documents}")
        lines.append(f"sentences\t{self.sentences}")
        lines.append(f"tokens\t{self.tokens}")
        lines.append(f"entity_tokens\t{self.entity_tokens}")
        return "\n".join(lines) + "\n"


def corpus_stats(docs: Iterable[Document]) -> CorpusStats:
    """Entity/token counts per type.  Unique entities compare the span text joined by single spaces."""
    stats = CorpusStats()
    surfaces = {t: Counter() for t in EntityType}
    for doc in docs:
        stats.documents += 1
        for si, sent in enumerate(doc.sentences):
            if sent.gold_tags is None:
                raise ValueError(f"document {doc.id} sentence {si} has no gold tags")
            stats.sentences += 1
            stats.tokens += len(sent)
            for span in decode_iob(sent.gold_tags, si):
                ts = stats.per_type[span.etype]
                ts.entities += 1
                ts.tokens += len(span)
                surfaces[span.etype][" ".join(sent.surfaces[span.start:span.end])] += 1
    for t in EntityType:
        ts = stats.per_type[t]
        ts.unique = len(surfaces[t])
        stats.entities += ts.entities
        stats.entity_tokens += ts.tokens
        stats.unique_entities += ts.unique
    return stats
