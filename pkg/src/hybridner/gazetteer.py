"""
Typed entity lists backed by a token-level trie.

A gazetteer file is UTF-8 with one entry per line; entry tokens are separated
by spaces and ``#`` starts a comment line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import EntitySpan, EntityType, Sentence

__all__ = [
    "Gazetteer", "PartialFlags", "load_gazetteer", "dump_gazetteer",
    "exact_match_spans", "partial_match_features",
]

_END = object()  # trie terminal marker


@dataclass(frozen=True)
class PartialFlags:
    full: bool = False
    prefix: bool = False
    internal: bool = False

    def __or__(self, other):
        return PartialFlags(self.full or other.full, self.prefix or other.prefix,
                            self.internal or other.internal)

    def __bool__(self):
        return self.full or self.prefix or self.internal


@dataclass(frozen=True, eq=False)
class Gazetteer:
    """A named list of pre-tokenized entries of a single entity type.

    ``token in gaz`` tests whether ``token`` is a one-token entry, which is what
    the ``[lex:NAME]`` rule predicate uses.
    """

    name: str
    etype: EntityType
    entries: frozenset = frozenset()
    _trie: dict = field(default_factory=dict, repr=False)
    _flags: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_entries(cls, name: str, etype: EntityType, entries: Iterable) -> "Gazetteer":
        normalized = set()
        for entry in entries:
            toks = tuple(entry.split()) if isinstance(entry, str) else tuple(entry)
            if not toks:
                raise ValueError(f"empty entry in gazetteer {name!r}")
            normalized.add(toks)
        trie: dict = {}
        flags: dict = {}
        for toks in normalized:
            node = trie
            for tok in toks:
                node = node.setdefault(tok, {})
            node[_END] = True
            for i, tok in enumerate(toks):
                if len(toks) == 1:
                    f = PartialFlags(full=True)
                elif i == 0:
                    f = PartialFlags(prefix=True)
                else:
                    f = PartialFlags(internal=True)
                flags[tok] = flags.get(tok, PartialFlags()) | f
        return cls(name, EntityType(etype), frozenset(normalized), trie, flags)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, token) -> bool:
        if isinstance(token, str):
            return (token,) in self.entries
        return tuple(token) in self.entries

    def flags(self, token: str) -> PartialFlags:
        return self._flags.get(token, PartialFlags())

    def longest_match(self, words: Sequence[str], start: int) -> int:
        """Length of the longest entry starting at ``words[start]`` (0 if none)."""
        node = self._trie
        best = 0
        for i in range(start, len(words)):
            node = node.get(words[i])
            if node is None:
                break
            if _END in node:
                best = i - start + 1
        return best

    def has_path(self, tokens: Sequence[str]) -> bool:
        node = self._trie
        for tok in tokens:
            node = node.get(tok)
            if node is None:
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, Gazetteer):
            return NotImplemented
        return (self.name, self.etype, self.entries) == (other.name, other.etype, other.entries)

    def __hash__(self):
        return hash((self.name, self.etype, self.entries))


def load_gazetteer(path, etype, name=None) -> Gazetteer:
    path = Path(path)
    entries = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        entries.append(line.split())
    return Gazetteer.from_entries(name or path.stem, EntityType(etype), entries)


def dump_gazetteer(gaz: Gazetteer, path) -> None:
    lines = sorted(" ".join(e) for e in gaz.entries)
    Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def exact_match_spans(sentence: Sentence, gazetteers: Sequence[Gazetteer],
                      sentence_index: int = 0) -> list[EntitySpan]:
    """Left-to-right maximal munch over all lists.

    Equal-length matches of different types go to the earlier type in
    PER < LOC < ORG < DAT < TIM < PCT < MON.
    """
    words = sentence.surfaces
    spans = []
    i = 0
    while i < len(words):
        best_len, best_type = 0, None
        for gaz in gazetteers:
            n = gaz.longest_match(words, i)
            if n > best_len or (n == best_len and n and gaz.etype.rank < best_type.rank):
                best_len, best_type = n, gaz.etype
        if best_len:
            spans.append(EntitySpan(sentence_index, i, i + best_len, best_type))
            i += best_len
        else:
            i += 1
    return spans


def partial_match_features(token, gazetteers: Sequence[Gazetteer]) -> dict:
    """Per-type full/prefix/internal membership flags for one token.

    Every type that has at least one gazetteer gets an entry, so absent tokens
    map to all-false flags.
    """
    surface = token if isinstance(token, str) else token.surface
    out: dict = {}
    for gaz in gazetteers:
        out[gaz.etype] = out.get(gaz.etype, PartialFlags()) | gaz.flags(surface)
    return out
