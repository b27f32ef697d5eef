"""
Rule-based recognizer: per-token character regexes plus token-sequence patterns.

Rule files hold one rule per line, ``#`` starting a comment::

    PER <- (آقای|خانم|آقایان) [pos:N]+ :capture 2..
    ORG <- "دانشگاه" "آزاد" "اسلامی" [lex:city] @ 5
    DAT <~ \\d{2,4}/\\d{1,2}/\\d{1,2}

Token-pattern elements are a quoted literal, a parenthesised alternation of
words, ``[pos:TAG]`` (``tag:`` is accepted as an alias), ``[lex:NAME]`` or
``[re:REGEX]``, each optionally followed by ``?``, ``+`` or ``*``.  A capture
range ``a..b`` is 1-based and inclusive; either end may be omitted.  ``\\d`` in
any regex covers ASCII, Persian and Arabic-Indic digits.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Container, Mapping, NamedTuple, Optional, Sequence

from .corpus import EntitySpan, EntityType, Sentence, Token

__all__ = [
    "RuleSyntaxError", "Literal", "Alternation", "PosEquals", "LexiconMember", "SurfaceRegex",
    "Element", "Rule", "CharRule", "RuleSet", "Candidate", "compile_rule", "compile_char_rule",
    "print_rule", "parse_ruleset", "load_ruleset", "match_rules", "match_ends",
    "greedy_counts", "candidates", "resolve", "expand_digits", "DIGIT_CLASS",
]

DIGIT_CLASS = "0-9۰-۹٠-٩"
QUANTIFIERS = ("1", "?", "+", "*")


class RuleSyntaxError(ValueError):
    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        elif column is not None:
            loc = f"column {column}: "
        super().__init__(loc + message)
        self.line = line
        self.column = column


def expand_digits(pattern: str) -> str:
    """Rewrite ``\\d`` as an explicit ASCII/Persian/Arabic-Indic digit class."""
    out = []
    in_class = False
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "\\" and i + 1 < len(pattern):
            nxt = pattern[i + 1]
            if nxt == "d":
                out.append(DIGIT_CLASS if in_class else f"[{DIGIT_CLASS}]")
            else:
                out.append(pattern[i:i + 2])
            i += 2
            continue
        if ch == "[" and not in_class:
            in_class = True
            out.append(ch)
            # a leading ']' or '^]' is literal inside a class
            if pattern[i + 1:i + 2] == "^":
                out.append("^")
                i += 1
            if pattern[i + 1:i + 2] == "]":
                out.append("]")
                i += 1
        elif ch == "]" and in_class:
            in_class = False
            out.append(ch)
        else:
            out.append(ch)
        i += 1
    return "".join(out)


@lru_cache(maxsize=None)
def _compile_regex(source: str) -> re.Pattern:
    return re.compile(expand_digits(source))


# -- predicates ---------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    text: str

    def __call__(self, tok: Token) -> bool:
        return tok.surface == self.text

    def to_dsl(self):
        return '"' + self.text.replace("\\", "\\\\").replace('"', '\\"') + '"'


@dataclass(frozen=True)
class Alternation:
    options: tuple

    def __call__(self, tok: Token) -> bool:
        return tok.surface in self.options

    def to_dsl(self):
        return "(" + "|".join(
            Literal(o).to_dsl() if re.search(r'[|()"\\]', o) else o for o in self.options
        ) + ")"


@dataclass(frozen=True)
class PosEquals:
    tag: str

    def __call__(self, tok: Token) -> bool:
        return tok.pos == self.tag

    def to_dsl(self):
        return f"[pos:{self.tag}]"


@dataclass(frozen=True)
class LexiconMember:
    name: str
    lexicon: Container = field(default=frozenset(), compare=False, repr=False)

    def __call__(self, tok: Token) -> bool:
        return tok.surface in self.lexicon

    def to_dsl(self):
        return f"[lex:{self.name}]"


@dataclass(frozen=True)
class SurfaceRegex:
    source: str

    def __post_init__(self):
        _compile_regex(self.source)

    def __call__(self, tok: Token) -> bool:
        return _compile_regex(self.source).fullmatch(tok.surface) is not None

    def to_dsl(self):
        return f"[re:{self.source}]"


@dataclass(frozen=True)
class Element:
    predicate: object
    quantifier: str = "1"

    @property
    def min_count(self):
        return 1 if self.quantifier in ("1", "+") else 0

    @property
    def repeats(self):
        return self.quantifier in ("+", "*")

    def to_dsl(self):
        q = "" if self.quantifier == "1" else self.quantifier
        return self.predicate.to_dsl() + q


@dataclass(frozen=True)
class Rule:
    """A token-sequence pattern.  ``capture`` is a 0-based half-open element range."""

    id: str
    elements: tuple
    etype: EntityType
    priority: int = 0
    capture: Optional[tuple] = None

    def __post_init__(self):
        if not self.elements:
            raise RuleSyntaxError("rule has no elements")
        if all(e.min_count == 0 for e in self.elements):
            raise RuleSyntaxError("rule can match the empty sequence")
        if self.capture is not None:
            a, b = self.capture
            if not 0 <= a < b <= len(self.elements):
                raise RuleSyntaxError(f"capture range {a + 1}..{b} outside 1..{len(self.elements)}")

    @property
    def capture_range(self):
        return self.capture if self.capture is not None else (0, len(self.elements))


@dataclass(frozen=True)
class CharRule:
    """Whole-token character regex."""

    id: str
    source: str
    etype: EntityType

    def __post_init__(self):
        try:
            _compile_regex(self.source)
        except re.error as exc:
            raise RuleSyntaxError(f"bad regex {self.source!r}: {exc}") from None

    def matches(self, tok: Token) -> bool:
        return _compile_regex(self.source).fullmatch(tok.surface) is not None


class RuleSet(NamedTuple):
    rules: tuple = ()
    char_rules: tuple = ()


# -- DSL ----------------------------------------------------------------------

_TYPE_RE = re.compile(r"\s*([A-Z]+)\s*(<-|<~)\s*")
_CAPTURE_RE = re.compile(r":capture\s+(\d*)\.\.(\d*)|:capture\s+(\d+)")
_PRIORITY_RE = re.compile(r"@\s*(-?\d+)")


def _entity_type(name, column):
    try:
        return EntityType(name)
    except ValueError:
        raise RuleSyntaxError(f"unknown entity type {name!r}", column=column) from None


class _Parser:
    def __init__(self, text, lexicons):
        self.text = text
        self.pos = 0
        self.lexicons = lexicons

    def error(self, message):
        return RuleSyntaxError(message, column=self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self):
        return self.pos >= len(self.text)

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def quoted(self):
        assert self.peek() == '"'
        self.pos += 1
        buf = []
        while True:
            if self.at_end():
                raise self.error("unterminated string literal")
            ch = self.text[self.pos]
            if ch == "\\" and self.pos + 1 < len(self.text):
                buf.append(self.text[self.pos + 1])
                self.pos += 2
                continue
            self.pos += 1
            if ch == '"':
                break
            buf.append(ch)
        if not buf:
            raise self.error("empty literal")
        if any(c.isspace() for c in buf):
            raise self.error("literal contains whitespace; use one literal per token")
        return "".join(buf)

    def alternation(self):
        self.pos += 1
        options = []
        cur = []
        while True:
            if self.at_end():
                raise self.error("unterminated alternation")
            ch = self.peek()
            if ch == '"':
                cur.append(self.quoted())
                continue
            self.pos += 1
            if ch in "|)":
                word = "".join(cur).strip()
                if not word or any(c.isspace() for c in word):
                    raise self.error(f"bad alternative {word!r}")
                options.append(word)
                cur = []
                if ch == ")":
                    break
            else:
                cur.append(ch)
        return Alternation(tuple(options))

    def bracket(self):
        start = self.pos
        self.pos += 1
        m = re.match(r"(pos|tag|lex|re):", self.text[self.pos:])
        if not m:
            raise self.error("expected pos:, tag:, lex: or re: after '['")
        kind = m.group(1)
        self.pos += m.end()
        body_start = self.pos
        if kind == "re":
            in_class = False
            while True:
                if self.at_end():
                    self.pos = start
                    raise self.error("unterminated [re:...] element")
                ch = self.text[self.pos]
                if ch == "\\":
                    self.pos += 2
                    continue
                if ch == "[" and not in_class:
                    in_class = True
                elif ch == "]" and in_class:
                    in_class = False
                elif ch == "]":
                    break
                self.pos += 1
        else:
            end = self.text.find("]", self.pos)
            if end < 0:
                raise self.error("unterminated '[' element")
            self.pos = end
        body = self.text[body_start:self.pos]
        self.pos += 1
        if not body.strip():
            raise RuleSyntaxError(f"empty {kind}: element", column=start + 1)
        if kind in ("pos", "tag"):
            return PosEquals(body.strip())
        if kind == "lex":
            name = body.strip()
            if self.lexicons is None or name not in self.lexicons:
                raise RuleSyntaxError(f"unknown lexicon {name!r}", column=start + 1)
            return LexiconMember(name, self.lexicons[name])
        try:
            return SurfaceRegex(body)
        except re.error as exc:
            raise RuleSyntaxError(f"bad regex {body!r}: {exc}", column=start + 1) from None

    def element(self):
        ch = self.peek()
        if ch == '"':
            pred = Literal(self.quoted())
        elif ch == "(":
            pred = self.alternation()
        elif ch == "[":
            pred = self.bracket()
        else:
            raise self.error(f"unexpected {ch!r}; expected a quoted literal, '(' or '['")
        q = self.peek()
        if q in ("?", "+", "*"):
            self.pos += 1
        else:
            q = "1"
        if not self.at_end() and not self.peek().isspace() and self.peek() not in '"([':
            raise self.error(f"unexpected {self.peek()!r} after element")
        return Element(pred, q)


def compile_rule(text: str, rule_id: str = "rule", lexicons: Optional[Mapping[str, Container]] = None,
                 line: Optional[int] = None) -> Rule:
    """Compile one token-sequence rule from its DSL form."""
    try:
        return _compile_rule(text, rule_id, lexicons)
    except RuleSyntaxError as exc:
        if line is not None:
            raise RuleSyntaxError(str(exc), line=line) from None
        raise


def _compile_rule(text, rule_id, lexicons):
    m = _TYPE_RE.match(text)
    if not m:
        raise RuleSyntaxError("expected 'TYPE <- elements'", column=1)
    if m.group(2) != "<-":
        raise RuleSyntaxError("'<~' introduces a character rule", column=m.start(2) + 1)
    etype = _entity_type(m.group(1), m.start(1) + 1)
    p = _Parser(text, lexicons)
    p.pos = m.end()
    elements = []
    capture = None
    priority = 0
    while True:
        p.skip_ws()
        if p.at_end():
            break
        if p.text.startswith(":capture", p.pos):
            cm = _CAPTURE_RE.match(p.text, p.pos)
            if not cm:
                raise p.error("expected ':capture a..b'")
            if cm.group(3) is not None:
                a = b = int(cm.group(3))
            else:
                a = int(cm.group(1)) if cm.group(1) else 1
                b = int(cm.group(2)) if cm.group(2) else len(elements)
            if a < 1 or b < a or b > len(elements):
                raise p.error(f"capture range {a}..{b} outside 1..{len(elements)}")
            capture = (a - 1, b)
            p.pos = cm.end()
            continue
        if p.peek() == "@":
            pm = _PRIORITY_RE.match(p.text, p.pos)
            if not pm:
                raise p.error("expected '@ priority'")
            priority = int(pm.group(1))
            p.pos = pm.end()
            p.skip_ws()
            if not p.at_end():
                raise p.error("trailing text after priority")
            break
        if capture is not None:
            raise p.error("elements after ':capture'")
        elements.append(p.element())
    if not elements:
        raise RuleSyntaxError("rule has no elements", column=len(text) + 1)
    if capture == (0, len(elements)):
        capture = None
    return Rule(rule_id, tuple(elements), etype, priority, capture)


def compile_char_rule(text: str, rule_id: str = "char") -> CharRule:
    m = _TYPE_RE.match(text)
    if not m or m.group(2) != "<~":
        raise RuleSyntaxError("expected 'TYPE <~ REGEX'", column=1)
    etype = _entity_type(m.group(1), m.start(1) + 1)
    source = text[m.end():].strip()
    if not source:
        raise RuleSyntaxError("empty regex", column=m.end() + 1)
    return CharRule(rule_id, source, etype)


def print_rule(rule) -> str:
    if isinstance(rule, CharRule):
        return f"{rule.etype} <~ {rule.source}"
    parts = [f"{rule.etype} <-"] + [e.to_dsl() for e in rule.elements]
    if rule.capture is not None:
        a, b = rule.capture
        parts.append(f":capture {a + 1}..{b}")
    if rule.priority:
        parts.append(f"@ {rule.priority}")
    return " ".join(parts)


def parse_ruleset(text: str, lexicons=None, prefix: str = "L") -> RuleSet:
    """Compile every non-comment line; all syntax errors are collected before raising."""
    rules, char_rules, errors = [], [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rid = f"{prefix}{lineno:05d}"
        try:
            if re.match(r"[A-Z]+\s*<~", stripped):
                char_rules.append(compile_char_rule(stripped, rid))
            else:
                rules.append(compile_rule(stripped, rid, lexicons))
        except RuleSyntaxError as exc:
            errors.append(RuleSyntaxError(str(exc), line=lineno))
    if errors:
        err = RuleSyntaxError("; ".join(str(e) for e in errors))
        err.errors = errors
        err.line = errors[0].line
        raise err
    return RuleSet(tuple(rules), tuple(char_rules))


def load_ruleset(path, lexicons=None) -> RuleSet:
    return parse_ruleset(Path(path).read_text(encoding="utf-8"), lexicons)


# -- matching -----------------------------------------------------------------

def match_ends(elements: Sequence[Element], tokens: Sequence[Token], start: int) -> set:
    """All end positions ``e`` such that ``tokens[start:e]`` matches the whole pattern."""
    states = {start}
    for el in elements:
        nxt = set()
        for pos in states:
            if el.min_count == 0:
                nxt.add(pos)
            p = pos
            while p < len(tokens) and el.predicate(tokens[p]):
                p += 1
                nxt.add(p)
                if not el.repeats:
                    break
        states = nxt
        if not states:
            break
    return states


def greedy_counts(elements: Sequence[Element], tokens: Sequence[Token], start: int, end: int):
    """Token count per element for ``tokens[start:end]``, earlier quantifiers taking as much as they can.

    Returns None when the window does not match.
    """
    n = len(elements)

    @lru_cache(maxsize=None)
    def fits(k, pos):
        if k == n:
            return () if pos == end else None
        el = elements[k]
        run = 0
        limit = end - pos if el.repeats else min(1, end - pos)
        while run < limit and el.predicate(tokens[pos + run]):
            run += 1
        for c in range(run, el.min_count - 1, -1):
            rest = fits(k + 1, pos + c)
            if rest is not None:
                return (c,) + rest
        return None

    return fits(0, start)


class Candidate(NamedTuple):
    start: int
    end: int
    etype: EntityType
    match_len: int
    priority: int
    rule_id: str

    def key(self):
        return (-self.match_len, -self.priority, self.start, self.rule_id)


def candidates(tokens: Sequence[Token], rules: Sequence[Rule], char_rules: Sequence[CharRule] = ()) -> list:
    """Longest match of every rule at every start position, projected onto its capture range."""
    out = []
    for rule in rules:
        for s in range(len(tokens)):
            ends = match_ends(rule.elements, tokens, s)
            ends.discard(s)
            if not ends:
                continue
            e = max(ends)
            if rule.capture is None:
                a, b = s, e
            else:
                counts = greedy_counts(rule.elements, tokens, s, e)
                ca, cb = rule.capture
                a = s + sum(counts[:ca])
                b = a + sum(counts[ca:cb])
            if b > a:
                out.append(Candidate(a, b, rule.etype, e - s, rule.priority, rule.id))
    for cr in char_rules:
        for i, tok in enumerate(tokens):
            if cr.matches(tok):
                out.append(Candidate(i, i + 1, cr.etype, 1, 0, cr.id))
    return out


def resolve(cands, sentence_index: int = 0) -> list[EntitySpan]:
    """Accept candidates by (longest match, highest priority, leftmost, lowest id), skipping overlaps."""
    taken = set()
    chosen = []
    for c in sorted(cands, key=Candidate.key):
        span = range(c.start, c.end)
        if any(i in taken for i in span):
            continue
        taken.update(span)
        chosen.append(EntitySpan(sentence_index, c.start, c.end, c.etype))
    chosen.sort(key=EntitySpan.sort_key)
    return chosen


def match_rules(sentence: Sentence, ruleset, char_rules=None, sentence_index: int = 0) -> list[EntitySpan]:
    """Run token and character rules over one sentence.

    ``ruleset`` may be a :class:`RuleSet` (then ``char_rules`` is taken from it)
    or a plain sequence of :class:`Rule`.
    """
    if isinstance(ruleset, RuleSet):
        rules = ruleset.rules
        char_rules = ruleset.char_rules if char_rules is None else char_rules
    else:
        rules = ruleset
    return resolve(candidates(sentence.tokens, rules, char_rules or ()), sentence_index)
