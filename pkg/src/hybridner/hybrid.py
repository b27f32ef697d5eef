"""Combining two taggers by priority: the first system keeps its entities, the second fills gaps."""
from __future__ import annotations

import enum
from typing import Optional, Sequence

from .corpus import O, Sentence, Tag, decode_iob, encode_iob
from .crf import CrfModel, decode
from .gazetteer import Gazetteer, exact_match_spans
from .rules import RuleSet, match_rules

__all__ = ["CombineStrategy", "SYSTEMS", "combine", "run_strategy", "run_system",
           "rule_tags", "list_tags"]


class CombineStrategy(str, enum.Enum):
    RULE_FIRST = "rule-first"
    STAT_FIRST = "stat-first"
    STAT_THEN_LIST = "stat-then-list"

    def __str__(self):
        return self.value


# single systems plus the three combinations
SYSTEMS = ("rule-first", "stat-first", "stat-then-list", "crf", "rules", "lists")


def combine(primary_tags: Sequence[Tag], secondary_tags: Sequence[Tag]) -> list[Tag]:
    """Keep every primary entity; adopt a secondary entity only if all its tokens are O in primary.

    Secondary entities that touch a primary entity are dropped whole, so the
    result is valid IOB2 without repair.
    """
    if len(primary_tags) != len(secondary_tags):
        raise ValueError(f"length mismatch: {len(primary_tags)} vs {len(secondary_tags)}")
    decode_iob(primary_tags)
    out = list(primary_tags)
    for span in decode_iob(secondary_tags):
        if all(primary_tags[i] == O for i in range(span.start, span.end)):
            out[span.start:span.end] = secondary_tags[span.start:span.end]
    return out


def rule_tags(sentence: Sentence, ruleset: Optional[RuleSet]) -> list[Tag]:
    if ruleset is None:
        return [O] * len(sentence)
    return encode_iob(match_rules(sentence, ruleset), len(sentence))


def list_tags(sentence: Sentence, gazetteers: Sequence[Gazetteer]) -> list[Tag]:
    return encode_iob(exact_match_spans(sentence, gazetteers or ()), len(sentence))


def run_strategy(strategy, sentence: Sentence, crf_model: CrfModel,
                 ruleset: Optional[RuleSet] = None, gazetteers: Sequence[Gazetteer] = ()) -> list[Tag]:
    strategy = CombineStrategy(strategy)
    crf = decode(crf_model, sentence)
    if strategy is CombineStrategy.RULE_FIRST:
        return combine(rule_tags(sentence, ruleset), crf)
    if strategy is CombineStrategy.STAT_FIRST:
        return combine(crf, rule_tags(sentence, ruleset))
    return combine(crf, list_tags(sentence, gazetteers))


def run_system(name: str, sentence: Sentence, crf_model: Optional[CrfModel] = None,
               ruleset: Optional[RuleSet] = None, gazetteers: Sequence[Gazetteer] = ()) -> list[Tag]:
    """Tag with one of :data:`SYSTEMS`."""
    if name == "rules":
        return rule_tags(sentence, ruleset)
    if name == "lists":
        return list_tags(sentence, gazetteers)
    if crf_model is None:
        raise ValueError(f"system {name!r} needs a CRF model")
    if name == "crf":
        return decode(crf_model, sentence)
    if name not in SYSTEMS:
        raise ValueError(f"unknown system {name!r}; choose from {', '.join(SYSTEMS)}")
    return run_strategy(name, sentence, crf_model, ruleset, gazetteers)
