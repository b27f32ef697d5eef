"""
Scoring: entity-level precision/recall/F1, token confusion, annotator agreement
and document-level K-fold splits.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import EntityType, Tag, decode_iob

__all__ = [
    "Score", "PRFResult", "entity_prf", "CONFUSION_LABELS", "token_confusion",
    "confusion_tsv", "Agreement", "agreement", "kfold_split", "mean_results",
    "report", "REPORT_TYPES",
]


@dataclass
class Score:
    tp: int = 0
    n_pred: int = 0
    n_gold: int = 0

    @property
    def precision(self) -> float:
        return self.tp / self.n_pred if self.n_pred else 0.0

    @property
    def recall(self) -> float:
        return self.tp / self.n_gold if self.n_gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class PRFResult:
    per_type: dict = field(default_factory=lambda: {t: Score() for t in EntityType})
    micro: Score = field(default_factory=Score)

    def row(self, metric: str) -> dict:
        out = {t: getattr(self.per_type[t], metric) for t in EntityType}
        out["total"] = getattr(self.micro, metric)
        return out


def _as_corpus(tags):
    """Accept one tag sequence or a list of per-sentence sequences."""
    if tags and isinstance(tags[0], Tag):
        return [tags]
    return tags


def entity_prf(gold, pred) -> PRFResult:
    """Exact-match entity scoring: a hit needs identical sentence, boundaries and type."""
    gold, pred = _as_corpus(gold), _as_corpus(pred)
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold sentences vs {len(pred)} predicted")
    res = PRFResult()
    for si, (g, p) in enumerate(zip(gold, pred)):
        if len(g) != len(p):
            raise ValueError(f"sentence {si}: {len(g)} gold tags vs {len(p)} predicted")
        gs = set(decode_iob(g, si))
        ps = set(decode_iob(p, si))
        for s in gs:
            res.per_type[s.etype].n_gold += 1
        for s in ps:
            res.per_type[s.etype].n_pred += 1
        for s in gs & ps:
            res.per_type[s.etype].tp += 1
    for sc in res.per_type.values():
        res.micro.tp += sc.tp
        res.micro.n_pred += sc.n_pred
        res.micro.n_gold += sc.n_gold
    return res


CONFUSION_LABELS = tuple(t.value for t in EntityType) + ("O",)
_CONF_INDEX = {name: i for i, name in enumerate(CONFUSION_LABELS)}


def _bare(tag: Tag) -> int:
    return _CONF_INDEX["O" if tag.etype is None else tag.etype.value]


def token_confusion(gold_tags: Sequence[Tag], pred_tags: Sequence[Tag]) -> np.ndarray:
    """8x8 counts over PER..MON, O with B/I collapsed.  Rows are predicted, columns gold."""
    gold_tags = [t for s in _as_corpus(list(gold_tags)) for t in s]
    pred_tags = [t for s in _as_corpus(list(pred_tags)) for t in s]
    if len(gold_tags) != len(pred_tags):
        raise ValueError(f"length mismatch: {len(gold_tags)} vs {len(pred_tags)}")
    m = np.zeros((len(CONFUSION_LABELS),) * 2, dtype=int)
    for g, p in zip(gold_tags, pred_tags):
        m[_bare(p), _bare(g)] += 1
    return m


def confusion_tsv(matrix: np.ndarray, normalize: bool = False) -> str:
    """TSV with a ``pred\\gold`` corner; ``normalize`` divides each gold column by its sum."""
    if normalize:
        sums = matrix.sum(axis=0, keepdims=True)
        values = np.divide(matrix, sums, out=np.zeros(matrix.shape), where=sums > 0)
        fmt = "{:.4f}".format
    else:
        values, fmt = matrix, str
    lines = ["pred\\gold\t" + "\t".join(CONFUSION_LABELS)]
    for i, name in enumerate(CONFUSION_LABELS):
        lines.append(name + "\t" + "\t".join(fmt(v) for v in values[i]))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Agreement:
    observed: float
    kappa: float
    n: int
    disagreements: int


def agreement(tags_a: Sequence[Tag], tags_b: Sequence[Tag], mode: str = "all_tokens",
              compare: str = "full") -> Agreement:
    """Observed agreement and Cohen's kappa between two annotations of the same tokens.

    ``mode="entity_union"`` keeps only tokens that at least one annotator marked
    as an entity.  ``compare="type"`` collapses B/I before comparing.  Kappa is
    NaN when chance agreement is 1 (a single label on both sides).
    """
    if len(tags_a) != len(tags_b):
        raise ValueError(f"length mismatch: {len(tags_a)} vs {len(tags_b)}")
    if mode not in ("all_tokens", "entity_union"):
        raise ValueError(f"unknown mode {mode!r}")
    if compare not in ("full", "type"):
        raise ValueError(f"unknown comparison {compare!r}")
    pairs = list(zip(tags_a, tags_b))
    if mode == "entity_union":
        pairs = [(a, b) for a, b in pairs if not (a.is_outside and b.is_outside)]
    key = str if compare == "full" else (lambda t: "O" if t.etype is None else t.etype.value)
    n = len(pairs)
    if n == 0:
        return Agreement(math.nan, math.nan, 0, 0)
    ka = [key(a) for a, _ in pairs]
    kb = [key(b) for _, b in pairs]
    agree = sum(x == y for x, y in zip(ka, kb))
    po = agree / n
    ca, cb = Counter(ka), Counter(kb)
    pe = sum(ca[k] * cb[k] for k in ca) / (n * n)
    kappa = math.nan if pe >= 1.0 else (po - pe) / (1.0 - pe)
    return Agreement(po, kappa, n, n - agree)


def kfold_split(items: Sequence, k: int, seed: int = 0) -> list[list]:
    """Shuffle once with ``seed`` and cut into ``k`` folds whose sizes differ by at most one."""
    n = len(items)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= number of documents ({n}), got k={k}")
    order = np.random.default_rng(seed).permutation(n)
    folds = []
    start = 0
    for i in range(k):
        size = n // k + (1 if i < n % k else 0)
        folds.append([items[j] for j in order[start:start + size]])
        start += size
    return folds


def mean_results(results: Sequence[PRFResult]) -> dict:
    """Per-metric means across folds, keyed like :meth:`PRFResult.row`."""
    out = {}
    for metric in ("precision", "recall", "f1"):
        rows = [r.row(metric) for r in results]
        out[metric] = {k: float(np.mean([row[k] for row in rows])) for k in rows[0]}
    return out


# column order of the published result tables
REPORT_TYPES = (EntityType.PER, EntityType.ORG, EntityType.LOC, EntityType.TIM,
                EntityType.DAT, EntityType.MON, EntityType.PCT)


def report(results, fmt: str = "text") -> str:
    """Precision/recall/F1 rows by type plus total, rounded to two decimals.

    ``results`` is a :class:`PRFResult` or the dict returned by :func:`mean_results`.
    """
    if isinstance(results, PRFResult):
        table = {m: results.row(m) for m in ("precision", "recall", "f1")}
    else:
        table = results
    header = ["metric"] + [t.value for t in REPORT_TYPES] + ["total"]
    rows = []
    for metric, name in (("precision", "precision"), ("recall", "recall"), ("f1", "F1")):
        vals = table[metric]
        rows.append([name] + [f"{vals[t]:.2f}" for t in REPORT_TYPES] + [f"{vals['total']:.2f}"])
    if fmt == "tsv":
        return "\n".join("\t".join(r) for r in [header] + rows) + "\n"
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    return "\n".join(
        "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
        for r in [header] + rows
    ) + "\n"
