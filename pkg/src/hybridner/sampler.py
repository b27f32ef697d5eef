"""
Corpus-construction sampler: pick a subset of collected news documents whose
topic mix, length distribution, spread over time and source mix track the
whole collection.

Selection works in four steps:

1. each topic gets a share of ``target_n`` proportional to its pool share
   (largest-remainder rounding);
2. inside a topic, each source gets a share proportional to its documents in
   that topic, subject to per-source caps (capped sources are fixed at the cap
   and the rest is re-apportioned among the others);
3. within a (topic, source) cell documents are drawn one at a time from the
   time bin that is least filled for the topic so far;
4. inside a bin, documents are drawn without replacement with weight
   proportional to the normal density of their length under the topic's
   length mean and standard deviation.

Pool files are TSV ``id  source  topic  timestamp  length``.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "TOPICS", "SPORTS_TOPIC", "NewsDocMeta", "SamplerConfig", "SamplingInfeasible",
    "filter_pool", "topic_length_stats", "largest_remainder", "allocate", "sample_documents",
    "sampling_report", "SamplingReport", "read_pool", "write_pool", "time_bin_edges",
]

TOPICS = ("سیاست", "اقتصاد", "ورزش", "فرهنگ و هنر", "دانش و فناوری", "جامعه")
SPORTS_TOPIC = "ورزش"


@dataclass(frozen=True)
class NewsDocMeta:
    id: str
    source: str
    topic: str
    timestamp: int
    length: int

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError(f"document {self.id}: length must be positive")


@dataclass(frozen=True)
class SamplerConfig:
    target_n: int
    min_length: int = 70
    source_cap: float = 0.20
    sports_source: Optional[str] = "varzesh3"
    sports_cap: float = 0.30
    sports_topic: str = SPORTS_TOPIC
    time_bins: int = 10
    seed: int = 0
    topics: Optional[tuple] = TOPICS
    sources: Optional[tuple] = None

    @property
    def max_per_source(self) -> int:
        return _ceil(self.source_cap * self.target_n)

    def sports_limit(self, sports_alloc: int) -> int:
        return _ceil(self.sports_cap * sports_alloc)


class SamplingInfeasible(ValueError):
    """The pool cannot supply ``target_n`` documents under the caps."""

    def __init__(self, constraints: Sequence[str]):
        self.constraints = list(constraints)
        super().__init__("infeasible selection: " + "; ".join(self.constraints))


def _ceil(x: float) -> int:
    # 0.2 * 100 is 20.000000000000004 in binary floating point
    return math.ceil(round(x, 9))


def _check_registry(pool, cfg):
    for d in pool:
        if cfg.topics is not None and d.topic not in cfg.topics:
            raise ValueError(f"document {d.id}: unknown topic {d.topic!r}")
        if cfg.sources is not None and d.source not in cfg.sources:
            raise ValueError(f"document {d.id}: unknown source {d.source!r}")


def filter_pool(pool: Sequence[NewsDocMeta], cfg: SamplerConfig) -> list[NewsDocMeta]:
    return [d for d in pool if d.length >= cfg.min_length]


def topic_length_stats(pool: Sequence[NewsDocMeta]) -> dict:
    """Per-topic ``(mean, population std)`` of document length; one-document topics get std 0."""
    lengths = defaultdict(list)
    for d in pool:
        lengths[d.topic].append(d.length)
    out = {}
    for topic, ls in lengths.items():
        arr = np.asarray(ls, dtype=float)
        out[topic] = (float(arr.mean()), float(arr.std()) if len(arr) > 1 else 0.0)
    return out


def largest_remainder(total: int, weights: dict) -> dict:
    """Integer apportionment of ``total`` proportional to ``weights``.

    Remainder ties go to keys earlier in ``weights`` iteration order.
    """
    keys = [k for k, w in weights.items() if w > 0]
    wsum = float(sum(weights[k] for k in keys))
    if not keys or total <= 0:
        return {k: 0 for k in weights}
    quotas = {k: total * weights[k] / wsum for k in keys}
    out = {k: int(math.floor(q + 1e-9)) for k, q in quotas.items()}
    left = total - sum(out.values())
    order = sorted(range(len(keys)), key=lambda i: (-(quotas[keys[i]] - out[keys[i]]), i))
    for i in order[:left]:
        out[keys[i]] += 1
    return {k: out.get(k, 0) for k in weights}


def _capped_apportion(need: int, weights: dict, limits: dict) -> dict:
    fixed = {}
    active = {k: w for k, w in weights.items() if w > 0 and limits[k] > 0}
    while True:
        rem = need - sum(fixed.values())
        share = largest_remainder(rem, active) if active else {}
        over = [k for k in active if share[k] > limits[k]]
        if not over:
            fixed.update(share)
            return {k: fixed.get(k, 0) for k in weights}
        for k in over:
            fixed[k] = limits[k]
            del active[k]


def allocate(pool: Sequence[NewsDocMeta], cfg: SamplerConfig) -> dict:
    """``{(topic, source): count}`` for the selection, or raise :class:`SamplingInfeasible`."""
    n = cfg.target_n
    if n > len(pool):
        raise SamplingInfeasible([f"target {n} exceeds filtered pool size {len(pool)}"])
    topic_counts = Counter(d.topic for d in pool)
    topic_order = [t for t in (cfg.topics or ()) if t in topic_counts]
    topic_order += sorted(t for t in topic_counts if t not in topic_order)
    topic_alloc = largest_remainder(n, {t: topic_counts[t] for t in topic_order})

    cell_counts = Counter((d.topic, d.source) for d in pool)
    sources = sorted({d.source for d in pool})
    budget = {s: cfg.max_per_source for s in sources}
    out = {}
    problems = []
    for topic in topic_order:
        need = topic_alloc[topic]
        weights = {s: cell_counts[(topic, s)] for s in sources}
        limits = {}
        for s in sources:
            if s == cfg.sports_source and topic == cfg.sports_topic:
                cap = cfg.sports_limit(need)
            else:
                cap = budget[s]
            limits[s] = min(weights[s], cap)
        counts = _capped_apportion(need, weights, limits)
        got = sum(counts.values())
        if got < need:
            binding = [s for s in sources if weights[s] and counts[s] == limits[s]]
            problems.append(
                f"topic {topic!r} needs {need} documents but caps allow {got} "
                f"(sources at their limit: {', '.join(binding) or 'none'})"
            )
        for s, c in counts.items():
            if c:
                out[(topic, s)] = c
                if not (s == cfg.sports_source and topic == cfg.sports_topic):
                    budget[s] -= c
    if problems:
        raise SamplingInfeasible(problems)
    return out


def time_bin_edges(pool: Sequence[NewsDocMeta], bins: int) -> np.ndarray:
    ts = np.array([d.timestamp for d in pool], dtype=float)
    lo, hi = (ts.min(), ts.max()) if len(ts) else (0.0, 1.0)
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, bins + 1)


def _bin_of(ts, edges):
    return int(np.clip(np.searchsorted(edges, ts, side="right") - 1, 0, len(edges) - 2))


def sample_documents(pool: Sequence[NewsDocMeta], cfg: SamplerConfig) -> list[str]:
    """Ids of the selected documents, in selection order.  Deterministic for a fixed seed."""
    _check_registry(pool, cfg)
    pool = filter_pool(pool, cfg)
    alloc = allocate(pool, cfg)
    stats = topic_length_stats(pool)
    edges = time_bin_edges(pool, cfg.time_bins)
    rng = np.random.default_rng(cfg.seed)

    cells = defaultdict(lambda: defaultdict(list))
    for d in pool:
        cells[(d.topic, d.source)][_bin_of(d.timestamp, edges)].append(d)

    selected = []
    topic_bins = defaultdict(lambda: np.zeros(cfg.time_bins, dtype=int))
    for (topic, source), m in alloc.items():
        mean, std = stats[topic]
        by_bin = {b: list(docs) for b, docs in sorted(cells[(topic, source)].items())}
        filled = topic_bins[topic]
        for _ in range(m):
            b = min((b for b, docs in by_bin.items() if docs), key=lambda b: (filled[b], b))
            docs = by_bin[b]
            if std > 0:
                z = (np.array([d.length for d in docs], dtype=float) - mean) / std
                w = np.exp(-0.5 * z * z)
            else:
                w = np.ones(len(docs))
            total = w.sum()
            p = w / total if total > 0 else np.full(len(docs), 1.0 / len(docs))
            k = int(rng.choice(len(docs), p=p))
            selected.append(docs.pop(k).id)
            filled[b] += 1
    return selected


@dataclass
class SamplingReport:
    """Pool vs selection counts by topic, source and time bin."""

    rows: list = field(default_factory=list)  # (dimension, key, pool, selected)

    def to_tsv(self) -> str:
        lines = ["dimension\tkey\tpool\tselected"]
        lines += [f"{dim}\t{key}\t{p}\t{s}" for dim, key, p, s in self.rows]
        return "\n".join(lines) + "\n"

    def topic_tsv(self) -> str:
        """Documents per topic in the selection, ready for a bar chart."""
        lines = ["topic\tdocuments"]
        lines += [f"{key}\t{s}" for dim, key, _, s in self.rows if dim == "topic"]
        return "\n".join(lines) + "\n"

    def counts(self, dimension: str, which: str = "selected") -> dict:
        col = 3 if which == "selected" else 2
        return {r[1]: r[col] for r in self.rows if r[0] == dimension}


def sampling_report(pool: Sequence[NewsDocMeta], selection: Sequence[str],
                    cfg: Optional[SamplerConfig] = None) -> SamplingReport:
    bins = cfg.time_bins if cfg is not None else 10
    chosen = set(selection)
    edges = time_bin_edges(pool, bins)
    rep = SamplingReport()
    topic_order = [t for t in TOPICS if any(d.topic == t for d in pool)]
    topic_order += sorted({d.topic for d in pool} - set(topic_order))
    for dim, keyf, keys in (
        ("topic", lambda d: d.topic, topic_order),
        ("source", lambda d: d.source, sorted({d.source for d in pool})),
        ("time_bin", lambda d: _bin_of(d.timestamp, edges), range(bins)),
    ):
        pc = Counter(keyf(d) for d in pool)
        sc = Counter(keyf(d) for d in pool if d.id in chosen)
        rep.rows.extend((dim, k, pc[k], sc[k]) for k in keys)
    return rep


def read_pool(path) -> list[NewsDocMeta]:
    docs = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if lineno == 1 and cols[0] == "id":
            continue
        if len(cols) != 5:
            raise ValueError(f"{path}:{lineno}: expected 5 tab-separated columns, got {len(cols)}")
        try:
            docs.append(NewsDocMeta(cols[0], cols[1], cols[2], int(cols[3]), int(cols[4])))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return docs


def write_pool(pool: Sequence[NewsDocMeta], path) -> None:
    lines = ["id\tsource\ttopic\ttimestamp\tlength"]
    lines += [f"{d.id}\t{d.source}\t{d.topic}\t{d.timestamp}\t{d.length}" for d in pool]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
