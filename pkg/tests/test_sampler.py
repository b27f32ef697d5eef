import math
import statistics
from collections import Counter

import numpy as np
import pytest

from hybridner.sampler import (
    TOPICS, NewsDocMeta, SamplerConfig, SamplingInfeasible, allocate, filter_pool,
    largest_remainder, read_pool, sample_documents, sampling_report, topic_length_stats,
    write_pool,
)
from hybridner.synthetic import synthetic_pool

POL, ECO, SPORT = TOPICS[0], TOPICS[1], TOPICS[2]


def make_pool(spec, rng=None):
    """``spec`` is a list of (topic, source, count); lengths and times are spread deterministically."""
    rng = rng or np.random.default_rng(0)
    docs = []
    for topic, source, count in spec:
        for _ in range(count):
            docs.append(NewsDocMeta(f"d{len(docs):05d}", source, topic,
                                    int(rng.integers(0, 10**6)), int(rng.integers(100, 2000))))
    return docs


def test_length_threshold():
    pool = [NewsDocMeta("a", "s", POL, 0, 69), NewsDocMeta("b", "s", POL, 0, 70)]
    assert [d.id for d in filter_pool(pool, SamplerConfig(1))] == ["b"]
    assert filter_pool([], SamplerConfig(1)) == []


@pytest.mark.parametrize("lengths, expected", [([100, 100], (100, 0)), ([80, 120], (100, 20)),
                                               ([77], (77, 0))])
def test_length_stats_examples(lengths, expected):
    pool = [NewsDocMeta(str(i), "s", POL, 0, n) for i, n in enumerate(lengths)]
    assert topic_length_stats(pool)[POL] == expected


def test_length_stats_vs_reference(rng):
    pool = make_pool([(t, "s", int(rng.integers(2, 40))) for t in TOPICS], rng)
    stats = topic_length_stats(pool)
    for t in TOPICS:
        ls = [d.length for d in pool if d.topic == t]
        mean, std = stats[t]
        assert abs(mean - statistics.fmean(ls)) <= 1e-9
        assert abs(std - statistics.pstdev(ls)) <= 1e-9


def test_largest_remainder():
    assert largest_remainder(10, {"a": 1, "b": 1, "c": 1}) == {"a": 4, "b": 3, "c": 3}
    assert largest_remainder(7, {"a": 0, "b": 5}) == {"a": 0, "b": 7}
    assert sum(largest_remainder(101, {k: k + 1 for k in range(7)}).values()) == 101


def test_topic_proportions():
    sources = [f"s{i}" for i in range(10)]
    spec = [(t, s, n // 10) for t, n in ((POL, 500), (ECO, 300), (SPORT, 200)) for s in sources]
    sel = sample_documents(make_pool(spec), SamplerConfig(100, sports_source=None))
    by_id = {d.id: d for d in make_pool(spec)}
    assert Counter(by_id[i].topic for i in sel) == {POL: 50, ECO: 30, SPORT: 20}


def test_dominant_source_capped():
    spec = [(POL, "big", 900)] + [(POL, f"s{i}", 12) for i in range(9)]
    pool = make_pool(spec)
    sel = sample_documents(pool, SamplerConfig(100))
    src = Counter({d.id: d.source for d in pool}[i] for i in sel)
    assert len(sel) == 100 and src["big"] == 20


def test_sports_source_exception():
    spec = [(SPORT, "varzesh3", 60)] + [(SPORT, f"s{i}", 8) for i in range(5)] + \
           [(POL, "varzesh3", 0)] + [(POL, f"s{i}", 20) for i in range(5)]
    pool = make_pool(spec)
    cfg = SamplerConfig(40)
    alloc = allocate(pool, cfg)
    sport_need = sum(c for (t, _), c in alloc.items() if t == SPORT)
    assert alloc[(SPORT, "varzesh3")] <= math.ceil(0.3 * sport_need)


def test_infeasible_reports_constraints():
    pool = make_pool([(POL, "only", 200)])
    with pytest.raises(SamplingInfeasible) as exc:
        sample_documents(pool, SamplerConfig(50))
    assert "only" in str(exc.value) and exc.value.constraints
    with pytest.raises(SamplingInfeasible, match="exceeds"):
        sample_documents(pool, SamplerConfig(500))


def test_unknown_topic_rejected():
    with pytest.raises(ValueError, match="unknown topic"):
        sample_documents([NewsDocMeta("x", "s", "کشاورزی", 0, 100)], SamplerConfig(1))


@pytest.fixture(scope="module")
def pool():
    return synthetic_pool(3000, seed=1)


def test_selection_properties(pool):
    cfg = SamplerConfig(300, seed=4)
    sel = sample_documents(pool, cfg)
    by_id = {d.id: d for d in pool}
    assert len(sel) == len(set(sel)) == 300
    assert all(by_id[i].length >= 70 for i in sel)
    src = Counter(by_id[i].source for i in sel)
    sports = sum(1 for i in sel if by_id[i].topic == SPORT)
    for s, c in src.items():
        if s == "varzesh3":
            assert c <= cfg.max_per_source + math.ceil(0.3 * sports)
        else:
            assert c <= cfg.max_per_source
    assert sample_documents(pool, cfg) == sel
    assert sample_documents(pool, SamplerConfig(300, seed=5)) != sel


def test_time_spread(pool):
    cfg = SamplerConfig(300, seed=0)
    sel = sample_documents(pool, cfg)
    rep = sampling_report(pool, sel, cfg)
    bins = list(rep.counts("time_bin").values())
    assert min(bins) >= 0.5 * max(bins)


def test_report_and_pool_io(tmp_path, pool):
    sel = sample_documents(pool, SamplerConfig(100))
    rep = sampling_report(pool, sel)
    assert sum(rep.counts("topic").values()) == 100
    assert sum(rep.counts("source", "pool").values()) == len(pool)
    assert rep.topic_tsv().startswith("topic\tdocuments\n")
    p = tmp_path / "pool.tsv"
    write_pool(pool, p)
    assert read_pool(p) == pool
