import numpy as np
import pytest

from hybridner.corpus import EntitySpan, EntityType, Sentence
from hybridner.gazetteer import (
    Gazetteer, PartialFlags, dump_gazetteer, exact_match_spans, load_gazetteer,
    partial_match_features,
)

from oracles import brute_gazetteer_spans

LOC, ORG, PER = EntityType.LOC, EntityType.ORG, EntityType.PER


@pytest.fixture
def lists():
    return [
        Gazetteer.from_entries("loc", LOC, ["تهران", "ایران"]),
        Gazetteer.from_entries("org", ORG, ["دانشگاه تهران", "دانشگاه آزاد اسلامی"]),
    ]


def test_load_empty(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("")
    assert len(load_gazetteer(p, "PER")) == 0


def test_load_dedup_and_comments(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# people\nحسن روحانی\nحسن  روحانی\n\nظریف\n", encoding="utf-8")
    g = load_gazetteer(p, PER)
    assert len(g) == 2 and g.name == "g"


def test_trie_path(lists):
    org = lists[1]
    assert org.has_path(["دانشگاه", "آزاد", "اسلامی"])
    assert org.longest_match(["دانشگاه", "آزاد", "اسلامی"], 0) == 3
    assert not org.has_path(["آزاد"])


def test_dump_load_set_identity(tmp_path, lists):
    p = tmp_path / "org.txt"
    dump_gazetteer(lists[1], p)
    assert load_gazetteer(p, ORG, "org") == lists[1]


def test_empty_entry_rejected():
    with pytest.raises(ValueError):
        Gazetteer.from_entries("x", PER, [""])


class TestExact:
    def test_two_token_org(self, lists):
        s = Sentence.from_words("در دانشگاه تهران بود")
        assert exact_match_spans(s, lists) == [EntitySpan(0, 1, 3, ORG)]

    def test_no_list_words(self, lists):
        assert exact_match_spans(Sentence.from_words("هیچ چیز"), lists) == []

    def test_longer_wins_over_inner(self, lists):
        s = Sentence.from_words("دانشگاه تهران و تهران")
        assert exact_match_spans(s, lists) == [EntitySpan(0, 0, 2, ORG), EntitySpan(0, 3, 4, LOC)]

    def test_type_order_breaks_ties(self):
        gs = [Gazetteer.from_entries("o", ORG, ["x"]), Gazetteer.from_entries("l", LOC, ["x"])]
        assert exact_match_spans(Sentence.from_words("x"), gs) == [EntitySpan(0, 0, 1, LOC)]

    def test_matches_window_oracle(self):
        rng = np.random.default_rng(3)
        vocab = list("abcd")
        for _ in range(500):
            gs = []
            for et in rng.choice(list(EntityType), size=int(rng.integers(1, 4)), replace=False):
                entries = {" ".join(rng.choice(vocab, size=int(rng.integers(1, 4))).tolist())
                           for _ in range(int(rng.integers(1, 5)))}
                gs.append(Gazetteer.from_entries(str(et), et, entries))
            words = rng.choice(vocab, size=int(rng.integers(1, 11))).tolist()
            s = Sentence.from_words(words)
            assert exact_match_spans(s, gs) == brute_gazetteer_spans(words, gs)


class TestPartial:
    def test_prefix_token(self, lists):
        f = partial_match_features("دانشگاه", lists)
        assert f[ORG] == PartialFlags(prefix=True)

    def test_full_and_internal(self, lists):
        f = partial_match_features("تهران", lists)
        assert f[LOC].full and not f[LOC].prefix
        assert f[ORG].internal and not f[ORG].full

    def test_absent(self, lists):
        f = partial_match_features("ناموجود", lists)
        assert not any(f.values())

    def test_monotone_under_additions(self):
        rng = np.random.default_rng(5)
        vocab = list("abcde")
        for _ in range(200):
            entries = [" ".join(rng.choice(vocab, size=int(rng.integers(1, 4))).tolist()) for _ in range(4)]
            extra = [" ".join(rng.choice(vocab, size=int(rng.integers(1, 4))).tolist()) for _ in range(2)]
            small = [Gazetteer.from_entries("g", PER, entries)]
            big = [Gazetteer.from_entries("g", PER, entries + extra)]
            for w in vocab:
                a, b = partial_match_features(w, small)[PER], partial_match_features(w, big)[PER]
                assert (a.full <= b.full) and (a.prefix <= b.prefix) and (a.internal <= b.internal)
