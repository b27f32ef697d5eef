import pytest
from hypothesis import given, strategies as st

from hybridner.corpus import (
    LABELS, O, ColumnFormatError, Document, DocMeta, EntitySpan, EntityType, IOBError,
    Sentence, Tag, Token, corpus_stats, decode_iob, encode_iob, format_columns, is_valid_iob,
    parse_columns, parse_tag, parse_tags, read_column_file, repair_iob, write_column_file,
)

from conftest import random_raw_tags, random_spans

PER, LOC, ORG, DAT = EntityType.PER, EntityType.LOC, EntityType.ORG, EntityType.DAT


def test_entity_types_closed_set():
    assert [t.value for t in EntityType] == ["PER", "LOC", "ORG", "DAT", "TIM", "PCT", "MON"]
    assert len(LABELS) == 15 and LABELS[0] == O


@pytest.mark.parametrize("text", [str(t) for t in LABELS])
def test_tag_roundtrip(text):
    assert str(parse_tag(text)) == text


@pytest.mark.parametrize("bad", ["B-XYZ", "I-", "b-PER", "X-PER", ""])
def test_tag_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_tag(bad)


def test_token_invariants():
    with pytest.raises(ValueError):
        Token("")
    with pytest.raises(ValueError):
        Token("دو کلمه")


class TestEncode:
    def test_empty(self):
        assert encode_iob([], 3) == [O, O, O]

    def test_coordinated_location_is_one_span(self):
        # «آمریکای شمالی و جنوبی» is a single location
        tags = encode_iob([EntitySpan(0, 0, 4, LOC)], 4)
        assert tags == parse_tags("B-LOC I-LOC I-LOC I-LOC")

    def test_adjacent_spans_start_with_b(self):
        tags = encode_iob([EntitySpan(0, 0, 1, PER), EntitySpan(0, 1, 2, LOC)], 2)
        assert tags == parse_tags("B-PER B-LOC")

    def test_overlap_rejected(self):
        with pytest.raises(IOBError) as exc:
            encode_iob([EntitySpan(0, 0, 2, PER), EntitySpan(0, 1, 3, LOC)], 3)
        assert exc.value.index == 1

    def test_out_of_bounds_rejected(self):
        with pytest.raises(IOBError):
            encode_iob([EntitySpan(0, 2, 4, PER)], 3)


class TestDecode:
    def test_all_o(self):
        assert decode_iob([O, O, O]) == []

    def test_long_org(self):
        # «دانشکده برق و کامپیوتر دانشگاه تهران» carries a single label
        spans = decode_iob(parse_tags("B-ORG I-ORG I-ORG I-ORG I-ORG"))
        assert spans == [EntitySpan(0, 0, 5, ORG)]

    def test_type_switch_under_i(self):
        with pytest.raises(IOBError) as exc:
            decode_iob(parse_tags("B-PER I-LOC"))
        assert exc.value.index == 1

    def test_dangling_i(self):
        with pytest.raises(IOBError) as exc:
            decode_iob(parse_tags("O O I-DAT"))
        assert exc.value.index == 2

    def test_sentence_index_propagates(self):
        assert decode_iob(parse_tags("O B-DAT"), 7) == [EntitySpan(7, 1, 2, DAT)]


class TestRepair:
    @pytest.mark.parametrize("raw, fixed", [
        ("I-PER I-PER", "B-PER I-PER"),
        ("B-LOC I-ORG", "B-LOC B-ORG"),
        ("B-DAT I-DAT O", "B-DAT I-DAT O"),
        ("O I-MON B-MON I-MON", "O B-MON B-MON I-MON"),
    ])
    def test_examples(self, raw, fixed):
        assert repair_iob(parse_tags(raw)) == parse_tags(fixed)

    @given(st.lists(st.sampled_from(LABELS), max_size=12))
    def test_idempotent_and_valid(self, tags):
        once = repair_iob(tags)
        assert is_valid_iob(once)
        assert repair_iob(once) == once
        if is_valid_iob(tags):
            assert once == list(tags)


def test_roundtrip_random(rng):
    for _ in range(500):
        n = int(rng.integers(0, 15))
        spans = random_spans(rng, n)
        assert decode_iob(encode_iob(spans, n)) == spans


def test_repair_random(rng):
    for _ in range(500):
        raw = random_raw_tags(rng, int(rng.integers(0, 12)))
        assert repair_iob(repair_iob(raw)) == repair_iob(raw)


# -- column files -------------------------------------------------------------

def _doc(doc_id="d1", meta=None):
    s1 = Sentence((Token("آقای", "آقا", "N", "B"), Token("حسن", "حسن", "N", "I"),
                   Token("روحانی", "روحانی", "N", "I")), tuple(parse_tags("O B-PER I-PER")))
    s2 = Sentence((Token("تهران", "تهران", "N", "B"),), (Tag("B", LOC),))
    return Document(doc_id, (s1, s2), meta)


def test_three_line_block():
    docs = parse_columns("a\ta\tN\tB\tO\nb\tb\tN\tI\tO\nc\tc\tV\tO\tO\n\n")
    assert len(docs) == 1 and len(docs[0].sentences) == 1
    assert len(docs[0].sentences[0].tokens) == 3


def test_untagged_input():
    docs = parse_columns("a\ta\tN\tB\nb\tb\tN\tI\n")
    assert docs[0].sentences[0].gold_tags is None


def test_write_read_write_is_stable(tmp_path):
    docs = [_doc("d1", DocMeta("irna", "فرهنگ و هنر", 1462060800)), _doc("d2")]
    p1, p2 = tmp_path / "a.conll", tmp_path / "b.conll"
    write_column_file(docs, p1)
    back = read_column_file(p1)
    assert back == docs
    write_column_file(back, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_hashtag_token_is_not_a_comment():
    docs = parse_columns("-DOCSTART- x\n#ایران\t#ایران\tN\tO\tO\n\n")
    assert docs[0].sentences[0].tokens[0].surface == "#ایران"


def test_bad_tag_names_line(tmp_path):
    p = tmp_path / "bad.conll"
    p.write_text("-DOCSTART- d\n\na\ta\tN\tO\tO\nb\tb\tN\tO\tB-XYZ\n\n", encoding="utf-8")
    with pytest.raises(ColumnFormatError) as exc:
        read_column_file(p)
    assert exc.value.line == 4
    assert ":4:" in str(exc.value)


def test_wrong_column_count():
    with pytest.raises(ColumnFormatError) as exc:
        parse_columns("a\tb\tc\n")
    assert exc.value.line == 1


def test_invalid_iob_in_file_names_line():
    with pytest.raises(ColumnFormatError) as exc:
        parse_columns("a\ta\tN\tO\tO\nb\tb\tN\tO\tI-PER\n")
    assert exc.value.line == 2


def test_non_utf8(tmp_path):
    p = tmp_path / "latin.conll"
    p.write_bytes(b"a\ta\tN\tO\tO\n\xff\tb\tN\tO\tO\n")
    with pytest.raises(ColumnFormatError) as exc:
        read_column_file(p)
    assert exc.value.line == 2


def test_empty_file_roundtrip(tmp_path):
    p = tmp_path / "empty.conll"
    p.write_text("")
    assert read_column_file(p) == []
    assert format_columns([]) == ""


# -- statistics ---------------------------------------------------------------

def test_stats_all_o():
    s = Sentence.from_words("a b c d", tags="O O O O")
    st_ = corpus_stats([Document("d", (s,))])
    assert st_.tokens == 4 and st_.entity_tokens == 0 and st_.entities == 0
    assert all(v.entities == v.tokens == v.unique == 0 for v in st_.per_type.values())


def test_stats_fixture_with_repeated_person():
    # hand count: three PER spans, two of them «حسن روحانی»
    d1 = Document("a", (
        Sentence.from_words("آقای حسن روحانی گفت", tags="O B-PER I-PER O"),
        Sentence.from_words("حسن روحانی و ظریف", tags="B-PER I-PER O B-PER"),
    ))
    d2 = Document("b", (Sentence.from_words("در تهران", tags="O B-LOC"),))
    st_ = corpus_stats([d1, d2])
    assert st_.per_type[PER].entities == 3
    assert st_.per_type[PER].unique == 2
    assert st_.per_type[PER].tokens == 5
    assert st_.per_type[LOC].entities == 1
    assert st_.documents == 2 and st_.sentences == 3 and st_.tokens == 10
    assert st_.entity_tokens == sum(v.tokens for v in st_.per_type.values()) == 6


def test_stats_requires_gold():
    with pytest.raises(ValueError):
        corpus_stats([Document("d", (Sentence.from_words("a b"),))])


def test_stats_token_total_matches_spans(rng):
    sents = []
    for _ in range(50):
        n = int(rng.integers(1, 12))
        sents.append(Sentence.from_words([f"w{int(k)}" for k in rng.integers(5, size=n)],
                                         tags=[str(t) for t in encode_iob(random_spans(rng, n), n)]))
    st_ = corpus_stats([Document("d", tuple(sents))])
    assert st_.entity_tokens == sum(len(sp) for s in sents for sp in decode_iob(s.gold_tags))
