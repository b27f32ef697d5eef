import math

import numpy as np
import pytest

from hybridner.corpus import LABELS, O, Document, EntityType, Sentence, Tag, is_valid_iob
from hybridner.crf import (
    CrfModel, CrfObjective, FeatureConfig, FeatureIndex, ModelFormatError, TrainParams, decode,
    dump_features, extract_features, load_model, log_likelihood_and_gradient, log_partition,
    marginals, node_marginals, save_model, train, transition_mask, viterbi,
)
from hybridner.gazetteer import Gazetteer
from hybridner.synthetic import synthetic_corpus

from cases import random_small_model
from oracles import (brute_log_partition, brute_marginals, brute_viterbi, finite_difference,
                     relative_error)

# -- features -----------------------------------------------------------------

class TestFeatures:
    def test_affixes_capped_at_word_length(self):
        s = Sentence.from_words(["تهران"])
        feats = extract_features(s, 0, FeatureConfig(ngram_max=6))
        pre = {f.split("=", 1)[1] for f in feats if f.startswith("pre")}
        suf = {f.split("=", 1)[1] for f in feats if f.startswith("suf")}
        assert pre == {"ت", "ته", "تهر", "تهرا", "تهران"}
        assert suf == {"ن", "ان", "ران", "هران", "تهران"}

    def test_boundaries(self):
        s = Sentence.from_words("a b")
        assert "w[-1]=<BOS>" in extract_features(s, 0)
        assert "w[+1]=<EOS>" in extract_features(s, 1)
        assert "w[+1]=b" in extract_features(s, 0)

    def test_gazetteer_prefix_flag(self):
        g = Gazetteer.from_entries("org", EntityType.ORG, ["بانک مرکزی"])
        feats = extract_features(Sentence.from_words("بانک مرکزی"), 0, gazetteers=[g])
        assert "gaz:ORG:pre" in feats and "gaz:ORG:int" not in extract_features(
            Sentence.from_words("بانک مرکزی"), 0, gazetteers=[g])

    def test_families_switch_off(self):
        cfg = FeatureConfig(bias=False, lemma=False, pos=False, chunk=False, affixes=False)
        feats = extract_features(Sentence.from_words("a b c"), 1, cfg)
        assert feats == ["w[-1]=a", "w[0]=b", "w[+1]=c"]

    def test_bad_index_and_ngram(self):
        with pytest.raises(IndexError):
            extract_features(Sentence.from_words("a"), 1)
        with pytest.raises(ValueError):
            FeatureConfig(ngram_max=7)

    def test_unknown_features_are_absent(self):
        fi = FeatureIndex(["x", "y"])
        assert fi.ids(["y", "zzz", "x"]) == [1, 0]
        assert fi.get("zzz") is None


# -- objective ------------------------------------------------------------------

def test_zero_weights_uniform():
    model = CrfModel.empty(LABELS, FeatureIndex(["bias"]))
    s = Sentence.from_words(["x"], tags=["O"])
    ll, _ = log_likelihood_and_gradient(model, [s])
    assert ll == pytest.approx(-math.log(15), abs=1e-12)
    p = marginals(model, Sentence.from_words("x y z"))
    assert np.allclose(p, 1 / 15, atol=1e-12)


def test_zero_weights_decode_all_o():
    model = CrfModel.empty(LABELS, FeatureIndex())
    assert decode(model, Sentence.from_words("a b c")) == [O, O, O]


def test_label_outside_set_rejected():
    model = CrfModel.empty(LABELS[:3], FeatureIndex(["bias"]))
    with pytest.raises(ValueError, match="not in the model label set"):
        log_likelihood_and_gradient(model, [Sentence.from_words(["x"], tags=["B-LOC"])])


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(25):
        model, sents = random_small_model(rng)
        obj = CrfObjective(model, sents)
        _, grad = obj(model.theta)
        num = finite_difference(lambda th: obj(th)[0], model.theta)
        assert relative_error(grad, num) <= 1e-4


# -- inference vs enumeration ----------------------------------------------------

def _random_ET(rng, n, L, integer=False):
    if integer:
        return rng.integers(-2, 3, size=(n, L)).astype(float), rng.integers(-2, 3, size=(L, L)).astype(float)
    return rng.normal(size=(n, L)) * 2, rng.normal(size=(L, L)) * 2


@pytest.mark.parametrize("integer", [False, True])
def test_inference_matches_enumeration(integer):
    rng = np.random.default_rng(1 + integer)
    start, allowed = transition_mask(LABELS[:5])
    for _ in range(60):
        n = int(rng.integers(1, 5))
        E, T = _random_ET(rng, n, 5, integer)
        z = brute_log_partition(E, T)
        assert abs(log_partition(E, T) - z) <= 1e-8 * max(1.0, abs(z))
        assert np.max(np.abs(node_marginals(E, T) - brute_marginals(E, T))) <= 1e-8
        assert viterbi(E, T, start, allowed) == brute_viterbi(E, T, LABELS[:5])


def test_marginals_sum_to_one():
    rng = np.random.default_rng(2)
    for _ in range(20):
        E, T = _random_ET(rng, int(rng.integers(1, 30)), 15)
        assert np.allclose(node_marginals(E, T).sum(axis=1), 1.0, atol=1e-9)


def test_log_space_stability():
    rng = np.random.default_rng(3)
    E = rng.uniform(-50, 50, size=(500, 15)) * 8
    T = rng.uniform(-50, 50, size=(15, 15))
    z = log_partition(E, T)
    p = node_marginals(E, T)
    assert math.isfinite(z)
    assert np.all(np.isfinite(p)) and np.allclose(p.sum(axis=1), 1.0, atol=1e-9)
    start, allowed = transition_mask(LABELS)
    path = viterbi(E, T, start, allowed)
    assert is_valid_iob([LABELS[k] for k in path])


def test_constrained_decode_never_emits_o_then_i():
    rng = np.random.default_rng(4)
    i_cols = [k for k, t in enumerate(LABELS) if t.prefix == "I"]
    start, allowed = transition_mask(LABELS)
    for _ in range(200):
        E = rng.normal(size=(int(rng.integers(1, 12)), 15))
        E[:, i_cols] += 3.0  # push hard toward invalid I tags
        path = [LABELS[k] for k in viterbi(E, np.zeros((15, 15)), start, allowed)]
        assert is_valid_iob(path)


def test_empty_sentence_decodes_empty():
    assert decode(CrfModel.empty(), Sentence(())) == []


# -- training -------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_corpus():
    return synthetic_corpus(300, seed=11)


@pytest.fixture(scope="module")
def trained(small_corpus):
    return train(small_corpus, params=TrainParams(max_iter=100))


def test_objective_trace_monotone(trained):
    trace = np.array(trained.trace)
    assert len(trace) > 2
    assert np.all(np.diff(trace) >= -1e-9 * np.abs(trace[1:]))


def test_honorific_learned(trained):
    # a name the training data never contained
    s = Sentence((
        *Sentence.from_words(["آقای"], pos=["N"]).tokens,
        *Sentence.from_words(["فریدون"], pos=["N"]).tokens,
        *Sentence.from_words(["گفت"], pos=["V"]).tokens,
    ))
    s = Sentence(tuple(type(t)(t.surface, t.surface, t.pos, c) for t, c in zip(s.tokens, "BIO")))
    p = marginals(trained, s)
    assert p[1, trained.label_index("B-PER")] > 0.9
    assert decode(trained, s)[1] == Tag("B", EntityType.PER)


def test_training_deterministic(small_corpus, trained):
    again = train(small_corpus, params=TrainParams(max_iter=100))
    assert again == trained


def test_strong_regularization_shrinks_weights(small_corpus):
    norms = [np.linalg.norm(train(small_corpus[:5], params=TrainParams(sigma2=s2, max_iter=50)).theta)
             for s2 in (10.0, 1e-2, 1e-4)]
    assert norms[0] > norms[1] > norms[2]
    assert norms[2] < norms[1] / 10


def test_duplicated_data_same_decodes(small_corpus):
    base = small_corpus[:10]
    doubled = [Document(d.id, d.sentences + d.sentences) for d in base]
    # doubling the data is the same as doubling sigma2 on the likelihood scale
    a = train(base, params=TrainParams(sigma2=2.0))
    b = train(doubled, params=TrainParams(sigma2=1.0))
    test = [s for d in small_corpus[200:220] for s in d.sentences]
    assert [decode(a, s) for s in test] == [decode(b, s) for s in test]


def test_empty_corpus_rejected():
    with pytest.raises(ValueError, match="empty"):
        train([])


def test_single_label_corpus_warns():
    with pytest.warns(RuntimeWarning, match="single label"):
        train([Sentence.from_words("a b", tags="O O")], params=TrainParams(max_iter=5))


# -- persistence ------------------------------------------------------------------

def test_save_load_roundtrip(tmp_path, trained, small_corpus):
    p = tmp_path / "m.crf"
    save_model(trained, p)
    back = load_model(p)
    assert back == trained
    test = [s for d in small_corpus[:3] for s in d.sentences]
    assert [decode(back, s) for s in test] == [decode(trained, s) for s in test]


def test_truncated_model(tmp_path, trained):
    p = tmp_path / "m.crf"
    save_model(trained, p)
    data = p.read_bytes()
    p.write_bytes(data[: len(data) // 2])
    with pytest.raises(ModelFormatError, match="truncated"):
        load_model(p)


def test_version_mismatch(tmp_path):
    import json, zipfile
    p = tmp_path / "m.crf"
    save_model(CrfModel.empty(), p)
    with zipfile.ZipFile(p) as zf:
        members = {n: zf.read(n) for n in zf.namelist()}
    meta = json.loads(members["meta.json"])
    meta["version"] = 99
    members["meta.json"] = json.dumps(meta).encode()
    with zipfile.ZipFile(p, "w") as zf:
        for n, b in members.items():
            zf.writestr(n, b)
    with pytest.raises(ModelFormatError, match="version 99"):
        load_model(p)


def test_dump_features_sorted(trained):
    text = dump_features(trained)
    block = text.split("# label B-PER\n", 1)[1].split("# label", 1)[0].splitlines()
    names = [line.split("\t")[0] for line in block]
    assert names == sorted(names) and names
    assert "# transitions" in text
