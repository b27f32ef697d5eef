"""Random problem generators shared by the unit and acceptance suites."""
from hybridner.corpus import LABELS, O, EntityType, Sentence, Tag, Token
from hybridner.crf import CrfModel, FeatureConfig, FeatureIndex, sentence_features
from hybridner.rules import (Alternation, CharRule, Element, LexiconMember, Literal, PosEquals,
                             Rule, SurfaceRegex)

from oracles import iob_valid

WORDS = ("a", "b", "c", "d", "e")
SMALL_CFG = FeatureConfig(lemma=False, pos=False, chunk=False, affixes=False, gazetteer=False,
                          window=(-1, 0))


def random_labels(rng, max_labels=4):
    """``O`` plus B (and sometimes I) tags of random types, at most ``max_labels`` in all."""
    labels = [O]
    types = [t.etype for t in LABELS[1::2]]
    for k in rng.permutation(len(types)):
        if len(labels) >= max_labels:
            break
        labels.append(Tag("B", types[k]))
        if len(labels) < max_labels and rng.random() < 0.5:
            labels.append(Tag("I", types[k]))
    return tuple(labels)


def random_labeled_sentence(rng, labels, max_len=4):
    n = int(rng.integers(1, max_len + 1))
    words = [WORDS[k] for k in rng.integers(len(WORDS), size=n)]
    while True:
        y = rng.integers(len(labels), size=n)
        if iob_valid(labels, y):
            return Sentence.from_words(words, tags=[str(labels[k]) for k in y])


def random_small_model(rng, max_len=4, max_labels=4, n_sentences=3, scale=1.0):
    """A random-weight model (at most 20 features) and a labeled batch over its label set."""
    labels = random_labels(rng, max_labels)
    sents = [random_labeled_sentence(rng, labels, max_len) for _ in range(n_sentences)]
    index = FeatureIndex()
    for s in sents:
        for feats in sentence_features(s, SMALL_CFG):
            for f in feats:
                index.add(f)
    model = CrfModel.empty(labels, index, config=SMALL_CFG)
    theta = rng.normal(scale=scale, size=model.theta.size)
    return model.with_theta(theta), sents


# -- rule engine --------------------------------------------------------------

RULE_VOCAB = ["a", "b", "c", "۱۲"]
POS = ["N", "V"]


def random_predicate(rng, lex):
    kind = rng.integers(5)
    if kind == 0:
        return Literal(RULE_VOCAB[rng.integers(len(RULE_VOCAB))])
    if kind == 1:
        k = int(rng.integers(1, 3))
        return Alternation(tuple(sorted(set(rng.choice(RULE_VOCAB, size=k).tolist()))))
    if kind == 2:
        return PosEquals(POS[rng.integers(2)])
    if kind == 3:
        return LexiconMember("lex", lex)
    return SurfaceRegex(["[ab]", r"\d+", "c|a"][rng.integers(3)])


def random_rule(rng, rid, lex):
    while True:
        n = int(rng.integers(1, 4))
        els = tuple(Element(random_predicate(rng, lex), "1?+*"[rng.integers(4)]) for _ in range(n))
        if all(e.min_count == 0 for e in els):
            continue
        capture = None
        if rng.random() < 0.4:
            a = int(rng.integers(0, n))
            b = int(rng.integers(a + 1, n + 1))
            capture = (a, b)
        return Rule(rid, els, list(EntityType)[rng.integers(7)], int(rng.integers(0, 3)), capture)


def random_rule_case(rng):
    lex = frozenset(rng.choice(RULE_VOCAB, size=2, replace=False).tolist())
    rules = [random_rule(rng, f"r{i}", lex) for i in range(int(rng.integers(1, 5)))]
    char_rules = []
    if rng.random() < 0.5:
        char_rules.append(CharRule("c0", r"\d+", EntityType.DAT))
    n = int(rng.integers(1, 9))
    sent = Sentence(tuple(Token(RULE_VOCAB[rng.integers(4)], "", POS[rng.integers(2)]) for _ in range(n)))
    return sent, rules, char_rules
