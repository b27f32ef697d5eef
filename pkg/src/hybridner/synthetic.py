"""
Synthetic data with planted, rule-governed structure.

* :func:`synthetic_corpus` builds tagged Persian-like sentences where PER is
  exactly the noun run after an honorific, ORG comes from a fixed list and
  DAT is a ``yyyy/m/d`` token in Persian digits.
* :func:`synthetic_pool` builds news-document metadata with skewed topic and
  source shares for exercising the sampler.
"""
from __future__ import annotations

import numpy as np

from .corpus import Document, Sentence, Token, encode_iob, EntitySpan, EntityType
from .sampler import TOPICS, NewsDocMeta

__all__ = ["HONORIFICS", "FIRST_NAMES", "LAST_NAMES", "ORGANIZATIONS", "persian_digits",
           "synthetic_sentence", "synthetic_corpus", "synthetic_pool", "SOURCES"]

HONORIFICS = ("آقای", "خانم", "آقایان")
FIRST_NAMES = ("حسن", "علی", "مریم", "زهرا", "محمد", "رضا", "سارا", "مهدی", "فاطمه", "حمید",
               "نرگس", "امیر", "لیلا", "بهرام", "شیرین", "کاوه", "پروین", "داریوش")
LAST_NAMES = ("روحانی", "احمدی", "کریمی", "حسینی", "رضایی", "موسوی", "صادقی", "نوری", "جعفری",
              "کاظمی", "رحیمی", "یزدانی", "طاهری", "شریفی", "بهرامی", "فرهادی")
ORGANIZATIONS = (
    ("دانشگاه", "تهران"), ("بانک", "مرکزی"), ("سازمان", "ملل"), ("وزارت", "نفت"),
    ("شرکت", "ملی", "گاز"), ("دانشگاه", "آزاد", "اسلامی"), ("مجلس",), ("فیفا",),
    ("صدا", "و", "سیما"), ("بانک", "جهانی"), ("اتحادیه", "اروپا"), ("یونسکو",),
)
# (surface, pos) fillers; none of them is a noun so honorific runs end cleanly
VERBS = (("گفت", "V"), ("کرد", "V"), ("رفت", "V"), ("است", "V"), ("شد", "V"), ("دارد", "V"),
         ("اعلام", "Ne"), ("کرده", "V"), ("گزارش", "Ne"), ("داد", "V"))
FILLERS = (("در", "P"), ("به", "P"), ("از", "P"), ("با", "P"), ("و", "CONJ"), ("که", "CONJ"),
           ("این", "DET"), ("آن", "DET"), ("امروز", "ADV"), ("نیز", "ADV"), ("خبر", "Ne"),
           ("جلسه", "Ne"), ("نشست", "Ne"), ("همچنین", "ADV"), ("روز", "Ne"), ("تاریخ", "Ne"),
           ("برای", "P"), ("درباره", "P"), ("مهم", "AJ"), ("جدید", "AJ"))

_DIGITS = str.maketrans("0123456789", "۰۱۲۳۴۵۶۷۸۹")


def persian_digits(text: str) -> str:
    return text.translate(_DIGITS)


def _tok(surface, pos, chunk="O"):
    return Token(surface, surface, pos, chunk)


def synthetic_sentence(rng: np.random.Generator, person_names=(FIRST_NAMES, LAST_NAMES)) -> Sentence:
    """One sentence of fillers with 1-3 planted entities."""
    tokens: list[Token] = []
    spans: list[EntitySpan] = []

    def fillers(k):
        for _ in range(k):
            s, p = FILLERS[rng.integers(len(FILLERS))]
            tokens.append(_tok(s, p))

    fillers(int(rng.integers(0, 3)))
    for _ in range(int(rng.integers(1, 4))):
        kind = rng.integers(3)
        if kind == 0:
            tokens.append(_tok(HONORIFICS[rng.integers(len(HONORIFICS))], "N", "B"))
            first, last = person_names
            names = [first[rng.integers(len(first))]]
            if rng.random() < 0.6:
                names.append(last[rng.integers(len(last))])
            start = len(tokens)
            for j, n in enumerate(names):
                tokens.append(_tok(n, "N", "I"))
            spans.append(EntitySpan(0, start, len(tokens), EntityType.PER))
            s, p = VERBS[rng.integers(len(VERBS))]
            tokens.append(_tok(s, p))
        elif kind == 1:
            org = ORGANIZATIONS[rng.integers(len(ORGANIZATIONS))]
            start = len(tokens)
            for j, w in enumerate(org):
                tokens.append(_tok(w, "N", "B" if j == 0 else "I"))
            spans.append(EntitySpan(0, start, len(tokens), EntityType.ORG))
        else:
            date = f"{rng.integers(1380, 1400)}/{rng.integers(1, 13)}/{rng.integers(1, 32)}"
            tokens.append(_tok("تاریخ", "Ne"))
            tokens.append(_tok(persian_digits(date), "NUM"))
            spans.append(EntitySpan(0, len(tokens) - 1, len(tokens), EntityType.DAT))
        fillers(int(rng.integers(1, 4)))
    s, p = VERBS[rng.integers(len(VERBS))]
    tokens.append(_tok(s, p))
    return Sentence(tuple(tokens), tuple(encode_iob(spans, len(tokens))))


def synthetic_corpus(n_sentences: int = 2000, sentences_per_doc: int = 10, seed: int = 0) -> list[Document]:
    rng = np.random.default_rng(seed)
    docs = []
    for d, start in enumerate(range(0, n_sentences, sentences_per_doc)):
        k = min(sentences_per_doc, n_sentences - start)
        docs.append(Document(f"syn{d:05d}", tuple(synthetic_sentence(rng) for _ in range(k))))
    return docs


SOURCES = ("irna", "isna", "mehrnews", "tasnim", "farsnews", "khabaronline", "yjc",
           "hamshahri", "asriran", "varzesh3")


def synthetic_pool(n: int = 10_000, seed: int = 0, dominant_share: float = 0.5) -> list[NewsDocMeta]:
    """Document metadata with one dominant source and a sports-only source.

    Lengths are log-normal per topic; about 3% of documents fall below 70
    characters so filtering has something to do.
    """
    rng = np.random.default_rng(seed)
    topic_p = np.array([0.30, 0.20, 0.18, 0.12, 0.08, 0.12])
    topic_len = {t: (m, s) for t, m, s in zip(TOPICS, (7.2, 7.0, 6.4, 7.1, 6.9, 6.8),
                                               (0.45, 0.5, 0.55, 0.5, 0.45, 0.5))}
    others = [s for s in SOURCES if s not in ("irna", "varzesh3")]
    t0 = 1_451_606_400  # 2016-01-01
    span = 300 * 86_400
    pool = []
    for i in range(n):
        topic = TOPICS[rng.choice(len(TOPICS), p=topic_p)]
        if topic == "ورزش" and rng.random() < 0.6:
            source = "varzesh3"
        elif rng.random() < dominant_share:
            source = "irna"
        else:
            source = others[rng.integers(len(others))]
        mu, sigma = topic_len[topic]
        length = int(max(1, round(rng.lognormal(mu, sigma))))
        if rng.random() < 0.03:
            length = int(rng.integers(1, 70))
        pool.append(NewsDocMeta(f"d{i:06d}", source, topic, t0 + int(rng.integers(span)), length))
    return pool
