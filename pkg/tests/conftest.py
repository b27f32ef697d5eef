import numpy as np
import pytest
from hypothesis import settings

from hybridner.corpus import LABELS, EntitySpan, EntityType, Sentence

# one line per acceptance check, printed after the run
VERDICTS = []

settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile("ci")

TYPES = list(EntityType)


def random_spans(rng, n, sentence_index=0):
    """Random sorted, non-overlapping spans within a sentence of length ``n``."""
    spans = []
    i = 0
    while i < n:
        if rng.random() < 0.4:
            length = int(rng.integers(1, min(4, n - i) + 1))
            spans.append(EntitySpan(sentence_index, i, i + length, TYPES[rng.integers(len(TYPES))]))
            i += length
        else:
            i += 1
    return spans


def random_raw_tags(rng, n):
    return [LABELS[k] for k in rng.integers(len(LABELS), size=n)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def honorific_sentence():
    return Sentence.from_words("آقای حسن روحانی گفت", pos="N N N V")


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
