"""
Linear-chain CRF tagger.

The model scores a label sequence ``y`` for a sentence ``x`` as::

    score(x, y) = sum_t E[t, y_t] + sum_{t>0} T[y_{t-1}, y_t]

where ``E[t, l]`` sums the emission weights of the features active at token
``t``.  Training maximizes the L2-penalized conditional log-likelihood with
L-BFGS; all dynamic programming runs in log space.  The probabilistic model
ranges over all label sequences, while :func:`decode` restricts the argmax
to well-formed IOB2 output.
"""
from __future__ import annotations

import io
import json
import logging
import warnings
import zipfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from .corpus import LABELS, Document, EntityType, Sentence, Tag, parse_tag
from .gazetteer import Gazetteer, partial_match_features

__all__ = [
    "FeatureConfig", "TrainParams", "FeatureIndex", "CrfModel", "CrfObjective", "ModelFormatError",
    "extract_features", "sentence_features", "transition_mask", "sequence_score",
    "forward_backward", "log_partition", "node_marginals", "viterbi",
    "log_likelihood_and_gradient", "train", "decode", "marginals", "save_model",
    "load_model", "dump_features", "MODEL_FORMAT", "MODEL_VERSION",
]

log = logging.getLogger(__name__)

MODEL_FORMAT = "hybridner-crf"
MODEL_VERSION = 1


@dataclass(frozen=True)
class FeatureConfig:
    """Which feature families to emit.  Every family can be switched off on its own."""

    bias: bool = True
    word: bool = True
    lemma: bool = True
    pos: bool = True
    chunk: bool = True
    window: tuple = (-1, 0, 1)
    ngram_max: int = 6
    affixes: bool = True
    gazetteer: bool = True

    def __post_init__(self):
        object.__setattr__(self, "window", tuple(int(o) for o in self.window))
        if not 1 <= self.ngram_max <= 6:
            raise ValueError(f"ngram_max must be in [1, 6], got {self.ngram_max}")


@dataclass(frozen=True)
class TrainParams:
    sigma2: float = 1.0
    max_iter: int = 200
    tol: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")


# -- features -----------------------------------------------------------------

def _offset_name(k: int) -> str:
    return f"+{k}" if k > 0 else str(k)


def extract_features(sentence: Sentence, i: int, cfg: FeatureConfig = FeatureConfig(),
                     gazetteers: Sequence[Gazetteer] = ()) -> list[str]:
    tokens = sentence.tokens
    if not 0 <= i < len(tokens):
        raise IndexError(f"token index {i} out of range for sentence of length {len(tokens)}")
    feats = ["bias"] if cfg.bias else []
    families = [(flag, name, attr) for flag, name, attr in (
        (cfg.word, "w", "surface"), (cfg.lemma, "lem", "lemma"),
        (cfg.pos, "pos", "pos"), (cfg.chunk, "chk", "chunk"),
    ) if flag]
    for _, name, attr in families:
        for k in cfg.window:
            j = i + k
            if j < 0:
                val = "<BOS>"
            elif j >= len(tokens):
                val = "<EOS>"
            else:
                val = getattr(tokens[j], attr)
            feats.append(f"{name}[{_offset_name(k)}]={val}")
    if cfg.affixes:
        word = tokens[i].surface
        top = min(cfg.ngram_max, len(word))
        feats.extend(f"pre{n}={word[:n]}" for n in range(1, top + 1))
        feats.extend(f"suf{n}={word[-n:]}" for n in range(1, top + 1))
    if cfg.gazetteer and gazetteers:
        flags = partial_match_features(tokens[i], gazetteers)
        for etype in EntityType:
            f = flags.get(etype)
            if f is None:
                continue
            if f.full:
                feats.append(f"gaz:{etype}:full")
            if f.prefix:
                feats.append(f"gaz:{etype}:pre")
            if f.internal:
                feats.append(f"gaz:{etype}:int")
    return feats


def sentence_features(sentence, cfg=FeatureConfig(), gazetteers=()):
    return [extract_features(sentence, i, cfg, gazetteers) for i in range(len(sentence))]


class FeatureIndex:
    """Bijection between feature strings and contiguous ids from 0."""

    def __init__(self, names: Iterable[str] = ()):
        self.names: list[str] = []
        self._ids: dict[str, int] = {}
        for n in names:
            self.add(n)

    def add(self, name: str) -> int:
        fid = self._ids.get(name)
        if fid is None:
            fid = self._ids[name] = len(self.names)
            self.names.append(name)
        return fid

    def get(self, name: str) -> Optional[int]:
        return self._ids.get(name)

    def ids(self, names: Iterable[str]) -> list[int]:
        """Ids of known features; unknown ones are dropped."""
        get = self._ids.get
        return [fid for fid in map(get, names) if fid is not None]

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self._ids

    def __eq__(self, other):
        return isinstance(other, FeatureIndex) and self.names == other.names


# -- model --------------------------------------------------------------------

@dataclass(eq=False)
class CrfModel:
    labels: tuple
    features: FeatureIndex
    emission: np.ndarray
    transition: np.ndarray
    config: FeatureConfig = field(default_factory=FeatureConfig)
    params: TrainParams = field(default_factory=TrainParams)
    gazetteers: tuple = ()
    trace: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.gazetteers = tuple(self.gazetteers)
        L = len(self.labels)
        if self.emission.shape != (len(self.features), L) or self.transition.shape != (L, L):
            raise ValueError("weight shapes do not match labels/features")
        self._label_ids = {t: k for k, t in enumerate(self.labels)}

    @classmethod
    def empty(cls, labels=LABELS, features=(), **kw) -> "CrfModel":
        fi = features if isinstance(features, FeatureIndex) else FeatureIndex(features)
        L = len(labels)
        return cls(tuple(labels), fi, np.zeros((len(fi), L)), np.zeros((L, L)), **kw)

    @property
    def n_labels(self):
        return len(self.labels)

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([self.emission.ravel(), self.transition.ravel()])

    def with_theta(self, theta: np.ndarray) -> "CrfModel":
        F, L = self.emission.shape
        W = np.asarray(theta[: F * L], dtype=float).reshape(F, L).copy()
        T = np.asarray(theta[F * L:], dtype=float).reshape(L, L).copy()
        return CrfModel(self.labels, self.features, W, T, self.config, self.params, self.gazetteers)

    def label_index(self, tag) -> int:
        if isinstance(tag, str):
            tag = parse_tag(tag)
        try:
            return self._label_ids[tag]
        except KeyError:
            raise ValueError(f"label {tag} is not in the model label set") from None

    def feature_ids(self, sentence: Sentence) -> list[list[int]]:
        return [self.features.ids(f) for f in sentence_features(sentence, self.config, self.gazetteers)]

    def emissions(self, sentence: Sentence) -> np.ndarray:
        rows = self.feature_ids(sentence)
        E = np.zeros((len(rows), self.n_labels))
        for t, ids in enumerate(rows):
            if ids:
                E[t] = self.emission[ids].sum(axis=0)
        return E

    def __eq__(self, other):
        if not isinstance(other, CrfModel):
            return NotImplemented
        return (self.labels == other.labels and self.features == other.features
                and np.array_equal(self.emission, other.emission)
                and np.array_equal(self.transition, other.transition)
                and self.config == other.config and self.params == other.params
                and self.gazetteers == other.gazetteers)


# -- dense inference on emission/transition arrays -----------------------------

def _lse(a, axis):
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


def transition_mask(labels: Sequence[Tag]):
    """IOB2 constraints as boolean arrays ``(allowed_start[L], allowed[L, L])``.

    ``I-X`` may only follow ``B-X`` or ``I-X`` and may not open a sentence.
    """
    L = len(labels)
    start = np.array([t.prefix != "I" for t in labels])
    allowed = np.ones((L, L), dtype=bool)
    for j, cur in enumerate(labels):
        if cur.prefix == "I":
            for i, prev in enumerate(labels):
                allowed[i, j] = prev.prefix != "O" and prev.etype is cur.etype
    return start, allowed


def sequence_score(E: np.ndarray, T: np.ndarray, y: Sequence[int]) -> float:
    y = np.asarray(y)
    s = E[np.arange(len(y)), y].sum()
    if len(y) > 1:
        s += T[y[:-1], y[1:]].sum()
    return float(s)


def forward_backward(E: np.ndarray, T: np.ndarray):
    """Log-space forward and backward tables and ``log Z`` for one sentence."""
    n, L = E.shape
    alpha = np.empty((n, L))
    beta = np.zeros((n, L))
    alpha[0] = E[0]
    for t in range(1, n):
        alpha[t] = _lse(alpha[t - 1][:, None] + T, axis=0) + E[t]
    for t in range(n - 2, -1, -1):
        beta[t] = _lse(T + (E[t + 1] + beta[t + 1])[None, :], axis=1)
    return alpha, beta, float(_lse(alpha[-1], axis=0))


def log_partition(E, T) -> float:
    if len(E) == 0:
        return 0.0
    return forward_backward(E, T)[2]


def node_marginals(E, T) -> np.ndarray:
    if len(E) == 0:
        return np.zeros((0, T.shape[0]))
    alpha, beta, logz = forward_backward(E, T)
    return np.exp(alpha + beta - logz)


def viterbi(E, T, allowed_start=None, allowed=None) -> list[int]:
    """Best label indices.  Ties go to the lowest label index, from the last position backwards."""
    n, L = E.shape
    if n == 0:
        return []
    start_pen = np.zeros(L) if allowed_start is None else np.where(allowed_start, 0.0, -np.inf)
    trans = T if allowed is None else np.where(allowed, T, -np.inf)
    delta = E[0] + start_pen
    back = np.zeros((n, L), dtype=int)
    for t in range(1, n):
        cand = delta[:, None] + trans
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(L)] + E[t]
    path = [int(np.argmax(delta))]
    for t in range(n - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    return path[::-1]


# -- batched objective ----------------------------------------------------------

class _Batch:
    """Sentences interned to feature ids, bucketed by length for padded forward-backward."""

    def __init__(self, id_rows: list[list[list[int]]], gold: list[list[int]], n_features: int,
                 bucket_size: int = 256):
        lengths = np.array([len(s) for s in id_rows], dtype=int)
        keep = np.flatnonzero(lengths > 0)
        self.n_tokens = int(lengths.sum())
        indptr, indices, y = [0], [], []
        for s in keep:
            for ids in id_rows[s]:
                indices.extend(ids)
                indptr.append(len(indices))
            y.extend(gold[s])
        data = np.ones(len(indices))
        self.X = sp.csr_matrix((data, np.array(indices, dtype=np.int64), np.array(indptr)),
                               shape=(self.n_tokens, n_features))
        self.XT = self.X.T.tocsr()
        self.y = np.array(y, dtype=int)
        offsets = np.concatenate([[0], np.cumsum(lengths[keep])])
        order = np.argsort(lengths[keep], kind="stable")
        self.buckets = []
        for b in range(0, len(order), bucket_size):
            members = order[b:b + bucket_size]
            lens = lengths[keep][members]
            tmax = int(lens.max())
            pos = np.arange(tmax)
            mask = pos[None, :] < lens[:, None]
            rows = np.where(mask, offsets[members][:, None] + pos[None, :], 0)
            self.buckets.append((rows, mask, lens))

    def objective(self, W: np.ndarray, T: np.ndarray):
        """Log-likelihood and its gradient (emission, transition), no penalty."""
        L = T.shape[0]
        Eflat = np.asarray(self.X @ W)
        ll = Eflat[np.arange(self.n_tokens), self.y].sum()
        node = np.zeros_like(Eflat)
        gT = np.zeros_like(T)
        for rows, mask, lens in self.buckets:
            B, tmax = rows.shape
            E = np.where(mask[..., None], Eflat[rows], 0.0)
            y = self.y[rows]
            alpha = np.empty((B, tmax, L))
            beta = np.zeros((B, tmax, L))
            alpha[:, 0] = E[:, 0]
            for t in range(1, tmax):
                a = _lse(alpha[:, t - 1, :, None] + T[None], axis=1) + E[:, t]
                alpha[:, t] = np.where(mask[:, t, None], a, alpha[:, t - 1])
            for t in range(tmax - 2, -1, -1):
                b = _lse(T[None] + (E[:, t + 1] + beta[:, t + 1])[:, None, :], axis=2)
                beta[:, t] = np.where(mask[:, t + 1, None], b, 0.0)
            logz = _lse(alpha[:, -1], axis=1)
            ll -= logz.sum()
            marg = np.exp(alpha + beta - logz[:, None, None])
            node[rows[mask]] = marg[mask]
            for t in range(tmax - 1):
                live = mask[:, t + 1]
                if not live.any():
                    break
                pair = (alpha[live, t, :, None] + T[None]
                        + (E[live, t + 1] + beta[live, t + 1])[:, None, :]
                        - logz[live, None, None])
                gT -= np.exp(pair).sum(axis=0)
                np.add.at(gT, (y[live, t], y[live, t + 1]), 1.0)
            if tmax > 1:
                ll += T[y[:, :-1], y[:, 1:]][mask[:, 1:]].sum()
        onehot = np.zeros_like(Eflat)
        onehot[np.arange(self.n_tokens), self.y] = 1.0
        gW = np.asarray(self.XT @ (onehot - node))
        return float(ll), gW, gT


def _corpus_sentences(corpus) -> list[Sentence]:
    out = []
    for item in corpus:
        if isinstance(item, Document):
            out.extend(item.sentences)
        else:
            out.append(item)
    return out


def _gold_indices(model: CrfModel, sentences) -> list[list[int]]:
    gold = []
    for s in sentences:
        if s.gold_tags is None:
            raise ValueError("training sentence has no gold tags")
        gold.append([model.label_index(t) for t in s.gold_tags])
    return gold


class CrfObjective:
    """Penalized log-likelihood of a fixed labeled batch as a function of ``theta``.

    Features are interned once with ``model``'s index; calling the object with a
    parameter vector laid out like :attr:`CrfModel.theta` returns
    ``(value, gradient)``.
    """

    def __init__(self, model: CrfModel, sentences, sigma2: Optional[float] = None):
        sentences = _corpus_sentences(sentences)
        self.sigma2 = model.params.sigma2 if sigma2 is None else sigma2
        self.shape = model.emission.shape
        gold = _gold_indices(model, sentences)
        self.batch = _Batch([model.feature_ids(s) for s in sentences], gold, len(model.features))

    def __call__(self, theta: np.ndarray):
        F, L = self.shape
        W = theta[: F * L].reshape(F, L)
        T = theta[F * L:].reshape(L, L)
        return _penalized(self.batch, W, T, self.sigma2)


def log_likelihood_and_gradient(model: CrfModel, sentences, sigma2: Optional[float] = None):
    """Penalized log-likelihood ``sum log p(y|x) - |w|^2 / (2 sigma2)`` and its gradient.

    The gradient is laid out like :attr:`CrfModel.theta`.
    """
    return CrfObjective(model, sentences, sigma2)(model.theta)


def _penalized(batch, W, T, sigma2):
    ll, gW, gT = batch.objective(W, T)
    theta = np.concatenate([W.ravel(), T.ravel()])
    value = ll - theta @ theta / (2.0 * sigma2)
    grad = np.concatenate([gW.ravel(), gT.ravel()]) - theta / sigma2
    return value, grad


def train(corpus, cfg: FeatureConfig = FeatureConfig(), params: TrainParams = TrainParams(),
          gazetteers: Sequence[Gazetteer] = (), labels: Sequence[Tag] = LABELS) -> CrfModel:
    """Fit a CRF on gold-tagged sentences (or documents) by batch L-BFGS from zero weights."""
    sentences = [s for s in _corpus_sentences(corpus) if len(s)]
    if not sentences:
        raise ValueError("cannot train on an empty corpus")
    index = FeatureIndex()
    id_rows = []
    for s in sentences:
        id_rows.append([[index.add(f) for f in feats]
                        for feats in sentence_features(s, cfg, gazetteers)])
    model = CrfModel.empty(labels, index, config=cfg, params=params, gazetteers=tuple(gazetteers))
    gold = _gold_indices(model, sentences)
    if len({k for g in gold for k in g}) < 2:
        warnings.warn("training corpus uses a single label; the model will be degenerate",
                      RuntimeWarning, stacklevel=2)
    batch = _Batch(id_rows, gold, len(index))
    F, L = len(index), len(labels)
    trace = []

    def fun(theta):
        W = theta[: F * L].reshape(F, L)
        T = theta[F * L:].reshape(L, L)
        value, grad = _penalized(batch, W, T, params.sigma2)
        return -value, -grad

    def callback(intermediate_result):
        trace.append(-float(intermediate_result.fun))

    theta0 = np.zeros(F * L + L * L)
    trace.append(-fun(theta0)[0])
    res = scipy.optimize.minimize(
        fun, theta0, jac=True, method="L-BFGS-B", callback=callback,
        options={"maxiter": params.max_iter, "gtol": params.tol, "ftol": 1e-14, "maxcor": 10},
    )
    log.info("CRF training: %d features, %d iterations, objective %.6g (%s)",
             F, res.nit, -res.fun, res.message)
    model = model.with_theta(res.x)
    model.trace = trace
    return model


# -- decoding -----------------------------------------------------------------

def decode(model: CrfModel, sentence: Sentence) -> list[Tag]:
    if len(sentence) == 0:
        return []
    start, allowed = transition_mask(model.labels)
    path = viterbi(model.emissions(sentence), model.transition, start, allowed)
    return [model.labels[k] for k in path]


def marginals(model: CrfModel, sentence: Sentence) -> np.ndarray:
    """Per-token label probabilities, shape ``(len(sentence), n_labels)``."""
    return node_marginals(model.emissions(sentence), model.transition)


# -- persistence --------------------------------------------------------------

class ModelFormatError(ValueError):
    pass


def save_model(model: CrfModel, path) -> None:
    """Write a zip container: ``meta.json`` plus ``.npy`` arrays for features and weights."""
    meta = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "labels": [str(t) for t in model.labels],
        "config": asdict(model.config),
        "params": asdict(model.params),
        "gazetteers": [
            {"name": g.name, "etype": g.etype.value, "entries": sorted(" ".join(e) for e in g.entries)}
            for g in model.gazetteers
        ],
    }
    arrays = {
        "features": np.array(model.features.names, dtype=str),
        "emission": model.emission,
        "transition": model.transition,
    }
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("meta.json", json.dumps(meta, ensure_ascii=False, indent=1))
        for name, arr in arrays.items():
            buf = io.BytesIO()
            np.save(buf, arr, allow_pickle=False)
            zf.writestr(f"{name}.npy", buf.getvalue())


def load_model(path) -> CrfModel:
    path = Path(path)
    try:
        with zipfile.ZipFile(path) as zf:
            meta = json.loads(zf.read("meta.json").decode("utf-8"))
            if meta.get("format") != MODEL_FORMAT:
                raise ModelFormatError(f"{path}: not a {MODEL_FORMAT} model")
            if meta.get("version") != MODEL_VERSION:
                raise ModelFormatError(
                    f"{path}: model version {meta.get('version')} unsupported (expected {MODEL_VERSION})"
                )
            arrays = {n: np.load(io.BytesIO(zf.read(f"{n}.npy")), allow_pickle=False)
                      for n in ("features", "emission", "transition")}
    except (zipfile.BadZipFile, KeyError, EOFError, ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: corrupt or truncated model file ({exc})") from None
    gazetteers = tuple(
        Gazetteer.from_entries(g["name"], EntityType(g["etype"]), g["entries"])
        for g in meta["gazetteers"]
    )
    return CrfModel(
        labels=tuple(parse_tag(t) for t in meta["labels"]),
        features=FeatureIndex(str(n) for n in arrays["features"]),
        emission=arrays["emission"].astype(float),
        transition=arrays["transition"].astype(float),
        config=FeatureConfig(**meta["config"]),
        params=TrainParams(**meta["params"]),
        gazetteers=gazetteers,
    )


def dump_features(model: CrfModel, min_abs: float = 0.0) -> str:
    """``feature TAB weight`` per label block, features sorted, then the transition table."""
    lines = []
    order = sorted(range(len(model.features)), key=model.features.names.__getitem__)
    for k, label in enumerate(model.labels):
        lines.append(f"# label {label}")
        for fid in order:
            w = model.emission[fid, k]
            if w != 0.0 and abs(w) >= min_abs:
                lines.append(f"{model.features.names[fid]}\t{w:.6g}")
    lines.append("# transitions")
    for i, a in enumerate(model.labels):
        for j, b in enumerate(model.labels):
            lines.append(f"{a}->{b}\t{model.transition[i, j]:.6g}")
    return "\n".join(lines) + "\n"
