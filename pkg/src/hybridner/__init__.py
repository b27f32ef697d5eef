"""Hybrid named entity recognition for pre-tokenized Persian text.

Rule-based, gazetteer and linear-chain CRF taggers, priority-based
combination of their outputs, evaluation and inter-annotator agreement, and
a corpus-construction sampler.
"""
from .corpus import (
    LABELS, O, ColumnFormatError, Document, DocMeta, EntitySpan, EntityType, IOBError,
    Sentence, Tag, Token, corpus_stats, decode_iob, encode_iob, is_valid_iob, parse_tag,
    parse_tags, read_column_file, repair_iob, write_column_file,
)
from .crf import (
    CrfModel, FeatureConfig, TrainParams, decode, extract_features, load_model, marginals,
    save_model, train,
)
from .evaluation import agreement, entity_prf, kfold_split, report, token_confusion
from .gazetteer import Gazetteer, exact_match_spans, load_gazetteer, partial_match_features
from .hybrid import CombineStrategy, combine, run_strategy, run_system
from .resources import default_gazetteers, default_ruleset
from .rules import RuleSet, compile_rule, load_ruleset, match_rules
from .sampler import NewsDocMeta, SamplerConfig, SamplingInfeasible, sample_documents

__version__ = "0.1.0"

__all__ = [
    "LABELS",
    "O",
    "ColumnFormatError",
    "Document",
    "DocMeta",
    "EntitySpan",
    "EntityType",
    "IOBError",
    "Sentence",
    "Tag",
    "Token",
    "corpus_stats",
    "decode_iob",
    "encode_iob",
    "is_valid_iob",
    "parse_tag",
    "parse_tags",
    "read_column_file",
    "repair_iob",
    "write_column_file",
    "CrfModel",
    "FeatureConfig",
    "TrainParams",
    "decode",
    "extract_features",
    "load_model",
    "marginals",
    "save_model",
    "train",
    "agreement",
    "entity_prf",
    "kfold_split",
    "report",
    "token_confusion",
    "Gazetteer",
    "exact_match_spans",
    "load_gazetteer",
    "partial_match_features",
    "CombineStrategy",
    "combine",
    "run_strategy",
    "run_system",
    "default_gazetteers",
    "default_ruleset",
    "RuleSet",
    "compile_rule",
    "load_ruleset",
    "match_rules",
    "NewsDocMeta",
    "SamplerConfig",
    "SamplingInfeasible",
    "sample_documents",
]
