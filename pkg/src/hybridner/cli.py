"""
Command-line entry point.

Every subcommand also reads a flat ``key = value`` config file given with
``--config``; keys are the long flag names without the leading dashes (dashes
or underscores both accepted), repeatable flags take comma-separated values,
and explicit flags override the file.  The effective configuration is echoed
to stderr.

Exit codes: 0 success, 2 usage error, 3 data error, 4 infeasible sampling.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import (ColumnFormatError, Document, EntityType, IOBError, corpus_stats,
                     format_columns, read_column_file)
from .crf import FeatureConfig, ModelFormatError, TrainParams, dump_features, load_model, save_model, train
from .evaluation import (agreement, confusion_tsv, entity_prf, kfold_split, mean_results, report,
                         token_confusion)
from .gazetteer import load_gazetteer
from .hybrid import SYSTEMS, run_system
from .resources import default_gazetteers, default_ruleset, lexicons
from .rules import RuleSyntaxError, load_ruleset
from .sampler import (SamplerConfig, SamplingInfeasible, read_pool, sample_documents,
                      sampling_report)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 2, 3, 4

log = logging.getLogger("hybridner")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# Real defaults live here so that argparse defaults can stay None and an
# explicit flag is distinguishable from an unset one when merging a config file.
DEFAULTS = {
    "strategy": "crf", "sigma2": 1.0, "max_iter": 200, "tol": 1e-4, "seed": 0,
    "ngram_max": 6, "k": 5, "mode": "all_tokens", "compare": "full",
    "source_cap": 0.2, "sports_source": "varzesh3", "sports_cap": 0.3, "min_len": 70,
    "time_bins": 10, "gazetteer": [], "disable": [], "defaults": False, "normalize": False,
    "confusion": False,
}
FEATURE_FAMILIES = ("bias", "word", "lemma", "pos", "chunk", "affixes", "gazetteer")


def _add_resources(p, model=True):
    p.add_argument("--ruleset", metavar="FILE", help="rule file (see the rule DSL)")
    p.add_argument("--gazetteer", action="append", metavar="TYPE=PATH",
                   help="entity list for TYPE; repeatable; the file stem names it for [lex:NAME]")
    p.add_argument("--defaults", action="store_true", default=None,
                   help="use the shipped ruleset and sample gazetteers where none are given")
    if model:
        p.add_argument("--model", metavar="FILE", help="trained CRF model")


def _add_training(p):
    p.add_argument("--sigma2", type=float, help="L2 prior variance (default 1.0)")
    p.add_argument("--max-iter", type=int, help="L-BFGS iteration cap (default 200)")
    p.add_argument("--tol", type=float, help="gradient max-norm tolerance (default 1e-4)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--ngram-max", type=int, help="longest character prefix/suffix, 1-6 (default 6)")
    p.add_argument("--disable", action="append", metavar="FAMILY",
                   help=f"switch off a feature family: {', '.join(FEATURE_FAMILIES)}; repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridner",
        description="Hybrid rule/gazetteer/CRF named entity recognition for pre-tokenized text.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def command(name, help):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--config", metavar="FILE", help="key = value config file; flags override it")
        return p

    p = command("train", "train a CRF model on a tagged column file")
    p.add_argument("--train", metavar="FILE", help="tagged column file")
    p.add_argument("--model", metavar="FILE", help="output model path")
    p.add_argument("--gazetteer", action="append", metavar="TYPE=PATH",
                   help="entity list used for dictionary features; repeatable")
    p.add_argument("--defaults", action="store_true", default=None,
                   help="use the shipped sample gazetteers when none are given")
    _add_training(p)

    p = command("tag", "tag a column file with one system or hybrid strategy")
    p.add_argument("--input", metavar="FILE", help="column file; a tag column, if present, is replaced")
    p.add_argument("--output", metavar="FILE", help="output column file (default stdout)")
    p.add_argument("--strategy", choices=SYSTEMS, help="system or combination (default crf)")
    _add_resources(p)

    p = command("eval", "entity-level precision/recall/F1 of predicted against gold tags")
    p.add_argument("--gold", metavar="FILE", help="gold column file")
    p.add_argument("--pred", metavar="FILE", help="predicted column file over the same tokens")
    p.add_argument("--out", metavar="FILE", help="write TSV here instead of stdout")
    p.add_argument("--confusion", action="store_true", default=None,
                   help="append the token confusion matrix (rows predicted, columns gold)")
    p.add_argument("--normalize", action="store_true", default=None,
                   help="normalize the confusion matrix per gold column")

    p = command("kappa", "observed agreement and Cohen's kappa between two annotations")
    p.add_argument("--a", metavar="FILE", help="first annotation (column file)")
    p.add_argument("--b", metavar="FILE", help="second annotation of the same tokens")
    p.add_argument("--mode", choices=("all_tokens", "entity_union"), help="token universe (default all_tokens)")
    p.add_argument("--compare", choices=("full", "type"), help="compare B/I-typed tags or bare types (default full)")
    p.add_argument("--out", metavar="FILE", help="write TSV here instead of stdout")

    p = command("stats", "corpus statistics per entity type")
    p.add_argument("--corpus", metavar="FILE", help="tagged column file")
    p.add_argument("--out", metavar="FILE", help="write TSV here instead of stdout")

    p = command("kfold", "document-level K-fold training and evaluation")
    p.add_argument("--corpus", metavar="FILE", help="tagged column file")
    p.add_argument("--k", type=int, help="number of folds (default 5)")
    p.add_argument("--strategy", choices=SYSTEMS, help="system or combination to evaluate (default crf)")
    p.add_argument("--out", metavar="FILE", help="write tables here instead of stdout")
    p.add_argument("--ruleset", metavar="FILE", help="rule file for rule-based strategies")
    p.add_argument("--gazetteer", action="append", metavar="TYPE=PATH", help="entity list; repeatable")
    p.add_argument("--defaults", action="store_true", default=None,
                   help="use the shipped ruleset and sample gazetteers where none are given")
    _add_training(p)

    p = command("sample", "select a corpus from news document metadata")
    p.add_argument("--pool", metavar="FILE", help="TSV: id source topic timestamp length")
    p.add_argument("--n", type=int, help="number of documents to select")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--source-cap", type=float, help="max share of the selection per source (default 0.2)")
    p.add_argument("--sports-source", metavar="NAME", help="source exempt from the global cap (default varzesh3)")
    p.add_argument("--sports-cap", type=float, help="max share of sports documents for the sports source (default 0.3)")
    p.add_argument("--min-len", type=int, help="drop documents shorter than this many characters (default 70)")
    p.add_argument("--time-bins", type=int, help="number of equal-width time bins (default 10)")
    p.add_argument("--out", metavar="FILE", help="write selected ids here instead of stdout")
    p.add_argument("--report", metavar="FILE", help="write the pool/selection report TSV here")

    p = command("rules-test", "check a rule file and show what it tags")
    p.add_argument("--ruleset", metavar="FILE", help="rule file")
    p.add_argument("--input", metavar="FILE", help="column file to tag with the rules (optional)")
    p.add_argument("--gazetteer", action="append", metavar="TYPE=PATH",
                   help="entity list providing [lex:NAME]; repeatable")
    p.add_argument("--defaults", action="store_true", default=None,
                   help="use the shipped ruleset and sample gazetteers where none are given")

    p = command("dump-features", "print feature weights of a trained model")
    p.add_argument("--model", metavar="FILE", help="trained CRF model")
    p.add_argument("--out", metavar="FILE", help="write here instead of stdout")
    return parser


# -- config handling ------------------------------------------------------------

def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` comments and blank lines ignored."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def merge_config(parser, args) -> argparse.Namespace:
    sp = _subparser(parser, args.command)
    actions = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
    if args.config:
        for key, raw in read_config(args.config).items():
            action = actions.get(key)
            if action is None:
                raise UsageError(f"{args.config}: unknown key {key!r} for '{args.command}'")
            if getattr(args, key) is not None:
                continue
            try:
                if isinstance(action, argparse._AppendAction):
                    value = [v.strip() for v in raw.split(",") if v.strip()]
                elif isinstance(action, argparse._StoreTrueAction):
                    value = raw.lower() in ("1", "true", "yes", "on")
                else:
                    value = action.type(raw) if action.type else raw
            except ValueError:
                raise UsageError(f"{args.config}: bad value for {key!r}: {raw!r}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"{args.config}: {key} must be one of {', '.join(action.choices)}")
            setattr(args, key, value)
    for dest in actions:
        if getattr(args, dest) is None and dest in DEFAULTS:
            default = DEFAULTS[dest]
            setattr(args, dest, list(default) if isinstance(default, list) else default)
    effective = {d: getattr(args, d) for d in sorted(actions)}
    print(f"# hybridner {args.command} " + " ".join(f"{k}={v}" for k, v in effective.items()),
          file=sys.stderr)
    return args


# -- helpers --------------------------------------------------------------------

def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _read_corpus(path):
    try:
        return read_column_file(path)
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except (ColumnFormatError, IOBError) as exc:
        raise DataError(str(exc)) from None


def _gazetteers(args):
    gazetteers = []
    for spec in args.gazetteer or []:
        if "=" not in spec:
            raise UsageError(f"--gazetteer expects TYPE=PATH, got {spec!r}")
        etype, path = spec.split("=", 1)
        try:
            et = EntityType(etype.strip().upper())
        except ValueError:
            raise UsageError(f"unknown entity type {etype!r} in --gazetteer") from None
        try:
            gazetteers.append(load_gazetteer(path, et))
        except FileNotFoundError:
            raise DataError(f"no such gazetteer file: {path}") from None
    if not gazetteers and args.defaults:
        gazetteers = default_gazetteers()
    return gazetteers


def _ruleset(args, gazetteers):
    path = getattr(args, "ruleset", None)
    try:
        if path is None:
            return default_ruleset(gazetteers) if args.defaults else None
        return load_ruleset(path, lexicons(gazetteers))
    except FileNotFoundError:
        raise DataError(f"no such rule file: {path}") from None
    except RuleSyntaxError as exc:
        raise DataError(f"{path}: {exc}") from None


def _feature_config(args):
    unknown = set(args.disable) - set(FEATURE_FAMILIES)
    if unknown:
        raise UsageError(f"unknown feature family: {', '.join(sorted(unknown))}")
    try:
        return FeatureConfig(ngram_max=args.ngram_max, **{f: False for f in args.disable})
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _train_params(args):
    try:
        return TrainParams(sigma2=args.sigma2, max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write(text, path):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _tags(docs):
    out = []
    for d in docs:
        for s in d.sentences:
            if s.gold_tags is None:
                raise DataError(f"document {d.id} has an untagged sentence")
            out.append(list(s.gold_tags))
    return out


def _aligned(gold_docs, pred_docs):
    g = [s.surfaces for d in gold_docs for s in d.sentences]
    p = [s.surfaces for d in pred_docs for s in d.sentences]
    if g != p:
        raise DataError("the two files do not contain the same tokens")


def _tag_docs(docs, system, model, ruleset, gazetteers):
    return [
        Document(d.id, tuple(s.with_tags(run_system(system, s, model, ruleset, gazetteers))
                             for s in d.sentences), d.meta)
        for d in docs
    ]


# -- subcommands ----------------------------------------------------------------

def cmd_train(args):
    _need(args, "train", "model")
    docs = _read_corpus(args.train)
    gazetteers = _gazetteers(args)
    cfg = _feature_config(args)
    try:
        model = train(docs, cfg, _train_params(args), gazetteers)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    save_model(model, args.model)
    print(f"trained {len(model.features)} features on {sum(len(d.sentences) for d in docs)} sentences"
          f" -> {args.model}", file=sys.stderr)


def _load_model(path):
    try:
        return load_model(path)
    except FileNotFoundError:
        raise DataError(f"no such model file: {path}") from None
    except ModelFormatError as exc:
        raise DataError(str(exc)) from None


def cmd_tag(args):
    _need(args, "input")
    needs_model = args.strategy not in ("rules", "lists")
    if needs_model:
        _need(args, "model")
    docs = _read_corpus(args.input)
    model = _load_model(args.model) if needs_model else None
    gazetteers = _gazetteers(args)
    ruleset = _ruleset(args, gazetteers)
    _write(format_columns(_tag_docs(docs, args.strategy, model, ruleset, gazetteers)), args.output)


def cmd_eval(args):
    _need(args, "gold", "pred")
    gold, pred = _read_corpus(args.gold), _read_corpus(args.pred)
    _aligned(gold, pred)
    g, p = _tags(gold), _tags(pred)
    text = report(entity_prf(g, p), fmt="tsv")
    if args.confusion:
        text += "\n" + confusion_tsv(token_confusion(g, p), normalize=args.normalize)
    _write(text, args.out)


def cmd_kappa(args):
    _need(args, "a", "b")
    a, b = _read_corpus(args.a), _read_corpus(args.b)
    _aligned(a, b)
    ta = [t for s in _tags(a) for t in s]
    tb = [t for s in _tags(b) for t in s]
    res = agreement(ta, tb, mode=args.mode, compare=args.compare)
    _write("mode\tcompare\ttokens\tdisagreements\tobserved\tkappa\n"
           f"{args.mode}\t{args.compare}\t{res.n}\t{res.disagreements}\t{res.observed:.4f}\t{res.kappa:.4f}\n",
           args.out)


def cmd_stats(args):
    _need(args, "corpus")
    try:
        stats = corpus_stats(_read_corpus(args.corpus))
    except ValueError as exc:
        raise DataError(str(exc)) from None
    _write(stats.to_tsv(), args.out)


def kfold_evaluate(docs, k, system="crf", cfg=FeatureConfig(), params=TrainParams(),
                   ruleset=None, gazetteers=()):
    """Train on k-1 folds, tag the held-out fold; returns per-fold results and their means."""
    folds = kfold_split(docs, k, params.seed)
    results = []
    for i, test in enumerate(folds):
        model = None
        if system not in ("rules", "lists"):
            train_docs = [d for j, f in enumerate(folds) if j != i for d in f]
            model = train(train_docs, cfg, params, gazetteers)
        gold = [list(s.gold_tags) for d in test for s in d.sentences]
        pred = [run_system(system, s, model, ruleset, gazetteers) for d in test for s in d.sentences]
        results.append(entity_prf(gold, pred))
        log.info("fold %d/%d: micro F1 %.4f", i + 1, k, results[-1].micro.f1)
    return folds, results, mean_results(results)


def cmd_kfold(args):
    _need(args, "corpus")
    docs = _read_corpus(args.corpus)
    gazetteers = _gazetteers(args)
    ruleset = _ruleset(args, gazetteers)
    if not 1 < args.k <= len(docs):
        raise DataError(f"k={args.k} needs 2 <= k <= number of documents ({len(docs)})")
    for d in docs:
        if any(s.gold_tags is None for s in d.sentences):
            raise DataError(f"document {d.id} has an untagged sentence")
    folds, results, mean = kfold_evaluate(docs, args.k, args.strategy, _feature_config(args),
                                          _train_params(args), ruleset, gazetteers)
    parts = ["fold\tdocuments\n" + "".join(f"{i + 1}\t{len(f)}\n" for i, f in enumerate(folds))]
    for i, res in enumerate(results):
        parts.append(f"# fold {i + 1}\n" + report(res, fmt="tsv"))
    parts.append("# mean\n" + report(mean, fmt="tsv"))
    _write("\n".join(parts), args.out)


def cmd_sample(args):
    _need(args, "pool", "n")
    try:
        pool = read_pool(args.pool)
    except FileNotFoundError:
        raise DataError(f"no such pool file: {args.pool}") from None
    except ValueError as exc:
        raise DataError(str(exc)) from None
    cfg = SamplerConfig(target_n=args.n, min_length=args.min_len, source_cap=args.source_cap,
                        sports_source=args.sports_source, sports_cap=args.sports_cap,
                        time_bins=args.time_bins, seed=args.seed, topics=None)
    selection = sample_documents(pool, cfg)
    _write("".join(i + "\n" for i in selection), args.out)
    if args.report:
        Path(args.report).write_text(sampling_report(pool, selection, cfg).to_tsv(), encoding="utf-8")


def cmd_rules_test(args):
    gazetteers = _gazetteers(args)
    if args.ruleset is None and not args.defaults:
        raise UsageError("missing required option: --ruleset (or --defaults)")
    ruleset = _ruleset(args, gazetteers)
    counts = {t: 0 for t in EntityType}
    for r in ruleset.rules + ruleset.char_rules:
        counts[r.etype] += 1
    summary = "type\trules\n" + "".join(f"{t}\t{n}\n" for t, n in counts.items())
    if args.input:
        docs = _read_corpus(args.input)
        sys.stderr.write(summary)
        _write(format_columns(_tag_docs(docs, "rules", None, ruleset, gazetteers)), None)
    else:
        _write(summary, None)


def cmd_dump_features(args):
    _need(args, "model")
    _write(dump_features(_load_model(args.model)), args.out)


COMMANDS = {
    "train": cmd_train, "tag": cmd_tag, "eval": cmd_eval, "kappa": cmd_kappa, "stats": cmd_stats,
    "kfold": cmd_kfold, "sample": cmd_sample, "rules-test": cmd_rules_test,
    "dump-features": cmd_dump_features,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        args = merge_config(parser, args)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hybridner {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"hybridner {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SamplingInfeasible as exc:
        print(f"hybridner sample: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
