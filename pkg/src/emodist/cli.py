"""Command-line interface: ``emodist <subcommand> ...``."""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .classifiers import CLASSIFIERS, make_classifier
from .ensemble import CombineRule, combine_proba
from .evaluation import ExperimentSpec, compute_metrics, run_grid, standard_grid
from .features import TfidfFeaturizer
from .io import (
    ArtifactError,
    FormatError,
    ModelArtifact,
    load_corpus,
    load_model,
    load_predictions,
    load_spec,
    parse_scalar,
    save_corpus,
    save_model,
    save_predictions,
    save_report,
)
from .labeling import Provenance, build_auto_corpus
from .lexicon import CATEGORIES, LexiconError, default_lexicon_path, load_lexicon
from .preprocess import PreprocessConfig, TextPreprocessor
from .synth import SynthConfig, generate_corpus

DEFAULT_SEED = 42
SEED_ENV = "EMODIST_SEED"

_STEPS = {
    "hashtags": "strip_trailing_hashtags",
    "repeats": "collapse_repeats",
    "normalize": "normalize",
    "diacritics": "strip_diacritics",
    "stem": "light_stem",
    "stopwords": "remove_stopwords",
}


class UsageError(Exception):
    pass


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or not env.strip():
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _lexicon(args):
    return load_lexicon(args.lexicon or default_lexicon_path())


def _preprocess_config(args) -> PreprocessConfig:
    config = PreprocessConfig.all_off() if args.no_preprocess else PreprocessConfig()
    if args.disable:
        config = config.with_flags(**{_STEPS[s]: False for s in args.disable})
    return config


def _parse_params(items) -> dict:
    """``kind.name=value`` pairs into ``{kind: {name: value}}``."""
    out: dict = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        kind, dot, name = key.strip().partition(".")
        if not sep or not dot or kind not in CLASSIFIERS or not name:
            raise UsageError(f"--param expects kind.name=value with kind in {', '.join(CLASSIFIERS)}, got {item!r}")
        out.setdefault(kind, {})[name] = parse_scalar(value.strip())
    return out


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_label_auto(args, seed: int) -> int:
    docs = load_corpus(args.corpus)
    lex = _lexicon(args)
    labeled = build_auto_corpus(
        docs, lex, seed=seed, single_emoji_only=args.single_emoji_only, strip=not args.keep_emojis
    )
    save_corpus(labeled, args.out)
    counts = {c: 0 for c in CATEGORIES}
    for d in labeled:
        counts[d.auto_label] += 1
    summary = ", ".join(f"{c.value} {n}" for c, n in counts.items())
    _log(f"labeled {len(labeled)} of {len(docs)} documents ({summary})")
    return 0


def cmd_preprocess(args, seed: int) -> int:
    docs = load_corpus(args.corpus)
    prep = TextPreprocessor.from_config(_preprocess_config(args))
    tokens = prep.transform([d.raw_text for d in docs])
    lines = [f"{d.id}\t{' '.join(t)}\n" for d, t in zip(docs, tokens)]
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.writelines(lines)
    return 0


def cmd_train(args, seed: int) -> int:
    docs = load_corpus(args.corpus)
    if args.auto_label:
        docs = build_auto_corpus(docs, _lexicon(args), seed=seed, single_emoji_only=args.single_emoji_only)
    train = [d for d in docs if d.label is not None]
    if not train:
        raise UsageError("the corpus has no labeled documents; label it first (label-auto) or pass --auto-label")
    if len(train) < len(docs):
        _log(f"skipping {len(docs) - len(train)} unlabeled documents")
    kinds = args.classifier or ["svm"]
    if len(set(kinds)) != len(kinds):
        raise UsageError("each --classifier may be given once")
    params = _parse_params(args.param)
    for kind in params:
        if kind not in kinds:
            raise UsageError(f"--param given for {kind}, which is not being trained")
    config = _preprocess_config(args)
    tokens = TextPreprocessor.from_config(config).transform([d.raw_text for d in train])
    featurizer = TfidfFeaturizer(min_df=args.min_df).fit(tokens)
    X = featurizer.transform(tokens)
    y = [d.label for d in train]
    models = {k: make_classifier(k, random_state=seed, **params.get(k, {})).fit(X, y) for k in kinds}
    rule = CombineRule.parse(args.rule) if len(kinds) > 1 else None
    artifact = ModelArtifact.from_fitted(
        config, featurizer, models, seed, rule=rule, meta={"n_train": len(train)}
    )
    save_model(artifact, args.out)
    _log(f"trained {', '.join(kinds)} on {len(train)} documents, {len(featurizer.vocabulary_)} terms")
    return 0


def cmd_predict(args, seed: int) -> int:
    artifact = load_model(args.model)
    docs = load_corpus(args.corpus)
    proba = artifact.predict_proba([d.raw_text for d in docs], model=args.classifier)
    save_predictions(args.out, [d.id for d in docs], proba)
    return 0


def cmd_evaluate(args, seed: int) -> int:
    preds = load_predictions(args.predictions)
    gold_docs = load_corpus(args.gold)
    gold_by_id = {d.id: d.gold_label for d in gold_docs if d.gold_label is not None}
    missing = [p.id for p in preds if p.id not in gold_by_id]
    if missing:
        raise UsageError(f"{len(missing)} predicted document(s) have no gold label, e.g. {missing[0]!r}")
    if not preds:
        raise UsageError("the predictions file is empty")
    m = compute_metrics([gold_by_id[p.id] for p in preds], [p.label for p in preds])
    lines = [f"documents: {len(preds)}", f"{'class':<10} {'precision':>9} {'recall':>9} {'f1':>9} {'support':>8}"]
    for i, c in enumerate(CATEGORIES):
        lines.append(
            f"{c.value:<10} {100 * m.precision[i]:>9.2f} {100 * m.recall[i]:>9.2f} "
            f"{100 * m.f1[i]:>9.2f} {int(m.support[i]):>8}"
        )
    lines.append(
        f"{'weighted':<10} {100 * m.weighted_precision:>9.2f} {100 * m.weighted_recall:>9.2f} "
        f"{100 * m.weighted_f1:>9.2f} {int(m.support.sum()):>8}"
    )
    lines.append(f"accuracy: {100 * m.accuracy:.2f}")
    lines.append("confusion (rows gold, columns predicted; " + ", ".join(c.value for c in CATEGORIES) + "):")
    lines.extend("  " + " ".join(f"{v:>6}" for v in row) for row in m.confusion)
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def _experiment_specs(args, seed: int, explicit_seed: bool) -> list[ExperimentSpec]:
    if args.spec == "paper_grid":
        specs = standard_grid(seed=seed)
    else:
        # a seed written in the file beats the environment but not --seed
        specs = load_spec(args.spec, default_seed=seed)
        if explicit_seed:
            specs = [replace(s, seed=seed) for s in specs]
    if args.folds:
        specs = [replace(s, n_folds=args.folds) for s in specs]
    return specs


def cmd_experiment(args, seed: int) -> int:
    specs = _experiment_specs(args, seed, args.seed is not None)
    lex = _lexicon(args)
    if (args.auto is None) != (args.manual is None):
        raise UsageError("give both --auto and --manual, or neither to use a synthetic corpus")
    if args.auto is not None:
        auto, manual = load_corpus(args.auto), load_corpus(args.manual)
    else:
        cfg = SynthConfig(n_auto=args.synth_auto, n_manual=args.synth_manual)
        synth = generate_corpus(cfg, lex, seed=seed)
        auto, manual = synth.auto, synth.manual
        _log(f"using a synthetic corpus: {len(auto)} auto, {len(manual)} manual documents (seed {seed})")
    manual = [d for d in manual if d.provenance is Provenance.MANUAL]
    if not manual:
        raise UsageError("the manual corpus has no manually labeled documents")

    on_model = None
    if args.models_dir:
        models_dir = Path(args.models_dir)
        models_dir.mkdir(parents=True, exist_ok=True)

        def on_model(name, source, fold, config, featurizer, models):
            suffix = source.value if fold == 0 else f"{source.value}-fold{fold}"
            artifact = ModelArtifact.from_fitted(
                config, featurizer, models, seed, rule=CombineRule.AVERAGE if len(models) > 1 else None,
                meta={"experiment": name, "source": source.value, "fold": fold},
            )
            save_model(artifact, models_dir / f"{name}-{suffix}.model")

    reports = run_grid(specs, auto, manual, lex, on_model)
    if args.out:
        save_report(reports, args.out)
    sys.stdout.write("\n".join(r.render() for r in reports))
    return 0


def cmd_combine(args, seed: int) -> int:
    if len(args.inputs) < 1:
        raise UsageError("combine needs at least one predictions file")
    runs = [load_predictions(p) for p in args.inputs]
    ids = [p.id for p in runs[0]]
    for path, run in zip(args.inputs[1:], runs[1:]):
        if sorted(p.id for p in run) != sorted(ids):
            raise UsageError(f"{path} does not cover the same documents as {args.inputs[0]}")
    probas = []
    for run in runs:
        by_id = {p.id: p.proba for p in run}
        probas.append(np.array([by_id[i] for i in ids]))
    rules = list(CombineRule) if args.rule == "all" else [CombineRule.parse(args.rule)]
    if args.rule == "all":
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        targets = {r: out_dir / f"{r.value}.tsv" for r in rules}
    else:
        targets = {rules[0]: Path(args.out)}
    for rule, target in targets.items():
        scores, labels = combine_proba(probas, rule)
        totals = scores.sum(axis=1, keepdims=True)
        safe = np.where(totals > 0, totals, 1.0)
        shown = np.where(totals > 0, scores / safe, 1.0 / len(CATEGORIES))
        save_predictions(target, ids, shown, [CATEGORIES[i] for i in labels])
    return 0


def cmd_synth(args, seed: int) -> int:
    cfg = SynthConfig(
        n_auto=args.n_auto,
        n_manual=args.n_manual,
        n_terms=args.n_terms,
        label_noise=args.label_noise,
        surface_noise=args.surface_noise,
        trailing_hashtag_rate=args.hashtag_rate,
        multi_emoji_rate=args.multi_emoji_rate,
    )
    corpus = generate_corpus(cfg, _lexicon(args), seed=seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus.auto, out / "auto.tsv")
    save_corpus(corpus.manual, out / "manual.tsv")
    _log(f"wrote {len(corpus.auto)} auto and {len(corpus.manual)} manual documents to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS,
        help=f"master seed (default: ${SEED_ENV} or {DEFAULT_SEED})",
    )

    parser = argparse.ArgumentParser(
        prog="emodist", parents=[common],
        description="Emoji-based distant supervision for emotion classification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def lexicon_arg(p):
        p.add_argument("--lexicon", help="emoji lexicon TSV (default: the bundled lexicon)")

    def preprocess_args(p):
        p.add_argument("--no-preprocess", action="store_true", help="turn every preprocessing step off")
        p.add_argument(
            "--disable", action="append", choices=sorted(_STEPS), metavar="STEP",
            help="turn one step off; repeatable. Steps: " + ", ".join(sorted(_STEPS)),
        )

    p = sub.add_parser("label-auto", parents=[common], help="label a corpus from its emojis")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--single-emoji-only", action="store_true", help="keep only documents with exactly one emoji")
    p.add_argument("--keep-emojis", action="store_true", help="do not strip the matched emojis from the text")
    lexicon_arg(p)
    p.set_defaults(func=cmd_label_auto)

    p = sub.add_parser("preprocess", parents=[common], help="dump preprocessed tokens per document")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    preprocess_args(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", parents=[common], help="train classifiers and write a model artifact")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--classifier", action="append", choices=sorted(CLASSIFIERS), help="repeatable (default: svm)")
    p.add_argument("--rule", default="average", choices=[r.value for r in CombineRule],
                   help="combining rule stored with a multi-classifier model")
    p.add_argument("--param", action="append", metavar="KIND.NAME=VALUE", help="classifier hyperparameter")
    p.add_argument("--min-df", type=int, default=1)
    p.add_argument("--auto-label", action="store_true", help="auto-label the corpus from its emojis first")
    p.add_argument("--single-emoji-only", action="store_true")
    lexicon_arg(p)
    preprocess_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="write class probabilities for a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--classifier", choices=sorted(CLASSIFIERS), help="use one model of a multi-classifier artifact")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common], help="score a predictions file against gold labels")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True, help="corpus with gold labels")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", parents=[common], help="run an experiment spec or the built-in grid")
    p.add_argument("--spec", required=True, help="spec file, or 'paper_grid' for the built-in comparisons")
    p.add_argument("--auto", help="auto corpus (unlabeled or auto-labeled)")
    p.add_argument("--manual", help="manually labeled corpus")
    p.add_argument("--out", help="report file")
    p.add_argument("--models-dir", help="also save every trained model artifact here")
    p.add_argument("--folds", type=int, help="override the number of folds")
    p.add_argument("--synth-auto", type=int, default=2000, help="synthetic auto corpus size when no corpus is given")
    p.add_argument("--synth-manual", type=int, default=600, help="synthetic manual corpus size")
    lexicon_arg(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("combine", parents=[common], help="combine prediction files with a fixed rule")
    p.add_argument("inputs", nargs="+", help="prediction files")
    p.add_argument("--rule", required=True, choices=[r.value for r in CombineRule] + ["all"])
    p.add_argument("--out", required=True, help="output file, or a directory with --rule all")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic auto and manual corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-auto", type=int, default=2000)
    p.add_argument("--n-manual", type=int, default=600)
    p.add_argument("--n-terms", type=int, default=300)
    p.add_argument("--label-noise", type=float, default=0.1)
    p.add_argument("--surface-noise", type=float, default=0.0)
    p.add_argument("--hashtag-rate", type=float, default=0.0)
    p.add_argument("--multi-emoji-rate", type=float, default=0.425)
    lexicon_arg(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    if argv is not None:
        argv = [os.fspath(a) if isinstance(a, os.PathLike) else a for a in argv]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not hasattr(args, "seed"):
        args.seed = None
    try:
        seed = resolve_seed(args.seed)
        return args.func(args, seed)
    except UsageError as exc:
        _log(f"emodist {args.command}: {exc}")
        return 2
    except (FormatError, ArtifactError, LexiconError, ValueError, KeyError, OSError) as exc:
        _log(f"emodist {args.command}: error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
