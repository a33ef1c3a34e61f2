"""Stratified splits and folds, classification metrics, and the experiment runner.

An experiment evaluates classifiers trained on auto-labeled data and on
manually labeled data against the same manually labeled test documents.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .classifiers import CLASSIFIERS, make_classifier
from .ensemble import CombineRule, combine_proba
from .features import TfidfFeaturizer
from .labeling import Document, Provenance, build_auto_corpus
from .lexicon import CATEGORIES, N_CATEGORIES, EmotionCategory, Lexicon
from .preprocess import PreprocessConfig, TextPreprocessor

__all__ = [
    "TrainingSource",
    "stratified_split",
    "FoldPlan",
    "make_folds",
    "Metrics",
    "compute_metrics",
    "ExperimentSpec",
    "ResultRow",
    "ExperimentReport",
    "run_experiment",
    "standard_grid",
    "run_grid",
]


class TrainingSource(str, enum.Enum):
    AUTO = "auto"
    MANUAL = "manual"

    @classmethod
    def parse(cls, value: "str | TrainingSource") -> "TrainingSource":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown training source {value!r}; expected auto or manual") from None

    def __str__(self) -> str:
        return self.value


def _gold(doc: Document) -> EmotionCategory:
    if doc.gold_label is None:
        raise ValueError(f"document {doc.id!r} has no gold label")
    return doc.gold_label


def _by_class(docs: Sequence[Document]) -> dict[EmotionCategory, list[int]]:
    groups: dict[EmotionCategory, list[int]] = {c: [] for c in CATEGORIES}
    for i, doc in enumerate(docs):
        groups[_gold(doc)].append(i)
    return groups


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(docs: Sequence[Document], test_fraction: float, seed: int = 0):
    """Split gold-labeled documents into ``(train, test)`` class by class.

    Each class contributes ``round(count * test_fraction)`` test documents
    (halves round up). Both lists keep the input order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie strictly between 0 and 1, got {test_fraction}")
    rng = np.random.default_rng(seed)
    in_test = np.zeros(len(docs), dtype=bool)
    for cat, idx in _by_class(docs).items():
        if not idx:
            continue
        if len(idx) < 2:
            raise ValueError(f"class {cat} has {len(idx)} document; a split needs at least 2")
        n_test = _round_half_up(len(idx) * test_fraction)
        chosen = rng.permutation(idx)[:n_test]
        in_test[chosen] = True
    train = [d for d, t in zip(docs, in_test) if not t]
    test = [d for d, t in zip(docs, in_test) if t]
    return train, test


@dataclass(frozen=True)
class FoldPlan:
    """Per-fold ``(train_idx, test_idx)`` index arrays into the split corpus."""

    folds: tuple[tuple[np.ndarray, np.ndarray], ...]
    n_docs: int

    def __len__(self) -> int:
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)

    def test_sets(self) -> list[np.ndarray]:
        return [test for _, test in self.folds]


def make_folds(docs: Sequence[Document], k: int, seed: int = 0) -> FoldPlan:
    """Stratified k-fold plan: each class is shuffled and dealt round-robin.

    The dealing offset carries over between classes so fold sizes differ by
    at most one.
    """
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    groups = {c: idx for c, idx in _by_class(docs).items() if idx}
    if not groups:
        raise ValueError("cannot fold an empty corpus")
    smallest = min(len(idx) for idx in groups.values())
    if k > smallest:
        raise ValueError(f"{k} folds requested but the smallest class has only {smallest} documents")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(docs), dtype=np.int64)
    offset = 0
    for idx in groups.values():
        shuffled = rng.permutation(idx)
        fold_of[shuffled] = (offset + np.arange(len(shuffled))) % k
        offset = (offset + len(shuffled)) % k
    everything = np.arange(len(docs))
    folds = tuple(
        (everything[fold_of != f], everything[fold_of == f]) for f in range(k)
    )
    return FoldPlan(folds, len(docs))


@dataclass(frozen=True)
class Metrics:
    precision: np.ndarray  # per class, category order
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    accuracy: float
    confusion: np.ndarray  # rows gold, columns predicted

    def per_class(self) -> dict[EmotionCategory, dict[str, float]]:
        return {
            c: {"precision": float(self.precision[i]), "recall": float(self.recall[i]),
                "f1": float(self.f1[i]), "support": int(self.support[i])}
            for i, c in enumerate(CATEGORIES)
        }


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=den > 0)
    return out


def compute_metrics(gold: Sequence, predicted: Sequence) -> Metrics:
    """Per-class and gold-frequency-weighted precision, recall and F1.

    Undefined ratios (no predictions, or precision and recall both zero)
    count as 0.
    """
    if len(gold) != len(predicted):
        raise ValueError(f"{len(gold)} gold labels but {len(predicted)} predictions")
    if len(gold) == 0:
        raise ValueError("cannot score an empty evaluation")
    g = np.fromiter((EmotionCategory.parse(v).index for v in gold), dtype=np.int64)
    p = np.fromiter((EmotionCategory.parse(v).index for v in predicted), dtype=np.int64)
    confusion = np.zeros((N_CATEGORIES, N_CATEGORIES), dtype=np.int64)
    np.add.at(confusion, (g, p), 1)
    tp = np.diag(confusion).astype(np.float64)
    support = confusion.sum(axis=1)
    predicted_count = confusion.sum(axis=0)
    precision = _safe_div(tp, predicted_count.astype(np.float64))
    recall = _safe_div(tp, support.astype(np.float64))
    f1 = _safe_div(2 * precision * recall, precision + recall)
    weights = support / support.sum()
    return Metrics(
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        weighted_precision=float(weights @ precision),
        weighted_recall=float(weights @ recall),
        weighted_f1=float(weights @ f1),
        accuracy=float(tp.sum() / len(g)),
        confusion=confusion,
    )


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment configuration.

    ``sources`` lists the training regimes to compare; every regime is
    tested on the same manual test documents. ``fixed_split`` replaces the
    folds by one stratified train/test split of ``test_fraction``.
    """

    name: str = "experiment"
    sources: tuple[TrainingSource, ...] = (TrainingSource.AUTO, TrainingSource.MANUAL)
    preprocess: bool = True
    single_emoji_only: bool = False
    classifiers: tuple[str, ...] = ("svm", "mnb", "rf")
    rules: tuple[CombineRule, ...] = tuple(CombineRule)
    n_folds: int = 5
    seed: int = 42
    fixed_split: bool = False
    test_fraction: float = 0.2
    min_df: int = 1
    hyperparams: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(TrainingSource.parse(s) for s in self.sources))
        object.__setattr__(self, "rules", tuple(CombineRule.parse(r) for r in self.rules))
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        if not self.sources:
            raise ValueError("an experiment needs at least one training source")
        if len(set(self.sources)) != len(self.sources):
            raise ValueError("training sources must not repeat")
        if not self.classifiers:
            raise ValueError("an experiment needs at least one classifier")
        for kind in self.classifiers:
            if kind not in CLASSIFIERS:
                raise ValueError(f"unknown classifier {kind!r}; expected one of {', '.join(CLASSIFIERS)}")
        if len(set(self.classifiers)) != len(self.classifiers):
            raise ValueError("classifiers must not repeat")
        if not self.fixed_split and self.n_folds < 2:
            raise ValueError(f"n_folds must be at least 2, got {self.n_folds}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie strictly between 0 and 1")
        if self.min_df < 1:
            raise ValueError("min_df must be at least 1")
        for kind in self.hyperparams:
            if kind not in self.classifiers:
                raise ValueError(f"hyperparameters given for unused classifier {kind!r}")

    def preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig() if self.preprocess else PreprocessConfig.all_off()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "sources": [s.value for s in self.sources],
            "preprocess": self.preprocess,
            "single_emoji_only": self.single_emoji_only,
            "classifiers": list(self.classifiers),
            "rules": [r.value for r in self.rules],
            "n_folds": self.n_folds,
            "seed": self.seed,
            "fixed_split": self.fixed_split,
            "test_fraction": self.test_fraction,
            "min_df": self.min_df,
            "hyperparams": {k: dict(sorted(v.items())) for k, v in sorted(self.hyperparams.items())},
        }


@dataclass(frozen=True)
class ResultRow:
    """Weighted metrics of one model on one fold; ``fold`` is 0 for the average row."""

    source: TrainingSource
    model: str
    fold: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    n_test: int

    @property
    def fold_name(self) -> str:
        return "Avg" if self.fold == 0 else f"fold {self.fold}"

    def to_dict(self) -> dict:
        return {
            "source": self.source.value,
            "model": self.model,
            "fold": self.fold_name,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n_test": self.n_test,
        }


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}"


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    rows: list[ResultRow]
    n_auto_train: int = 0
    n_manual: int = 0

    def models(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r.model not in seen:
                seen.append(r.model)
        return seen

    def average(self, source: TrainingSource | str, model: str) -> ResultRow:
        source = TrainingSource.parse(source)
        for r in self.rows:
            if r.source is source and r.model == model and r.fold == 0:
                return r
        raise KeyError(f"no average row for {source}/{model}")

    def fold_rows(self, source: TrainingSource | str, model: str) -> list[ResultRow]:
        source = TrainingSource.parse(source)
        return [r for r in self.rows if r.source is source and r.model == model and r.fold > 0]

    def render(self) -> str:
        """Plain-text tables, one per training source, metrics in percent."""
        spec = self.spec
        lines = [
            f"experiment: {spec.name}",
            f"seed: {spec.seed}  preprocess: {'on' if spec.preprocess else 'off'}  "
            f"single_emoji_only: {'yes' if spec.single_emoji_only else 'no'}  "
            + ("split: fixed " + _pct(spec.test_fraction) + "% test" if spec.fixed_split
               else f"folds: {spec.n_folds}"),
            f"auto training docs: {self.n_auto_train}  manual docs: {self.n_manual}",
        ]
        header = f"{'model':<18} {'fold':<8} {'accuracy':>9} {'precision':>9} {'recall':>9} {'f1':>9}"
        for source in spec.sources:
            lines.append("")
            title = "trained on auto-labeled data" if source is TrainingSource.AUTO else "trained on manually labeled data"
            lines.append(f"[{source.value}] {title}")
            lines.append(header)
            for r in self.rows:
                if r.source is not source:
                    continue
                lines.append(
                    f"{r.model:<18} {r.fold_name:<8} {_pct(r.accuracy):>9} {_pct(r.precision):>9} "
                    f"{_pct(r.recall):>9} {_pct(r.f1):>9}"
                )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "n_auto_train": self.n_auto_train,
            "n_manual": self.n_manual,
            "rows": [r.to_dict() for r in self.rows],
        }


# called as on_model(source, fold, preprocess_config, featurizer, {kind: fitted model})
ModelCallback = Callable[[TrainingSource, int, PreprocessConfig, TfidfFeaturizer, dict], None]


def _auto_training_docs(spec: ExperimentSpec, auto_corpus, lexicon) -> list[Document]:
    docs = list(auto_corpus)
    if not docs:
        raise ValueError("the auto corpus is empty")
    labeled = [d.provenance is Provenance.AUTO for d in docs]
    if all(labeled):
        if spec.single_emoji_only:
            raise ValueError(
                "single-emoji filtering needs the raw auto corpus; this one is already auto-labeled"
            )
        return docs
    if any(labeled):
        raise ValueError("the auto corpus mixes labeled and unlabeled documents")
    if lexicon is None:
        raise ValueError("labeling the auto corpus needs a lexicon")
    out = build_auto_corpus(docs, lexicon, seed=spec.seed, single_emoji_only=spec.single_emoji_only)
    if not out:
        raise ValueError("no document in the auto corpus could be labeled")
    return out


def _fit_models(spec, X, y) -> dict:
    models = {}
    for kind in spec.classifiers:
        params = spec.hyperparams.get(kind, {})
        models[kind] = make_classifier(kind, random_state=spec.seed, **params).fit(X, y)
    return models


def _evaluate(spec, source, fold, models, X_test, gold, rows):
    probas = []
    for kind, model in models.items():
        proba = model.predict_proba(X_test)
        probas.append(proba)
        pred = [CATEGORIES[i] for i in np.argmax(proba, axis=1)]
        rows.append(_row(source, kind, fold, compute_metrics(gold, pred), len(gold)))
    for rule in spec.rules:
        _, labels = combine_proba(probas, rule)
        pred = [CATEGORIES[i] for i in labels]
        rows.append(_row(source, f"ensemble:{rule.value}", fold, compute_metrics(gold, pred), len(gold)))


def _row(source, model, fold, m: Metrics, n_test: int) -> ResultRow:
    # single-label multiclass identity; a violation means the metrics are broken
    if abs(m.weighted_recall - m.accuracy) > 1e-12:
        raise AssertionError(f"weighted recall {m.weighted_recall} differs from accuracy {m.accuracy}")
    return ResultRow(source, model, fold, m.accuracy, m.weighted_precision, m.weighted_recall, m.weighted_f1, n_test)


def _average_rows(rows: list[ResultRow], spec: ExperimentSpec) -> list[ResultRow]:
    out = []
    for source in spec.sources:
        models = []
        for r in rows:
            if r.source is source and r.model not in models:
                models.append(r.model)
        for model in models:
            group = [r for r in rows if r.source is source and r.model == model]
            out.extend(group)
            out.append(ResultRow(
                source, model, 0,
                float(np.mean([r.accuracy for r in group])),
                float(np.mean([r.precision for r in group])),
                float(np.mean([r.recall for r in group])),
                float(np.mean([r.f1 for r in group])),
                int(sum(r.n_test for r in group)),
            ))
    return out


def run_experiment(
    spec: ExperimentSpec,
    auto_corpus: Sequence[Document] | None,
    manual_corpus: Sequence[Document],
    lexicon: Lexicon | None = None,
    on_model: ModelCallback | None = None,
) -> ExperimentReport:
    """Train every requested regime per fold and score it on the fold's manual test set.

    The auto regime trains on the whole auto corpus (labeled here with
    ``lexicon`` unless it already is), so its models are fitted once and
    reused on every fold. The fold plan depends only on the manual corpus
    and ``spec.seed``.
    """
    manual = list(manual_corpus)
    for doc in manual:
        _gold(doc)
    if TrainingSource.AUTO in spec.sources:
        if auto_corpus is None:
            raise ValueError("the auto training source needs an auto corpus")
        auto = _auto_training_docs(spec, auto_corpus, lexicon)
        overlap = {d.id for d in auto} & {d.id for d in manual}
        if overlap:
            raise ValueError(
                f"{len(overlap)} document id(s) occur in both corpora, e.g. {sorted(overlap)[0]!r}"
            )
    else:
        auto = []

    if spec.fixed_split:
        train_docs, test_docs = stratified_split(manual, spec.test_fraction, spec.seed)
        train_ids = {d.id for d in train_docs}
        idx = np.arange(len(manual))
        is_train = np.array([d.id in train_ids for d in manual])
        plan = FoldPlan(((idx[is_train], idx[~is_train]),), len(manual))
    else:
        plan = make_folds(manual, spec.n_folds, spec.seed)

    config = spec.preprocess_config()
    prep = TextPreprocessor.from_config(config)
    manual_tokens = prep.transform([d.raw_text for d in manual])
    manual_gold = [d.gold_label for d in manual]

    auto_models = auto_featurizer = None
    if auto:
        auto_tokens = prep.transform([d.raw_text for d in auto])
        auto_featurizer = TfidfFeaturizer(min_df=spec.min_df).fit(auto_tokens)
        auto_models = _fit_models(spec, auto_featurizer.transform(auto_tokens), [d.auto_label for d in auto])
        if on_model is not None:
            on_model(TrainingSource.AUTO, 0, config, auto_featurizer, auto_models)

    rows: list[ResultRow] = []
    for fold, (train_idx, test_idx) in enumerate(plan, start=1):
        test_tokens = [manual_tokens[i] for i in test_idx]
        gold = [manual_gold[i] for i in test_idx]
        for source in spec.sources:
            if source is TrainingSource.AUTO:
                featurizer, models = auto_featurizer, auto_models
            else:
                train_tokens = [manual_tokens[i] for i in train_idx]
                featurizer = TfidfFeaturizer(min_df=spec.min_df).fit(train_tokens)
                models = _fit_models(spec, featurizer.transform(train_tokens), [manual_gold[i] for i in train_idx])
                if on_model is not None:
                    on_model(TrainingSource.MANUAL, fold, config, featurizer, models)
            _evaluate(spec, source, fold, models, featurizer.transform(test_tokens), gold, rows)

    return ExperimentReport(spec, _average_rows(rows, spec), n_auto_train=len(auto), n_manual=len(manual))


def standard_grid(seed: int = 42, n_folds: int = 5, **overrides) -> list[ExperimentSpec]:
    """The three comparisons: auto vs manual training, preprocessing off, single-emoji tweets only."""
    base = ExperimentSpec(name="auto_vs_manual", seed=seed, n_folds=n_folds, **overrides)
    return [
        base,
        replace(base, name="no_preprocessing", preprocess=False),
        replace(base, name="single_emoji_only", single_emoji_only=True, sources=(TrainingSource.AUTO,)),
    ]


def run_grid(specs, auto_corpus, manual_corpus, lexicon=None, on_model=None) -> list[ExperimentReport]:
    reports = []
    for spec in specs:
        cb = None
        if on_model is not None:
            cb = lambda src, fold, cfg, fz, models, _name=spec.name: on_model(_name, src, fold, cfg, fz, models)
        reports.append(run_experiment(spec, auto_corpus, manual_corpus, lexicon, cb))
    return reports
