"""Emoji-based distant supervision for four-class emotion classification."""
from .classifiers import LinearSVM, MultinomialNaiveBayes, RandomForest, make_classifier
from .ensemble import CombineRule, FixedRuleEnsemble, combine, combine_proba
from .evaluation import (
    ExperimentSpec,
    TrainingSource,
    compute_metrics,
    make_folds,
    run_experiment,
    standard_grid,
    stratified_split,
)
from .features import SparseVector, TfidfFeaturizer, Vocabulary, fit_vocabulary, transform
from .labeling import Document, Provenance, auto_label, build_auto_corpus, score_emotions
from .lexicon import (
    CATEGORIES,
    EmojiEntry,
    EmotionCategory,
    Lexicon,
    extract_emojis,
    load_lexicon,
    strip_emojis,
)
from .preprocess import PreprocessConfig, TextPreprocessor, preprocess

__version__ = "0.1.0"

__all__ = [
    "CATEGORIES",
    "CombineRule",
    "Document",
    "EmojiEntry",
    "EmotionCategory",
    "ExperimentSpec",
    "FixedRuleEnsemble",
    "Lexicon",
    "LinearSVM",
    "MultinomialNaiveBayes",
    "PreprocessConfig",
    "Provenance",
    "RandomForest",
    "SparseVector",
    "TextPreprocessor",
    "TfidfFeaturizer",
    "TrainingSource",
    "Vocabulary",
    "auto_label",
    "build_auto_corpus",
    "combine",
    "combine_proba",
    "compute_metrics",
    "extract_emojis",
    "fit_vocabulary",
    "load_lexicon",
    "make_classifier",
    "make_folds",
    "preprocess",
    "run_experiment",
    "score_emotions",
    "standard_grid",
    "strip_emojis",
    "stratified_split",
    "transform",
]
