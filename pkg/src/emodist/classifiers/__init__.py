"""Multinomial naive Bayes, linear SVM and random forest emotion classifiers.

All three follow the scikit-learn estimator protocol and always report
probabilities over the four emotion categories in category order.
"""
from __future__ import annotations

from ..lexicon import EmotionCategory
from .base import EmotionClassifier, encode_labels
from .forest import DecisionTree, RandomForest
from .naive_bayes import MultinomialNaiveBayes
from .svm import LinearSVM, hinge_objective

__all__ = [
    "EmotionClassifier",
    "MultinomialNaiveBayes",
    "LinearSVM",
    "RandomForest",
    "DecisionTree",
    "CLASSIFIERS",
    "DEFAULT_HYPERPARAMS",
    "make_classifier",
    "classifier_from_params",
    "train_mnb",
    "train_svm",
    "train_rf",
    "predict_proba",
    "predict",
    "encode_labels",
    "hinge_objective",
]

CLASSIFIERS: dict[str, type[EmotionClassifier]] = {
    "svm": LinearSVM,
    "mnb": MultinomialNaiveBayes,
    "rf": RandomForest,
}

DEFAULT_HYPERPARAMS = {
    "mnb": {"alpha": 1.0},
    "svm": {"lambda_reg": 1e-4, "epochs": 20},
    "rf": {"n_estimators": 100, "max_features": "sqrt"},
}


def make_classifier(kind: str, random_state: int = 0, **params) -> EmotionClassifier:
    try:
        cls = CLASSIFIERS[kind]
    except KeyError:
        raise ValueError(f"unknown classifier {kind!r}; expected one of {', '.join(CLASSIFIERS)}") from None
    merged = {**DEFAULT_HYPERPARAMS[kind], **params}
    if "random_state" in cls().get_params():
        merged["random_state"] = random_state
    return cls(**merged)


def classifier_from_params(kind: str, params: dict) -> EmotionClassifier:
    return CLASSIFIERS[kind].from_params(params)


def train_mnb(X, y, alpha: float = 1.0) -> MultinomialNaiveBayes:
    return MultinomialNaiveBayes(alpha=alpha).fit(X, y)


def train_svm(X, y, lambda_reg: float = 1e-4, epochs: int = 20, seed: int = 0) -> LinearSVM:
    return LinearSVM(lambda_reg=lambda_reg, epochs=epochs, random_state=seed).fit(X, y)


def train_rf(X, y, n_trees: int = 100, max_features="sqrt", seed: int = 0) -> RandomForest:
    return RandomForest(n_estimators=n_trees, max_features=max_features, random_state=seed).fit(X, y)


def predict_proba(model: EmotionClassifier, x) -> dict[EmotionCategory, float]:
    """Probability distribution for a single vector, keyed by category."""
    proba = model.predict_proba(x)
    if proba.shape[0] != 1:
        raise ValueError("predict_proba(model, x) takes a single vector; use model.predict_proba for batches")
    return {c: float(p) for c, p in zip(model.classes_, proba[0])}


def predict(model: EmotionClassifier, x) -> EmotionCategory:
    return model.predict(x)[0]
