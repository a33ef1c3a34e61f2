"""Fixed combining rules (average, product, maximum, minimum) over class probabilities."""
from __future__ import annotations

import enum
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.utils.validation import check_is_fitted

from .lexicon import CATEGORIES, N_CATEGORIES, EmotionCategory

__all__ = [
    "CombineRule",
    "check_prob_dist",
    "combine",
    "combine_proba",
    "FixedRuleEnsemble",
]

PROB_TOL = 1e-9
# below this the plain product has lost precision; rank in log space instead
_PRODUCT_FLOOR = 1e-280


class CombineRule(str, enum.Enum):
    AVERAGE = "average"
    PRODUCT = "product"
    MAXIMUM = "maximum"
    MINIMUM = "minimum"

    @classmethod
    def parse(cls, value: "str | CombineRule") -> "CombineRule":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown combining rule {value!r}; expected one of "
                + ", ".join(r.value for r in cls)
            ) from None

    def __str__(self) -> str:
        return self.value


def check_prob_dist(p, tol: float = PROB_TOL) -> np.ndarray:
    arr = np.asarray(
        [p[c] for c in CATEGORIES] if isinstance(p, Mapping) else p, dtype=np.float64
    )
    if arr.shape[-1] != N_CATEGORIES:
        raise ValueError(f"a distribution needs {N_CATEGORIES} entries, got {arr.shape[-1]}")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("probabilities must be finite and nonnegative")
    if np.any(np.abs(arr.sum(axis=-1) - 1.0) > tol):
        raise ValueError("probabilities must sum to 1")
    return arr


def combine_proba(probas: Sequence[np.ndarray], rule: CombineRule | str) -> tuple[np.ndarray, np.ndarray]:
    """Combine per-classifier ``(n, 4)`` probability matrices row by row.

    Returns the unnormalized ``(n, 4)`` combined scores and the winning
    category index per row (first maximum in category order).
    """
    rule = CombineRule.parse(rule)
    if len(probas) == 0:
        raise ValueError("need at least one distribution to combine")
    mats = [check_prob_dist(np.atleast_2d(p)) for p in probas]
    shape = mats[0].shape
    if any(m.shape != shape for m in mats):
        raise ValueError("all probability matrices must have the same shape")

    ranking = None
    # sorting across classifiers first makes sums and products independent of input order
    stacked = np.sort(np.stack(mats), axis=0)
    if rule is CombineRule.AVERAGE:
        total = stacked[0].copy()
        for m in stacked[1:]:
            total = total + m
        scores = total / len(mats)
    elif rule is CombineRule.PRODUCT:
        scores = stacked[0].copy()
        for m in stacked[1:]:
            scores = scores * m
        weak = scores.max(axis=1) < _PRODUCT_FLOOR
        if weak.any():
            with np.errstate(divide="ignore"):
                logs = sum(np.log(m[weak]) for m in mats)
            ranking = scores.copy()
            ranking[weak] = logs
    elif rule is CombineRule.MAXIMUM:
        scores = np.maximum.reduce(mats)
    else:
        scores = np.minimum.reduce(mats)

    labels = np.argmax(scores if ranking is None else ranking, axis=1)
    return scores, labels


def combine(dists: Sequence, rule: CombineRule | str) -> tuple[dict[EmotionCategory, float], EmotionCategory]:
    """Combine single-document distributions; returns ``(scores, label)``.

    Each distribution is a mapping keyed by category or a length-4 sequence
    in category order.
    """
    if len(dists) == 0:
        raise ValueError("need at least one distribution to combine")
    scores, labels = combine_proba([check_prob_dist(d)[None, :] for d in dists], rule)
    return {c: float(s) for c, s in zip(CATEGORIES, scores[0])}, CATEGORIES[int(labels[0])]


class FixedRuleEnsemble(ClassifierMixin, BaseEstimator):
    """Train several probabilistic classifiers independently and combine them by a fixed rule.

    Parameters
    ----------
    estimators : list of (name, estimator)
    rule : {"average", "product", "maximum", "minimum"}
    """

    def __init__(self, estimators, rule="average"):
        self.estimators = estimators
        self.rule = rule

    def fit(self, X, y):
        CombineRule.parse(self.rule)
        self.estimators_ = [(name, clone(est).fit(X, y)) for name, est in self.estimators]
        self.classes_ = np.array(CATEGORIES, dtype=object)
        return self

    def combined_scores(self, X) -> np.ndarray:
        check_is_fitted(self, "estimators_")
        return combine_proba([est.predict_proba(X) for _, est in self.estimators_], self.rule)[0]

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "estimators_")
        _, labels = combine_proba([est.predict_proba(X) for _, est in self.estimators_], self.rule)
        return self.classes_[labels]
