from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_is_fitted

from ..lexicon import N_CATEGORIES
from .base import EmotionClassifier, class_one_hot


class MultinomialNaiveBayes(EmotionClassifier):
    """Multinomial naive Bayes with additive smoothing over fractional term counts.

    TF-IDF weights are treated as counts: for class c and term t,
    ``P(t|c) = (w_ct + alpha) / (w_c + alpha * V)`` where ``w_ct`` is the
    summed weight of t over class-c documents and ``w_c`` the class total.
    Classes absent from training get prior zero and never receive mass.
    """

    kind = "mnb"

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X, y):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        X, y_idx = self._validate_Xy(X, y)
        if X.nnz and X.data.min() < 0:
            raise ValueError("multinomial naive Bayes needs nonnegative features")
        Y = class_one_hot(y_idx)
        self.class_count_ = Y.sum(axis=0)
        self.feature_count_ = np.asarray((X.T @ Y).T)
        with np.errstate(divide="ignore"):
            self.class_log_prior_ = np.log(self.class_count_ / self.class_count_.sum())
        self._update_log_prob()
        return self

    def _update_log_prob(self):
        smoothed = self.feature_count_ + self.alpha
        totals = smoothed.sum(axis=1, keepdims=True)
        self.feature_log_prob_ = np.log(smoothed) - np.log(totals)

    def joint_log_likelihood(self, X) -> np.ndarray:
        check_is_fitted(self, "feature_log_prob_")
        X = self._validate_X(X, reset=False)
        return np.asarray(X @ self.feature_log_prob_.T) + self.class_log_prior_

    def predict_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        top = jll.max(axis=1, keepdims=True)
        p = np.exp(jll - top)
        return p / p.sum(axis=1, keepdims=True)

    def to_params(self) -> dict:
        check_is_fitted(self, "feature_log_prob_")
        return {
            "alpha": float(self.alpha),
            "n_features_in": int(self.n_features_in_),
            "class_count": [float(v) for v in self.class_count_],
            "feature_count": [[float(v) for v in row] for row in self.feature_count_],
        }

    @classmethod
    def from_params(cls, params: dict) -> "MultinomialNaiveBayes":
        model = cls(alpha=params["alpha"])
        model._restore_common(params)
        model.class_count_ = np.asarray(params["class_count"], dtype=np.float64)
        fc = np.asarray(params["feature_count"], dtype=np.float64)
        model.feature_count_ = fc.reshape(N_CATEGORIES, model.n_features_in_)
        with np.errstate(divide="ignore"):
            model.class_log_prior_ = np.log(model.class_count_ / model.class_count_.sum())
        model._update_log_prob()
        return model
