from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..features import SparseVector, to_csr
from ..lexicon import CATEGORIES, N_CATEGORIES, EmotionCategory


def encode_labels(y) -> np.ndarray:
    """Map category labels (enum members or names) to indices in category order."""
    return np.fromiter((EmotionCategory.parse(v).index for v in y), dtype=np.int64)


def softmax_rows(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class EmotionClassifier(ClassifierMixin, BaseEstimator):
    """Shared input handling for the four-class emotion classifiers.

    ``classes_`` is always the full category set, so ``predict_proba`` has
    four columns even when a class is missing from the training data.
    """

    kind: str = ""

    def _validate_X(self, X, reset: bool) -> sp.csr_matrix:
        if isinstance(X, SparseVector):
            X = [X]
        if isinstance(X, (list, tuple)) and X and isinstance(X[0], SparseVector):
            if reset:
                raise TypeError("fit needs a matrix; convert sparse vectors with features.to_csr")
            X = to_csr(X, self.n_features_in_)
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        X = sp.csr_matrix(X)
        if reset:
            self.n_features_in_ = X.shape[1]
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features but the model was fitted with "
                f"{self.n_features_in_}; was it built with the same vocabulary?"
            )
        return X

    def _validate_Xy(self, X, y):
        X = self._validate_X(X, reset=True)
        y_idx = encode_labels(y)
        if X.shape[0] == 0:
            raise ValueError("empty training set")
        if X.shape[0] != len(y_idx):
            raise ValueError(f"X has {X.shape[0]} rows but y has {len(y_idx)} labels")
        self.classes_ = np.array(CATEGORIES, dtype=object)
        return X, y_idx

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "classes_")
        proba = self.predict_proba(X)
        # argmax returns the first maximum, which is the category-order tie-break
        return self.classes_[np.argmax(proba, axis=1)]

    def to_params(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_params(cls, params: dict) -> "EmotionClassifier":
        raise NotImplementedError

    def _restore_common(self, params: dict) -> None:
        self.n_features_in_ = int(params["n_features_in"])
        self.classes_ = np.array(CATEGORIES, dtype=object)


def class_one_hot(y_idx: np.ndarray) -> np.ndarray:
    return np.eye(N_CATEGORIES)[y_idx]
