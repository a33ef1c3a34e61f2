from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
from sklearn.utils.validation import check_is_fitted

from ..lexicon import N_CATEGORIES
from .base import EmotionClassifier, encode_labels, softmax_rows


class LinearSVM(EmotionClassifier):
    """One-vs-rest linear SVM trained with Pegasos stochastic subgradient steps.

    Each of the four binary problems minimizes
    ``lambda_reg/2 * ||w||^2 + mean(max(0, 1 - y * (w.x + b)))`` with step
    size ``1 / (lambda_reg * t)``. The bias is learned as the weight of a
    constant feature (and so is regularized with the rest). All four
    problems share one seeded visiting order per epoch. Probabilities are the
    softmax of the four decision values.

    Parameters
    ----------
    lambda_reg : float
        Regularization strength.
    epochs : int
        Passes over the training set.
    projection : bool
        Project each weight vector onto the ball of radius
        ``1/sqrt(lambda_reg)`` after every step.
    random_state : int
        Seed for the visiting order.
    """

    kind = "svm"

    def __init__(self, lambda_reg=1e-4, epochs=20, projection=True, random_state=0):
        self.lambda_reg = lambda_reg
        self.epochs = epochs
        self.projection = projection
        self.random_state = random_state

    def fit(self, X, y):
        if not self.lambda_reg > 0:
            raise ValueError(f"lambda_reg must be positive, got {self.lambda_reg}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        X, y_idx = self._validate_Xy(X, y)
        if len(np.unique(y_idx)) < 2:
            raise ValueError("the SVM needs at least two classes in the training data")
        W = _pegasos_ovr(X, y_idx, self.lambda_reg, self.epochs, self.projection, self.random_state)
        self.coef_ = W[:, :-1]
        self.intercept_ = W[:, -1].copy()
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        X = self._validate_X(X, reset=False)
        return np.asarray(X @ self.coef_.T) + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        return softmax_rows(self.decision_function(X))

    def objective(self, X, y) -> float:
        """Summed one-vs-rest regularized hinge objective at the current weights."""
        check_is_fitted(self, "coef_")
        return hinge_objective(self.coef_, self.intercept_, X, y, self.lambda_reg)

    def to_params(self) -> dict:
        check_is_fitted(self, "coef_")
        return {
            "lambda_reg": float(self.lambda_reg),
            "epochs": int(self.epochs),
            "projection": bool(self.projection),
            "random_state": int(self.random_state),
            "n_features_in": int(self.n_features_in_),
            "coef": [[float(v) for v in row] for row in self.coef_],
            "intercept": [float(v) for v in self.intercept_],
        }

    @classmethod
    def from_params(cls, params: dict) -> "LinearSVM":
        model = cls(
            lambda_reg=params["lambda_reg"],
            epochs=params["epochs"],
            projection=params["projection"],
            random_state=params["random_state"],
        )
        model._restore_common(params)
        coef = np.asarray(params["coef"], dtype=np.float64)
        model.coef_ = coef.reshape(N_CATEGORIES, model.n_features_in_)
        model.intercept_ = np.asarray(params["intercept"], dtype=np.float64)
        return model


def hinge_objective(coef, intercept, X, y, lambda_reg) -> float:
    X = sp.csr_matrix(X)
    y_idx = encode_labels(y)
    signs = np.where(y_idx[:, None] == np.arange(N_CATEGORIES), 1.0, -1.0)
    margins = signs * (np.asarray(X @ np.asarray(coef).T) + intercept)
    hinge = np.maximum(0.0, 1.0 - margins).mean(axis=0)
    sq = (np.asarray(coef) ** 2).sum(axis=1) + np.asarray(intercept) ** 2
    return float((0.5 * lambda_reg * sq + hinge).sum())


def _pegasos_ovr(X: sp.csr_matrix, y_idx, lam, epochs, projection, seed) -> np.ndarray:
    n, d = X.shape
    Xa = sp.hstack([X, np.ones((n, 1))], format="csr")
    Xa.sum_duplicates()
    indptr, indices, data = Xa.indptr, Xa.indices, Xa.data
    signs = np.where(y_idx[:, None] == np.arange(N_CATEGORIES), 1.0, -1.0)
    row_sq = np.asarray(Xa.multiply(Xa).sum(axis=1)).ravel()

    # w_k = scale[k] * V[k]; keeps the (1 - 1/t) shrink O(1) per step
    V = np.zeros((N_CATEGORIES, d + 1))
    scale = np.ones(N_CATEGORIES)
    sqnorm = np.zeros(N_CATEGORIES)
    radius = 1.0 / math.sqrt(lam)
    rng = np.random.default_rng(seed)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            lo, hi = indptr[i], indptr[i + 1]
            idx = indices[lo:hi]
            val = data[lo:hi]
            block = V[:, idx]
            dots = block @ val
            margins = signs[i] * scale * dots
            if t == 1:
                V[:] = 0.0
                scale[:] = 1.0
                sqnorm[:] = 0.0
                dots[:] = 0.0
            else:
                scale *= 1.0 - 1.0 / t
            eta = 1.0 / (lam * t)
            viol = margins < 1.0
            if viol.any():
                ks = np.flatnonzero(viol)
                coef = eta * signs[i, ks] / scale[ks]
                sqnorm[ks] += 2.0 * coef * dots[ks] + coef * coef * row_sq[i]
                V[np.ix_(ks, idx)] = block[ks] + coef[:, None] * val
            if projection:
                norms = scale * np.sqrt(np.maximum(sqnorm, 0.0))
                over = norms > radius
                if over.any():
                    scale[over] *= radius / norms[over]
            if scale.min() < 1e-9:
                V *= scale[:, None]
                sqnorm *= scale * scale
                scale[:] = 1.0
    return V * scale[:, None]
