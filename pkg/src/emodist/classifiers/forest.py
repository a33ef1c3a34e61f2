from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.utils.validation import check_is_fitted

from ..lexicon import N_CATEGORIES
from . import _tree_builder
from .base import EmotionClassifier

_PREDICT_ROWS = 1024


@dataclass
class DecisionTree:
    """Flat array representation; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, 4) class frequencies of the node's samples

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, Xd: np.ndarray) -> np.ndarray:
        node = np.zeros(Xd.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            cur = node[active]
            go_left = Xd[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] >= 0]
        return node

    def to_dict(self) -> dict:
        leaves = self.feature < 0
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(v) for v in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            # only leaf values are used for prediction
            "leaf_value": [[float(v) for v in row] for row in self.value[leaves]],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        feature = np.asarray(d["feature"], dtype=np.int64)
        value = np.zeros((len(feature), N_CATEGORIES))
        leaf_value = np.asarray(d["leaf_value"], dtype=np.float64).reshape(-1, N_CATEGORIES)
        value[feature < 0] = leaf_value
        return cls(
            feature=feature,
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=value,
        )


def _n_candidates(rule, n_features: int) -> int:
    if rule is None:
        return n_features
    if rule == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    if rule == "log2":
        return max(1, math.ceil(math.log2(max(n_features, 2))))
    if isinstance(rule, (int, np.integer)) and not isinstance(rule, bool):
        if rule < 1:
            raise ValueError(f"max_features must be >= 1, got {rule}")
        return min(int(rule), n_features)
    if isinstance(rule, float) and 0.0 < rule <= 1.0:
        return max(1, math.ceil(rule * n_features))
    raise ValueError(f"unsupported max_features rule {rule!r}")


def grow_tree(X: sp.csr_matrix, y_idx: np.ndarray, sample: np.ndarray, max_features, rng: np.random.Generator, X_csc=None) -> DecisionTree:
    """Grow an unpruned Gini tree on the rows ``sample`` (duplicates allowed).

    Nodes split until pure or smaller than two samples. At each node,
    ``max_features`` candidates are drawn from the features that are not
    all-zero on the node; more are drawn only if none of those admits a split.
    ``X`` must have sorted indices without duplicates.
    """
    k = _n_candidates(max_features, X.shape[1])
    seed = int(rng.integers(0, 2**63))
    if X_csc is None:
        X_csc = X.tocsc()
        X_csc.sort_indices()
    feature, threshold, left, right, value = _tree_builder.grow(
        X.indptr.astype(np.int64),
        X.indices.astype(np.int64),
        X.data,
        X_csc.indptr.astype(np.int64),
        X_csc.indices.astype(np.int64),
        X_csc.data,
        y_idx.astype(np.int64),
        np.ascontiguousarray(sample, dtype=np.int64),
        X.shape[1],
        k,
        seed,
    )
    return DecisionTree(feature, threshold, left, right, value)


def _dense_chunks(X: sp.csr_matrix):
    for lo in range(0, X.shape[0], _PREDICT_ROWS):
        yield lo, X[lo:lo + _PREDICT_ROWS].toarray()


class RandomForest(EmotionClassifier):
    """Bagged Gini decision trees; probabilities average the leaf class frequencies.

    Each tree gets its own generator spawned from ``random_state``, used for
    the bootstrap draw and the per-node feature sampling.

    Parameters
    ----------
    n_estimators : int
        Number of trees.
    max_features : {"sqrt", "log2"}, int, float or None
        Candidate features per split; "sqrt" is ``ceil(sqrt(V))``.
    bootstrap : bool
        Draw a bootstrap sample per tree; otherwise every tree sees all rows.
    oob_score : bool
        Compute ``oob_score_``, the out-of-bag accuracy.
    random_state : int
    """

    kind = "rf"

    def __init__(self, n_estimators=100, max_features="sqrt", bootstrap=True, oob_score=False, random_state=0):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.oob_score = oob_score
        self.random_state = random_state

    def fit(self, X, y):
        if self.n_estimators < 1:
            raise ValueError(f"n_estimators must be >= 1, got {self.n_estimators}")
        X, y_idx = self._validate_Xy(X, y)
        X.sum_duplicates()
        X.sort_indices()
        n = X.shape[0]
        _n_candidates(self.max_features, X.shape[1])
        seeds = np.random.SeedSequence(self.random_state).spawn(self.n_estimators)
        X_csc = X.tocsc()
        X_csc.sort_indices()
        trees = []
        oob_sum = np.zeros((n, N_CATEGORIES)) if self.oob_score else None
        for child in seeds:
            rng = np.random.default_rng(child)
            sample = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree = grow_tree(X, y_idx, sample, self.max_features, rng, X_csc)
            trees.append(tree)
            if oob_sum is not None:
                oob = np.setdiff1d(np.arange(n), sample)
                if oob.size:
                    oob_sum[oob] += tree.value[tree.apply(X[oob].toarray())]
        self.estimators_ = trees
        if oob_sum is not None:
            seen = oob_sum.sum(axis=1) > 0
            if not seen.any():
                raise ValueError("no out-of-bag samples; cannot compute oob_score_")
            self.oob_score_ = float(np.mean(np.argmax(oob_sum[seen], axis=1) == y_idx[seen]))
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "estimators_")
        X = self._validate_X(X, reset=False)
        out = np.zeros((X.shape[0], N_CATEGORIES))
        for lo, Xd in _dense_chunks(X):
            acc = np.zeros((Xd.shape[0], N_CATEGORIES))
            for tree in self.estimators_:
                acc += tree.value[tree.apply(Xd)]
            out[lo:lo + Xd.shape[0]] = acc / len(self.estimators_)
        return out

    def to_params(self) -> dict:
        check_is_fitted(self, "estimators_")
        return {
            "n_estimators": int(self.n_estimators),
            "max_features": self.max_features,
            "bootstrap": bool(self.bootstrap),
            "random_state": int(self.random_state),
            "n_features_in": int(self.n_features_in_),
            "trees": [t.to_dict() for t in self.estimators_],
        }

    @classmethod
    def from_params(cls, params: dict) -> "RandomForest":
        model = cls(
            n_estimators=params["n_estimators"],
            max_features=params["max_features"],
            bootstrap=params["bootstrap"],
            random_state=params["random_state"],
        )
        model._restore_common(params)
        model.estimators_ = [DecisionTree.from_dict(t) for t in params["trees"]]
        return model
