"""Bag-of-words vocabulary and smoothed, L2-normalized TF-IDF vectors."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

__all__ = [
    "Vocabulary",
    "SparseVector",
    "fit_vocabulary",
    "transform",
    "to_csr",
    "rows_to_vectors",
    "TfidfFeaturizer",
]


@dataclass(frozen=True)
class Vocabulary:
    """Lexicographically indexed terms with their document frequencies."""

    terms: tuple[str, ...]
    df: tuple[int, ...]
    n_docs: int
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.terms) != len(self.df):
            raise ValueError("terms and df must have equal length")
        if list(self.terms) != sorted(set(self.terms)):
            raise ValueError("terms must be unique and sorted")
        if any(d < 1 or d > self.n_docs for d in self.df):
            raise ValueError("every document frequency must lie in [1, n_docs]")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def idf(self, term: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df[self.index[term]])) + 1.0

    @property
    def idf_array(self) -> np.ndarray:
        df = np.asarray(self.df, dtype=np.float64)
        return np.log((1.0 + self.n_docs) / (1.0 + df)) + 1.0

    def to_dict(self) -> dict:
        return {"terms": list(self.terms), "df": list(self.df), "n_docs": self.n_docs}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(tuple(d["terms"]), tuple(int(x) for x in d["df"]), int(d["n_docs"]))


@dataclass(frozen=True)
class SparseVector:
    """Strictly increasing ``indices`` with positive ``weights``."""

    indices: tuple[int, ...] = ()
    weights: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.indices) != len(self.weights):
            raise ValueError("indices and weights must have equal length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")

    def __len__(self) -> int:
        return len(self.indices)

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights))

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.indices, self.weights))


def fit_vocabulary(token_lists: Sequence[Sequence[str]], min_df: int = 1) -> Vocabulary:
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    if len(token_lists) == 0:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    df: Counter[str] = Counter()
    for tokens in token_lists:
        df.update(set(tokens))
    terms = sorted(t for t, n in df.items() if n >= min_df)
    return Vocabulary(tuple(terms), tuple(df[t] for t in terms), len(token_lists))


def transform(tokens: Iterable[str], vocab: Vocabulary) -> SparseVector:
    """TF-IDF of one token list: raw count times smoothed idf, L2-normalized."""
    counts = Counter(t for t in tokens if t in vocab.index)
    if not counts:
        return SparseVector()
    idx = sorted(vocab.index[t] for t in counts)
    terms = vocab.terms
    raw = [counts[terms[i]] * vocab.idf(terms[i]) for i in idx]
    norm = math.sqrt(sum(w * w for w in raw))
    return SparseVector(tuple(idx), tuple(w / norm for w in raw))


def to_csr(vectors: Sequence[SparseVector], n_features: int) -> sp.csr_matrix:
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, v in enumerate(vectors):
        indptr[i + 1] = indptr[i] + len(v)
    indices = np.fromiter((j for v in vectors for j in v.indices), dtype=np.int64, count=indptr[-1])
    data = np.fromiter((w for v in vectors for w in v.weights), dtype=np.float64, count=indptr[-1])
    if indices.size and indices.max() >= n_features:
        raise ValueError(f"vector index {indices.max()} out of range for {n_features} features")
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), n_features))


def rows_to_vectors(X) -> list[SparseVector]:
    X = sp.csr_matrix(X)
    X.sort_indices()
    out = []
    for i in range(X.shape[0]):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        keep = X.data[lo:hi] > 0
        out.append(
            SparseVector(
                tuple(int(j) for j in X.indices[lo:hi][keep]),
                tuple(float(w) for w in X.data[lo:hi][keep]),
            )
        )
    return out


class TfidfFeaturizer(BaseEstimator, TransformerMixin):
    """Fit a vocabulary on token lists and map token lists to a CSR TF-IDF matrix."""

    def __init__(self, min_df=1):
        self.min_df = min_df

    def fit(self, X, y=None):
        self.vocabulary_ = fit_vocabulary(list(X), self.min_df)
        self.n_features_out_ = len(self.vocabulary_)
        return self

    def transform(self, X):
        check_is_fitted(self, "vocabulary_")
        vocab = self.vocabulary_
        return to_csr([transform(tokens, vocab) for tokens in X], len(vocab))

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "vocabulary_")
        return np.asarray(self.vocabulary_.terms, dtype=object)
