import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.feature_extraction.text import TfidfVectorizer

from emodist.features import (
    SparseVector,
    TfidfFeaturizer,
    Vocabulary,
    fit_vocabulary,
    rows_to_vectors,
    to_csr,
    transform,
)

DOCS = [["a", "b"], ["b", "c"]]

token_lists = st.lists(st.lists(st.sampled_from("abcdefgh"), max_size=8), min_size=1, max_size=12)


class TestVocabulary:
    def test_counts(self):
        v = fit_vocabulary(DOCS)
        assert v.terms == ("a", "b", "c")
        assert v.df == (1, 2, 1)
        assert v.n_docs == 2

    def test_min_df(self):
        assert fit_vocabulary(DOCS, min_df=2).terms == ("b",)

    def test_brute_force_df(self):
        docs = [["x", "y", "x"], ["y", "z"], ["z", "z", "w"]]
        v = fit_vocabulary(docs)
        for term, df in zip(v.terms, v.df):
            assert df == sum(term in d for d in docs)

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            fit_vocabulary([])

    def test_bad_min_df(self):
        with pytest.raises(ValueError):
            fit_vocabulary(DOCS, min_df=0)

    def test_validation(self):
        with pytest.raises(ValueError):
            Vocabulary(("b", "a"), (1, 1), 2)
        with pytest.raises(ValueError):
            Vocabulary(("a",), (3,), 2)

    def test_dict_round_trip(self):
        v = fit_vocabulary(DOCS)
        assert Vocabulary.from_dict(v.to_dict()) == v


class TestTransform:
    def test_single_term(self):
        vec = transform(["b"], fit_vocabulary(DOCS))
        assert vec.indices == (1,)
        assert vec.weights == pytest.approx((1.0,))

    def test_oov(self):
        assert len(transform(["z"], fit_vocabulary(DOCS))) == 0

    def test_hand_computed(self):
        idf_a = math.log(3 / 2) + 1
        idf_b = math.log(3 / 3) + 1
        raw = np.array([2 * idf_a, 1 * idf_b])
        expected = raw / np.linalg.norm(raw)
        vec = transform(["a", "a", "b"], fit_vocabulary(DOCS))
        assert vec.indices == (0, 1)
        np.testing.assert_allclose(vec.weights, expected, rtol=0, atol=1e-12)

    def test_sparse_vector_validation(self):
        with pytest.raises(ValueError):
            SparseVector((1, 0), (0.5, 0.5))
        with pytest.raises(ValueError):
            SparseVector((0,), (0.0,))


@given(token_lists, st.integers(1, 3))
def test_matches_sklearn_tfidf(docs, min_df):
    if not any(sum(t in d for d in docs) >= min_df for t in "abcdefgh"):
        return
    ours = TfidfFeaturizer(min_df=min_df).fit(docs)
    ref = TfidfVectorizer(analyzer=lambda d: d, min_df=min_df, norm="l2", smooth_idf=True, sublinear_tf=False)
    expected = ref.fit_transform(docs).toarray()
    assert list(ours.get_feature_names_out()) == list(ref.get_feature_names_out())
    np.testing.assert_allclose(ours.transform(docs).toarray(), expected, atol=1e-12)


@given(token_lists, st.lists(st.sampled_from("abcdefghxyz"), max_size=10), st.randoms(use_true_random=False))
def test_transform_properties(docs, tokens, rnd):
    v = fit_vocabulary(docs)
    vec = transform(tokens, v)
    shuffled = list(tokens)
    rnd.shuffle(shuffled)
    assert transform(shuffled, v) == vec
    assert all(w > 0 for w in vec.weights)
    assert list(vec.indices) == sorted(set(vec.indices))
    assert all(0 <= i < len(v) for i in vec.indices)
    norm = vec.norm()
    assert norm == 0 or abs(norm - 1) < 1e-9


@given(token_lists)
def test_csr_round_trip(docs):
    v = fit_vocabulary(docs)
    vecs = [transform(d, v) for d in docs]
    X = to_csr(vecs, len(v))
    assert X.shape == (len(docs), len(v))
    assert rows_to_vectors(X) == vecs
