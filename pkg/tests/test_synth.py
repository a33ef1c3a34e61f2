import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from emodist.labeling import build_auto_corpus
from emodist.lexicon import CATEGORIES, extract_emojis
from emodist.preprocess import collapse_repeats, normalize
from emodist.synth import SynthConfig, add_surface_noise, generate_corpus, make_vocabulary


@pytest.fixture(scope="module")
def corpus(lexicon):
    return generate_corpus(SynthConfig(n_auto=800, n_manual=200, n_terms=120, multi_emoji_rate=0.5), lexicon, seed=4)


def test_deterministic(lexicon):
    cfg = SynthConfig(n_auto=50, n_manual=20, n_terms=40)
    a = generate_corpus(cfg, lexicon, seed=1)
    b = generate_corpus(cfg, lexicon, seed=1)
    c = generate_corpus(cfg, lexicon, seed=2)
    assert a.auto == b.auto and a.manual == b.manual
    assert a.auto != c.auto


def test_manual_balanced_and_emoji_free(corpus, lexicon):
    counts = [sum(d.gold_label is c for d in corpus.manual) for c in CATEGORIES]
    assert counts == [50, 50, 50, 50]
    assert all(not extract_emojis(d.raw_text, lexicon) for d in corpus.manual)


def test_emoji_labels_are_the_intended_labels(corpus, lexicon):
    labeled = build_auto_corpus(corpus.auto, lexicon, seed=0)
    assert len(labeled) == len(corpus.auto)
    assert all(d.auto_label is corpus.auto_intended[d.id] for d in labeled)


def test_noise_rate_near_target(corpus):
    assert abs(corpus.auto_noise_rate - 0.1) < 0.035


def test_multi_emoji_share(corpus, lexicon):
    multi = np.mean([len(extract_emojis(d.raw_text, lexicon)) > 1 for d in corpus.auto])
    assert 0.4 < multi < 0.6


def test_zero_noise(lexicon):
    c = generate_corpus(SynthConfig(n_auto=100, n_manual=8, n_terms=20, label_noise=0.0), lexicon, seed=0)
    assert c.auto_noise_rate == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(label_noise=1.0)
    with pytest.raises(ValueError):
        SynthConfig(n_terms=3)
    with pytest.raises(ValueError):
        SynthConfig(doc_len=(5, 2))


@given(st.integers(0, 2**32 - 1))
def test_surface_noise_is_undone_by_normalization(seed):
    rng = np.random.default_rng(seed)
    for word in make_vocabulary(20, rng):
        noisy = add_surface_noise(word, rng)
        assert normalize(collapse_repeats(noisy)) == word
