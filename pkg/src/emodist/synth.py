"""Class-conditional unigram generator for emoji-labeled synthetic tweet corpora.

Words are random Arabic letter strings. Each term has a home class; a class
draws its home terms ``1 + signal`` times more often than other terms, on
top of a Zipf-like base frequency. Auto-corpus documents carry emojis chosen
so that emoji labeling yields the intended label, which is the true class
flipped to a random other class with probability ``label_noise``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .labeling import Document, Provenance
from .lexicon import CATEGORIES, N_CATEGORIES, EmotionCategory, Lexicon, load_lexicon, default_lexicon_path

__all__ = ["SynthConfig", "SyntheticCorpus", "generate_corpus", "make_vocabulary", "add_surface_noise"]

# plain letters only: no hamza-alef forms, teh marbuta, or tatweel
_LETTERS = "ابتثجحخدذرزسشصضطظعغفقكلمنهوي"
_ALEF_VARIANTS = ("أ", "إ", "آ")


@dataclass(frozen=True)
class SynthConfig:
    n_auto: int = 2000
    n_manual: int = 600
    n_terms: int = 300
    label_noise: float = 0.1
    multi_emoji_rate: float = 0.425
    signal: float = 1.5
    doc_len: tuple[int, int] = (6, 14)
    zipf_exponent: float = 0.7
    surface_noise: float = 0.0
    trailing_hashtag_rate: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.label_noise < 1.0:
            raise ValueError("label_noise must lie in [0, 1)")
        if not 0.0 <= self.multi_emoji_rate <= 1.0:
            raise ValueError("multi_emoji_rate must lie in [0, 1]")
        if self.n_terms < N_CATEGORIES:
            raise ValueError("n_terms must be at least the number of classes")
        lo, hi = self.doc_len
        if not 1 <= lo <= hi:
            raise ValueError("doc_len must be (min, max) with 1 <= min <= max")


@dataclass
class SyntheticCorpus:
    auto: list[Document]
    manual: list[Document]
    terms: list[str]
    term_class: np.ndarray
    auto_true: dict[str, EmotionCategory] = field(default_factory=dict)
    auto_intended: dict[str, EmotionCategory] = field(default_factory=dict)

    @property
    def auto_noise_rate(self) -> float:
        if not self.auto_true:
            return 0.0
        return float(np.mean([self.auto_true[k] != self.auto_intended[k] for k in self.auto_true]))


def make_vocabulary(n_terms: int, rng: np.random.Generator) -> list[str]:
    """Distinct words of 3-6 letters with no letter repeated back to back.

    About two thirds of the words contain a bare alef so alef-form noise has
    something to act on.
    """
    words: set[str] = set()
    out: list[str] = []
    while len(out) < n_terms:
        length = int(rng.integers(3, 7))
        letters = []
        for _ in range(length):
            ch = _LETTERS[int(rng.integers(len(_LETTERS)))]
            while letters and ch == letters[-1]:
                ch = _LETTERS[int(rng.integers(len(_LETTERS)))]
            letters.append(ch)
        if "ا" not in letters and rng.random() < 0.65:
            pos = int(rng.integers(1, length))
            if letters[pos - 1] != "ا" and (pos + 1 >= length or letters[pos + 1] != "ا"):
                letters[pos] = "ا"
        word = "".join(letters)
        if word not in words:
            words.add(word)
            out.append(word)
    return out


def add_surface_noise(word: str, rng: np.random.Generator) -> str:
    """Elongate one letter and swap bare alefs for hamza/madda forms."""
    chars = list(word)
    for i, ch in enumerate(chars):
        if ch == "ا" and rng.random() < 0.7:
            chars[i] = _ALEF_VARIANTS[int(rng.integers(len(_ALEF_VARIANTS)))]
    if rng.random() < 0.7:
        i = int(rng.integers(len(chars)))
        chars[i] = chars[i] * int(rng.integers(3, 7))
    return "".join(chars)


def _class_distributions(cfg: SynthConfig, rng: np.random.Generator):
    term_class = rng.integers(0, N_CATEGORIES, size=cfg.n_terms)
    base = 1.0 / np.arange(1, cfg.n_terms + 1) ** cfg.zipf_exponent
    base = base[rng.permutation(cfg.n_terms)]
    dists = np.empty((N_CATEGORIES, cfg.n_terms))
    for c in range(N_CATEGORIES):
        w = base * (1.0 + cfg.signal * (term_class == c))
        dists[c] = w / w.sum()
    return term_class, dists


def _balanced_labels(n: int, rng: np.random.Generator) -> np.ndarray:
    labels = np.arange(n) % N_CATEGORIES
    return labels[rng.permutation(n)]


def _words(cfg, dists, terms, c, rng) -> list[str]:
    length = int(rng.integers(cfg.doc_len[0], cfg.doc_len[1] + 1))
    picks = rng.choice(len(terms), size=length, p=dists[c])
    words = [terms[i] for i in picks]
    if cfg.surface_noise > 0:
        words = [add_surface_noise(w, rng) if rng.random() < cfg.surface_noise else w for w in words]
    if cfg.trailing_hashtag_rate > 0 and rng.random() < cfg.trailing_hashtag_rate:
        for _ in range(int(rng.integers(1, 3))):
            a, b = (terms[int(i)] for i in rng.integers(len(terms), size=2))
            words.append(f"#{a}_{b}")
    return words


def _emojis_for(label: int, by_cat, multi_rate: float, rng) -> list[str]:
    pool = by_cat[CATEGORIES[label]]
    first = pool[int(rng.integers(len(pool)))]
    chosen = [first]
    totals = np.zeros(N_CATEGORIES)
    totals[label] += abs(first.score)
    if rng.random() < multi_rate:
        for _ in range(int(rng.integers(1, 3))):
            other = int(rng.integers(N_CATEGORIES))
            other_pool = by_cat[CATEGORIES[other]]
            e = other_pool[int(rng.integers(len(other_pool)))]
            if other != label and totals[other] + abs(e.score) >= totals[label]:
                e = pool[int(rng.integers(len(pool)))]
                other = label
            chosen.append(e)
            totals[other] += abs(e.score)
    return [e.emoji for e in chosen]


def _insert_emojis(words: list[str], emojis: list[str], rng) -> str:
    words = list(words)
    for emoji in emojis:
        if words and rng.random() < 0.3:
            i = int(rng.integers(len(words)))
            words[i] = words[i] + emoji
        else:
            words.insert(int(rng.integers(len(words) + 1)), emoji)
    return " ".join(words)


def generate_corpus(cfg: SynthConfig | None = None, lexicon: Lexicon | None = None, seed: int = 0) -> SyntheticCorpus:
    """Generate an unlabeled emoji-bearing auto corpus and a clean manual corpus.

    Both share one vocabulary and class-conditional term distributions.
    Manual documents are class-balanced and emoji-free.
    """
    cfg = cfg or SynthConfig()
    lex = lexicon if lexicon is not None else load_lexicon(default_lexicon_path())
    by_cat = lex.by_category()
    if any(not by_cat[c] for c in CATEGORIES):
        raise ValueError("the lexicon needs at least one emoji per category")
    rng = np.random.default_rng(seed)
    terms = make_vocabulary(cfg.n_terms, rng)
    term_class, dists = _class_distributions(cfg, rng)

    manual = []
    for i, c in enumerate(_balanced_labels(cfg.n_manual, rng)):
        text = " ".join(_words(cfg, dists, terms, c, rng))
        manual.append(Document(f"m{i:06d}", text, gold_label=CATEGORIES[c], provenance=Provenance.MANUAL))

    auto, auto_true, auto_intended = [], {}, {}
    for i, c in enumerate(_balanced_labels(cfg.n_auto, rng)):
        label = int(c)
        if rng.random() < cfg.label_noise:
            label = int(rng.choice([k for k in range(N_CATEGORIES) if k != c]))
        words = _words(cfg, dists, terms, c, rng)
        text = _insert_emojis(words, _emojis_for(label, by_cat, cfg.multi_emoji_rate, rng), rng)
        doc_id = f"a{i:06d}"
        auto.append(Document(doc_id, text))
        auto_true[doc_id] = CATEGORIES[c]
        auto_intended[doc_id] = CATEGORIES[label]

    return SyntheticCorpus(auto, manual, terms, term_class, auto_true, auto_intended)
