"""Tweet preprocessing: trailing-hashtag removal, repeat collapsing, Arabic
normalization, tokenization, stopword removal and light stemming."""
from __future__ import annotations

import functools
import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

__all__ = [
    "AffixTable",
    "PreprocessConfig",
    "TextPreprocessor",
    "remove_trailing_hashtags",
    "collapse_repeats",
    "normalize",
    "tokenize",
    "remove_stopwords",
    "light_stem",
    "preprocess",
    "load_stopwords",
    "load_affix_table",
    "default_stopwords",
    "default_affix_table",
]

_DATA = Path(__file__).parent / "data"

_ALEF_MAP = {0x0623: 0x0627, 0x0625: 0x0627, 0x0622: 0x0627, 0x0629: 0x0647}
_DIACRITICS_MAP = {cp: None for cp in [0x0640, *range(0x064B, 0x0653)]}
_NORMALIZE_TABLE = {**_ALEF_MAP, **_DIACRITICS_MAP}
_REPEAT_RE = re.compile(r"(.)\1{2,}", re.DOTALL)


@dataclass(frozen=True)
class AffixTable:
    prefixes: tuple[str, ...]
    suffixes: tuple[str, ...]
    min_stem_len: int = 2

    def __post_init__(self):
        if self.min_stem_len < 2:
            raise ValueError(f"min_stem_len must be >= 2, got {self.min_stem_len}")
        if any(not a for a in self.prefixes) or any(not a for a in self.suffixes):
            raise ValueError("affix lists must not contain empty strings")
        # longest first; ties keep file order
        object.__setattr__(self, "prefixes", tuple(sorted(self.prefixes, key=len, reverse=True)))
        object.__setattr__(self, "suffixes", tuple(sorted(self.suffixes, key=len, reverse=True)))


def load_affix_table(path: str | Path) -> AffixTable:
    """Read an affix table with ``[prefixes]``/``[suffixes]`` sections and ``min_stem_len = N``."""
    prefixes: list[str] = []
    suffixes: list[str] = []
    min_stem_len = 2
    section = None
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower() in ("[prefixes]", "[suffixes]"):
            section = line.lower()
        elif "=" in line:
            key, _, value = (s.strip() for s in line.partition("="))
            if key != "min_stem_len":
                raise ValueError(f"{path}:{lineno}: unknown setting {key!r}")
            min_stem_len = int(value)
        elif section == "[prefixes]":
            prefixes.append(line)
        elif section == "[suffixes]":
            suffixes.append(line)
        else:
            raise ValueError(f"{path}:{lineno}: affix outside a [prefixes]/[suffixes] section")
    return AffixTable(tuple(prefixes), tuple(suffixes), min_stem_len)


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One stopword per line, ``#`` comments. Normalized forms are included too."""
    words = set()
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        word = raw.strip()
        if not word or word.startswith("#"):
            continue
        words.add(word)
        words.add(normalize(word))
    return frozenset(words)


@functools.lru_cache(maxsize=None)
def default_stopwords() -> frozenset[str]:
    return load_stopwords(_DATA / "stopwords_ar.txt")


@functools.lru_cache(maxsize=None)
def default_affix_table() -> AffixTable:
    return load_affix_table(_DATA / "light_stem_affixes.txt")


@dataclass(frozen=True)
class PreprocessConfig:
    """Which preprocessing steps run, plus the resources they use.

    ``strip_diacritics`` is a sub-flag of ``normalize``; turn it off for
    letter-form normalization only.
    """

    strip_trailing_hashtags: bool = True
    collapse_repeats: bool = True
    normalize: bool = True
    strip_diacritics: bool = True
    light_stem: bool = True
    remove_stopwords: bool = True
    stopwords: frozenset[str] = field(default_factory=default_stopwords, repr=False)
    affixes: AffixTable = field(default_factory=default_affix_table, repr=False)

    def __post_init__(self):
        if not isinstance(self.stopwords, frozenset):
            object.__setattr__(self, "stopwords", frozenset(self.stopwords))

    @classmethod
    def all_off(cls, **kwargs) -> "PreprocessConfig":
        flags = dict(
            strip_trailing_hashtags=False,
            collapse_repeats=False,
            normalize=False,
            strip_diacritics=False,
            light_stem=False,
            remove_stopwords=False,
        )
        flags.update(kwargs)
        return cls(**flags)

    def with_flags(self, **flags) -> "PreprocessConfig":
        return replace(self, **flags)

    def to_dict(self) -> dict:
        return {
            "strip_trailing_hashtags": self.strip_trailing_hashtags,
            "collapse_repeats": self.collapse_repeats,
            "normalize": self.normalize,
            "strip_diacritics": self.strip_diacritics,
            "light_stem": self.light_stem,
            "remove_stopwords": self.remove_stopwords,
            "stopwords": sorted(self.stopwords),
            "prefixes": list(self.affixes.prefixes),
            "suffixes": list(self.affixes.suffixes),
            "min_stem_len": self.affixes.min_stem_len,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessConfig":
        return cls(
            strip_trailing_hashtags=bool(d["strip_trailing_hashtags"]),
            collapse_repeats=bool(d["collapse_repeats"]),
            normalize=bool(d["normalize"]),
            strip_diacritics=bool(d["strip_diacritics"]),
            light_stem=bool(d["light_stem"]),
            remove_stopwords=bool(d["remove_stopwords"]),
            stopwords=frozenset(d["stopwords"]),
            affixes=AffixTable(tuple(d["prefixes"]), tuple(d["suffixes"]), int(d["min_stem_len"])),
        )


def _is_hashtag(token: str) -> bool:
    return token.startswith("#")


def _hashtag_words(token: str) -> str:
    return token.replace("#", " ").replace("_", " ").strip()


def remove_trailing_hashtags(text: str) -> str:
    """Drop the run of hashtags ending the tweet; keep the others as plain words.

    A tweet made only of hashtags has no trailing run (its first hashtag is
    leading), so all of its hashtags are kept as words. Whitespace is
    collapsed to single spaces.
    """
    tokens = text.split()
    end = len(tokens)
    while end > 1 and _is_hashtag(tokens[end - 1]):
        end -= 1
    if end == 1 and _is_hashtag(tokens[0]):
        end = len(tokens)
    words = []
    for tok in tokens[:end]:
        if _is_hashtag(tok):
            tok = _hashtag_words(tok)
            if not tok:
                continue
        words.append(tok)
    return " ".join(words)


def collapse_repeats(text: str) -> str:
    """Replace every run of more than two identical characters with a single one."""
    return _REPEAT_RE.sub(r"\1", text)


def normalize(text: str, strip_diacritics: bool = True) -> str:
    """Unify alef forms to bare alef and teh marbuta to heh.

    With ``strip_diacritics`` the tatweel and the harakat U+064B..U+0652 are
    removed as well.
    """
    return text.translate(_NORMALIZE_TABLE if strip_diacritics else _ALEF_MAP)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    tokens = []
    for raw in text.split():
        i, j = 0, len(raw)
        while i < j and _is_punct(raw[i]):
            i += 1
        while j > i and _is_punct(raw[j - 1]):
            j -= 1
        if i < j:
            tokens.append(raw[i:j])
    return tokens


def remove_stopwords(tokens: Sequence[str], stopwords: Iterable[str]) -> list[str]:
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else frozenset(stopwords)
    return [t for t in tokens if t not in stop]


def light_stem(token: str, affixes: AffixTable | None = None) -> str:
    """Strip at most one prefix, then at most one suffix, longest match first.

    An affix is removed only when at least ``min_stem_len`` characters remain.
    """
    table = affixes if affixes is not None else default_affix_table()
    keep = table.min_stem_len
    for p in table.prefixes:
        if token.startswith(p) and len(token) - len(p) >= keep:
            token = token[len(p):]
            break
    for s in table.suffixes:
        if token.endswith(s) and len(token) - len(s) >= keep:
            token = token[: -len(s)]
            break
    return token


def preprocess(text: str, config: PreprocessConfig | None = None) -> list[str]:
    """Run the enabled steps in order and return the token list."""
    cfg = config if config is not None else PreprocessConfig()
    if cfg.strip_trailing_hashtags:
        text = remove_trailing_hashtags(text)
    if cfg.collapse_repeats:
        text = collapse_repeats(text)
    if cfg.normalize:
        text = normalize(text, strip_diacritics=cfg.strip_diacritics)
        if cfg.collapse_repeats:
            # folding letter forms or dropping diacritics can create new runs (ةةه -> ههه)
            text = collapse_repeats(text)
    tokens = tokenize(text)
    if cfg.remove_stopwords:
        tokens = remove_stopwords(tokens, cfg.stopwords)
    if cfg.light_stem:
        tokens = [light_stem(t, cfg.affixes) for t in tokens]
    return tokens


class TextPreprocessor(BaseEstimator, TransformerMixin):
    """Stateless transformer mapping raw texts to token lists.

    ``stopwords`` and ``affixes`` default to the bundled Arabic resources.
    """

    def __init__(
        self,
        strip_trailing_hashtags=True,
        collapse_repeats=True,
        normalize=True,
        strip_diacritics=True,
        light_stem=True,
        remove_stopwords=True,
        stopwords=None,
        affixes=None,
    ):
        self.strip_trailing_hashtags = strip_trailing_hashtags
        self.collapse_repeats = collapse_repeats
        self.normalize = normalize
        self.strip_diacritics = strip_diacritics
        self.light_stem = light_stem
        self.remove_stopwords = remove_stopwords
        self.stopwords = stopwords
        self.affixes = affixes

    @classmethod
    def from_config(cls, config: PreprocessConfig) -> "TextPreprocessor":
        return cls(
            strip_trailing_hashtags=config.strip_trailing_hashtags,
            collapse_repeats=config.collapse_repeats,
            normalize=config.normalize,
            strip_diacritics=config.strip_diacritics,
            light_stem=config.light_stem,
            remove_stopwords=config.remove_stopwords,
            stopwords=config.stopwords,
            affixes=config.affixes,
        )

    @property
    def config(self) -> PreprocessConfig:
        return PreprocessConfig(
            strip_trailing_hashtags=self.strip_trailing_hashtags,
            collapse_repeats=self.collapse_repeats,
            normalize=self.normalize,
            strip_diacritics=self.strip_diacritics,
            light_stem=self.light_stem,
            remove_stopwords=self.remove_stopwords,
            stopwords=default_stopwords() if self.stopwords is None else frozenset(self.stopwords),
            affixes=default_affix_table() if self.affixes is None else self.affixes,
        )

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        if isinstance(X, str):
            raise TypeError("expected an iterable of texts, got a single string")
        cfg = self.config
        return [preprocess(text, cfg) for text in X]
