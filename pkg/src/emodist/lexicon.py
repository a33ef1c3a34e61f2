"""Scored emoji lexicon: loading, serialization, and emoji extraction from text."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

__all__ = [
    "EmotionCategory",
    "EmojiEntry",
    "Lexicon",
    "LexiconError",
    "load_lexicon",
    "parse_lexicon",
    "dump_lexicon",
    "save_lexicon",
    "default_lexicon_path",
    "extract_emojis",
    "strip_emojis",
]

ZWJ = 0x200D
_VARIATION_SELECTORS = frozenset((0xFE0E, 0xFE0F))


class EmotionCategory(str, enum.Enum):
    """The closed four-class emotion label set, totally ordered by declaration."""

    ANGER = "anger"
    DISGUST = "disgust"
    JOY = "joy"
    SADNESS = "sadness"

    @property
    def index(self) -> int:
        return _CATEGORY_INDEX[self]

    @classmethod
    def parse(cls, value: "str | EmotionCategory") -> "EmotionCategory":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown emotion category {value!r}; expected one of "
                + ", ".join(c.value for c in cls)
            ) from None

    @classmethod
    def from_index(cls, i: int) -> "EmotionCategory":
        return CATEGORIES[i]

    def __lt__(self, other):
        if not isinstance(other, EmotionCategory):
            return NotImplemented
        return self.index < other.index

    def __le__(self, other):
        if not isinstance(other, EmotionCategory):
            return NotImplemented
        return self.index <= other.index

    def __gt__(self, other):
        if not isinstance(other, EmotionCategory):
            return NotImplemented
        return self.index > other.index

    def __ge__(self, other):
        if not isinstance(other, EmotionCategory):
            return NotImplemented
        return self.index >= other.index

    def __str__(self) -> str:
        return self.value


CATEGORIES: tuple[EmotionCategory, ...] = tuple(EmotionCategory)
_CATEGORY_INDEX = {c: i for i, c in enumerate(CATEGORIES)}
N_CATEGORIES = len(CATEGORIES)


class LexiconError(ValueError):
    """Malformed, duplicate, or out-of-range lexicon content."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class EmojiEntry:
    codepoints: tuple[int, ...]
    category: EmotionCategory
    score: int

    def __post_init__(self):
        if not self.codepoints:
            raise LexiconError("emoji entry has no codepoints")
        if not isinstance(self.score, int) or isinstance(self.score, bool):
            raise LexiconError(f"score must be an integer, got {self.score!r}")
        if not 1 <= abs(self.score) <= 5:
            raise LexiconError(f"score {self.score} outside [-5, -1] U [1, 5]")

    @property
    def emoji(self) -> str:
        return "".join(map(chr, self.codepoints))

    def __repr__(self) -> str:
        return f"EmojiEntry({self.emoji!r}, {self.category.value}, {self.score:+d})"


class Lexicon:
    """Immutable emoji -> (category, score) table with greedy longest-match lookup.

    Variation selectors (U+FE0E/U+FE0F) are not significant: they are dropped
    from entry keys at construction and skipped when matching text.
    """

    __slots__ = ("_entries", "_by_key", "longest_len")

    def __init__(self, entries: Iterable[EmojiEntry] = ()):
        by_key: dict[tuple[int, ...], EmojiEntry] = {}
        for entry in entries:
            key = _strip_vs(entry.codepoints)
            if not key:
                raise LexiconError(f"entry {entry!r} consists only of variation selectors")
            if key in by_key:
                raise LexiconError(f"duplicate emoji {entry.emoji!r}")
            by_key[key] = entry
        self._by_key = by_key
        self._entries = tuple(by_key.values())
        self.longest_len = max((len(k) for k in by_key), default=0)

    @property
    def entries(self) -> tuple[EmojiEntry, ...]:
        return self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[EmojiEntry]:
        return iter(self._entries)

    def __contains__(self, emoji: str) -> bool:
        return _strip_vs(tuple(map(ord, emoji))) in self._by_key

    def __eq__(self, other) -> bool:
        if not isinstance(other, Lexicon):
            return NotImplemented
        return self._by_key == other._by_key

    def __repr__(self) -> str:
        return f"Lexicon({len(self)} entries, longest_len={self.longest_len})"

    def lookup(self, emoji: str) -> EmojiEntry | None:
        return self._by_key.get(_strip_vs(tuple(map(ord, emoji))))

    def by_category(self) -> Mapping[EmotionCategory, tuple[EmojiEntry, ...]]:
        out: dict[EmotionCategory, list[EmojiEntry]] = {c: [] for c in CATEGORIES}
        for e in self._entries:
            out[e.category].append(e)
        return {c: tuple(v) for c, v in out.items()}

    def _get(self, key: tuple[int, ...]) -> EmojiEntry | None:
        return self._by_key.get(key)


def _strip_vs(codepoints: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(cp for cp in codepoints if cp not in _VARIATION_SELECTORS)


def _parse_emoji_field(field: str, line: int) -> tuple[int, ...]:
    parts = field.split()
    if parts and all(p.upper().startswith("U+") for p in parts):
        try:
            cps = tuple(int(p[2:], 16) for p in parts)
        except ValueError:
            raise LexiconError(f"bad codepoint notation {field!r}", line) from None
        for cp in cps:
            if not 0 <= cp <= 0x10FFFF or 0xD800 <= cp <= 0xDFFF:
                raise LexiconError(f"invalid Unicode scalar value U+{cp:X}", line)
        return cps
    if not field or any(ch.isspace() for ch in field):
        raise LexiconError(f"bad emoji field {field!r}", line)
    return tuple(map(ord, field))


def parse_lexicon(text: str) -> Lexicon:
    """Parse lexicon TSV content; see :func:`load_lexicon` for the format."""
    entries: list[EmojiEntry] = []
    seen: dict[tuple[int, ...], int] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise LexiconError(f"expected 3 tab-separated fields, got {len(fields)}", lineno)
        emoji_field, cat_field, score_field = (f.strip() for f in fields)
        cps = _parse_emoji_field(emoji_field, lineno)
        try:
            category = EmotionCategory.parse(cat_field)
        except ValueError as exc:
            raise LexiconError(str(exc), lineno) from None
        try:
            score = int(score_field)
        except ValueError:
            raise LexiconError(f"score {score_field!r} is not an integer", lineno) from None
        if not 1 <= abs(score) <= 5:
            raise LexiconError(f"score {score} outside [-5, -1] U [1, 5]", lineno)
        key = _strip_vs(cps)
        if not key:
            raise LexiconError("emoji field consists only of variation selectors", lineno)
        if key in seen:
            raise LexiconError(f"duplicate emoji (first defined on line {seen[key]})", lineno)
        seen[key] = lineno
        entries.append(EmojiEntry(cps, category, score))
    return Lexicon(entries)


def load_lexicon(path: str | Path) -> Lexicon:
    """Load a lexicon TSV file.

    Each non-comment line holds three tab-separated fields: the emoji literal
    (or space-separated ``U+XXXX`` codepoints), a category name
    (case-insensitive), and a signed integer score with magnitude 1..5.
    Lines starting with ``#`` are comments.
    """
    return parse_lexicon(Path(path).read_text(encoding="utf-8"))


def dump_lexicon(lex: Lexicon) -> str:
    lines = []
    for e in lex:
        cps = " ".join(f"U+{cp:04X}" for cp in e.codepoints)
        lines.append(f"{cps}\t{e.category.value}\t{e.score}")
    return "".join(line + "\n" for line in lines)


def save_lexicon(lex: Lexicon, path: str | Path) -> None:
    Path(path).write_text(dump_lexicon(lex), encoding="utf-8", newline="\n")


def default_lexicon_path() -> Path:
    return Path(__file__).parent / "data" / "emoji_lexicon.tsv"


def _is_modifier(cp: int) -> bool:
    # skin tones, variation selectors, combining keycap, tag characters
    return (
        0x1F3FB <= cp <= 0x1F3FF
        or cp in _VARIATION_SELECTORS
        or cp == 0x20E3
        or 0xE0020 <= cp <= 0xE007F
    )


def _is_pictographic(cp: int) -> bool:
    # coarse emoji blocks; enough to tell a ZWJ continuation from ordinary text
    return (
        0x1F000 <= cp <= 0x1FAFF
        or 0x2600 <= cp <= 0x27BF
        or 0x2B00 <= cp <= 0x2BFF
        or 0x2190 <= cp <= 0x23FF
        or cp in (0x00A9, 0x00AE, 0x203C, 0x2049, 0x2122, 0x2139)
    )


def _scan(text: str, lex: Lexicon) -> Iterator[tuple[int, int, EmojiEntry]]:
    """Yield ``(start, end, entry)`` spans of ``text`` matched against ``lex``."""
    if not text or lex.longest_len == 0:
        return
    # match on a variation-selector-free view, keeping original offsets
    view = [(ord(ch), i) for i, ch in enumerate(text) if ord(ch) not in _VARIATION_SELECTORS]
    cps = [cp for cp, _ in view]
    n = len(view)
    n_text = len(text)
    pos = 0
    while pos < n:
        entry = None
        for length in range(min(lex.longest_len, n - pos), 0, -1):
            entry = lex._get(tuple(cps[pos:pos + length]))
            if entry is not None:
                break
        if entry is None:
            pos += 1
            continue
        start = view[pos][1]
        pos += length
        end = view[pos - 1][1] + 1
        # consume trailing modifiers and ZWJ continuations
        while end < n_text:
            cp = ord(text[end])
            if _is_modifier(cp):
                end += 1
            elif cp == ZWJ:
                end += 1
                if end < n_text and _is_pictographic(ord(text[end])):
                    end += 1
            else:
                break
        while pos < n and view[pos][1] < end:
            pos += 1
        yield start, end, entry


def extract_emojis(text: str, lex: Lexicon) -> list[EmojiEntry]:
    """Every lexicon emoji occurrence in ``text``, left to right, repeats included."""
    return [entry for _, _, entry in _scan(text, lex)]


def strip_emojis(text: str, lex: Lexicon) -> str:
    """Remove every matched emoji (with its consumed modifiers) from ``text``.

    Repeats until no match remains, since a removal can join the two halves
    of a multi-codepoint entry.
    """
    while True:
        pieces = []
        last = 0
        for start, end, _ in _scan(text, lex):
            pieces.append(text[last:start])
            last = end
        if not pieces:
            return text
        pieces.append(text[last:])
        text = "".join(pieces)
