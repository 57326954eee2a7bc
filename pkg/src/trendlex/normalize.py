"""Text normalization: Unicode folding, punctuation stripping, phrase protection, stopwords."""
from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

JOINER = "_"


class PhraseTableError(ValueError):
    pass


@dataclass(frozen=True)
class PhraseTable:
    """Multi-word phrases protected as single joined tokens (longest match wins).

    Phrases are folded and split exactly like document text, so
    "Vision-Language Model" and "vision language model" are the same entry.
    """

    phrases: tuple[str, ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False)
    _max_len: int = field(default=0, init=False, repr=False, compare=False)
    _joined: frozenset = field(default=frozenset(), init=False, repr=False, compare=False)

    def __post_init__(self):
        index: dict[str, set[tuple[str, ...]]] = {}
        max_len = 0
        cleaned = []
        for phrase in self.phrases:
            if JOINER in phrase:
                raise PhraseTableError(f"phrase {phrase!r} contains the reserved {JOINER!r}")
            words = tuple(split_words(fold_text(phrase)))
            if len(words) < 2:
                raise PhraseTableError(f"phrase {phrase!r} is a single word")
            if len(words) > 6:
                raise PhraseTableError(f"phrase {phrase!r} has more than 6 words")
            cleaned.append(" ".join(words))
            index.setdefault(words[0], set()).add(words)
            max_len = max(max_len, len(words))
        object.__setattr__(self, "phrases", tuple(cleaned))
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_max_len", max_len)
        object.__setattr__(self, "_joined", frozenset(p.replace(" ", JOINER) for p in cleaned))

    @classmethod
    def of(cls, phrases: Iterable[str]) -> "PhraseTable":
        return cls(tuple(phrases))

    def joined_tokens(self) -> frozenset[str]:
        return self._joined

    def longest_at(self, words: Sequence[str], i: int) -> int:
        """Length of the longest phrase starting at words[i], or 0."""
        candidates = self._index.get(words[i])
        if not candidates:
            return 0
        for n in range(min(self._max_len, len(words) - i), 1, -1):
            if tuple(words[i:i + n]) in candidates:
                return n
        return 0


@dataclass(frozen=True)
class StopwordSet:
    general: frozenset[str] = frozenset()
    domain_generic: frozenset[str] = frozenset()
    _all: frozenset = field(default=frozenset(), init=False, repr=False, compare=False)

    @classmethod
    def of(cls, general: Iterable[str] = (), domain_generic: Iterable[str] = ()) -> "StopwordSet":
        return cls(frozenset(w.lower() for w in general), frozenset(w.lower() for w in domain_generic))

    @property
    def all(self) -> frozenset[str]:
        return self._all

    def __post_init__(self):
        object.__setattr__(self, "_all", self.general | self.domain_generic)

    def __contains__(self, word: str) -> bool:
        return word in self.general or word in self.domain_generic


@dataclass(frozen=True)
class NormalizedDoc:
    record_id: str
    tokens: tuple[str, ...]
    term_counts: dict[str, int]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def fold_text(text: str) -> str:
    """Compatibility-decompose, casefold and drop combining marks."""
    if text.isascii():
        return text.lower()
    text = unicodedata.normalize("NFKD", text).casefold()
    text = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in text if not unicodedata.combining(ch))


_ASCII_WORD = re.compile(r"[A-Za-z0-9_]+")


def split_words(text: str, reserved: frozenset[str] = frozenset()) -> list[str]:
    """Map punctuation (including hyphens) to spaces and split.

    "_" survives only inside words listed in ``reserved`` (joined phrase tokens);
    any other underscore is treated as punctuation.
    """
    if text.isascii():
        raw = _ASCII_WORD.findall(text)
    else:
        raw = "".join(ch if (ch.isalnum() or ch == JOINER) else " " for ch in text).split()
    words = []
    for word in raw:
        if JOINER in word and word not in reserved:
            words.extend(word.replace(JOINER, " ").split())
        else:
            words.append(word)
    return words


def protect_phrases(words: Sequence[str], table: PhraseTable) -> list[str]:
    out: list[str] = []
    starts = table._index
    i = 0
    while i < len(words):
        n = table.longest_at(words, i) if words[i] in starts else 0
        if n:
            out.append(JOINER.join(words[i:i + n]))
            i += n
        else:
            out.append(words[i])
            i += 1
    return out


def is_number(token: str) -> bool:
    return token.isnumeric()


def normalize_text(text: str, table: PhraseTable, stops: StopwordSet) -> list[str]:
    words = split_words(fold_text(text), table.joined_tokens())
    tokens = protect_phrases(words, table)
    drop = stops.all
    tokens = [t for t in tokens if t not in drop and not t.isnumeric()]
    # Stopword removal can bring phrase words together; protect once more so the
    # output is a fixed point of normalization.
    return protect_phrases(tokens, table)


def normalize_document(record, table: PhraseTable, stops: StopwordSet) -> NormalizedDoc:
    tokens = normalize_text(f"{record.title} {record.abstract}", table, stops)
    return NormalizedDoc(record.id, tuple(tokens), dict(Counter(tokens)))
