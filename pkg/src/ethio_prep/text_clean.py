"""Sentence cleaning, abbreviation expansion and noisy-pair filtering."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import regex

from .ethiopic_norm import is_ethiopic

URL_PREFIXES = ("http://", "https://", "www.")

# an emoji-presentation character (or a text-default pictograph forced to
# emoji style by VS16) plus any modifiers, selectors, ZWJs and tag characters
# hanging off it
_EMOJI = regex.compile(
    r"(?:\p{Emoji_Presentation}|\p{Extended_Pictographic}\uFE0F)"
    r"[\uFE0F\u200D\p{Emoji_Modifier}\U000E0020-\U000E007F]*"
)
_LATIN_RUN = regex.compile(r"\p{Latin}+")

DROP_REASONS = ("too_short", "too_long", "ratio", "script")


@dataclass(frozen=True)
class CleanOptions:
    strip_urls: bool = True
    strip_emoji: bool = True
    lowercase_latin: bool = True
    collapse_whitespace: bool = True


def strip_urls(text: str) -> str:
    # keep the surrounding whitespace exactly; only URL tokens disappear
    parts = regex.split(r"(\s+)", text)
    return "".join(
        "" if part and not part.isspace() and part.lower().startswith(URL_PREFIXES) else part
        for part in parts
    )


def strip_emoji(text: str) -> str:
    return _EMOJI.sub("", text)


@lru_cache(maxsize=4096)
def _lower_char(ch: str) -> str:
    low = ch.lower()
    # multi-codepoint lowercasings (e.g. U+0130) would introduce new characters
    return low if len(low) == 1 else ch


def lowercase_latin(text: str) -> str:
    return _LATIN_RUN.sub(lambda m: "".join(map(_lower_char, m.group())), text)


def collapse_whitespace(text: str) -> str:
    return " ".join(text.split())


def clean_sentence(text: str, options: CleanOptions = CleanOptions()) -> str:
    # emoji go first so that removing one can never expose a new URL token
    if options.strip_emoji:
        text = strip_emoji(text)
    if options.strip_urls:
        text = strip_urls(text)
    if options.lowercase_latin:
        text = lowercase_latin(text)
    if options.collapse_whitespace:
        text = collapse_whitespace(text)
    return text


class LexiconError(ValueError):
    pass


def _is_word_char(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "LNM"


@dataclass
class AbbreviationLexicon:
    """Ordered ``surface -> expansion`` entries for one language side."""

    entries: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.entries = [(s, e) for s, e in self.entries]
        surfaces = [s for s, _ in self.entries]
        if len(set(surfaces)) != len(surfaces):
            dupes = sorted({s for s in surfaces if surfaces.count(s) > 1})
            raise LexiconError(f"duplicate surface forms: {dupes}")
        for surface, _ in self.entries:
            if not surface or surface != surface.strip() or any(c.isspace() for c in surface):
                raise LexiconError(f"surface form must be a single token: {surface!r}")
        self._by_first: dict[str, list[tuple[str, str]]] = {}
        for surface, expansion in sorted(self.entries, key=lambda e: -len(e[0])):
            self._by_first.setdefault(surface[0], []).append((surface, expansion))
        for surface, expansion in self.entries:
            hit = self._match(expansion, 0)
            if hit is not None:
                raise LexiconError(
                    f"expansion of {surface!r} starts with surface form {hit[0]!r}"
                )

    def __len__(self):
        return len(self.entries)

    def _match(self, text: str, i: int):
        if i > 0 and _is_word_char(text[i - 1]):
            return None
        for surface, expansion in self._by_first.get(text[i:i + 1], ()):
            end = i + len(surface)
            if text.startswith(surface, i) and (end == len(text) or not _is_word_char(text[end])):
                return surface, expansion
        return None

    def expand(self, text: str) -> str:
        if not self.entries:
            return text
        out = []
        i = 0
        while i < len(text):
            hit = self._match(text, i)
            if hit is None:
                out.append(text[i])
                i += 1
            else:
                out.append(hit[1])
                i += len(hit[0])
        return "".join(out)

    @classmethod
    def from_tsv(cls, text: str) -> "AbbreviationLexicon":
        entries = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise LexiconError(f"line {line_no}: expected surface<TAB>expansion")
            entries.append((fields[0], fields[1]))
        return cls(entries)

    @classmethod
    def load(cls, path) -> "AbbreviationLexicon":
        return cls.from_tsv(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def builtin(cls, side: str) -> "AbbreviationLexicon":
        """Bundled lexicon for ``"am"`` or ``"en"``."""
        data = resources.files("ethio_prep") / "data" / f"abbreviations.{side}.tsv"
        return cls.from_tsv(data.read_text(encoding="utf-8"))


def expand_abbreviations(text: str, lexicon: AbbreviationLexicon) -> str:
    return lexicon.expand(text)


@dataclass(frozen=True)
class FilterRules:
    min_chars: int = 2
    max_chars: int = 2000
    max_length_ratio: float = 9.0
    min_source_script_fraction: float = 0.5

    def __post_init__(self):
        if self.min_chars < 1 or self.max_chars < self.min_chars:
            raise ValueError("need 1 <= min_chars <= max_chars")
        if not self.max_length_ratio > 1:
            raise ValueError("max_length_ratio must exceed 1")
        if not 0 <= self.min_source_script_fraction <= 1:
            raise ValueError("min_source_script_fraction must be in [0, 1]")


def ethiopic_fraction(text: str) -> float:
    letters = [ch for ch in text if unicodedata.category(ch).startswith("L")]
    if not letters:
        return 0.0
    return sum(is_ethiopic(ord(ch)) for ch in letters) / len(letters)


def filter_pair(pair, rules: FilterRules = FilterRules()) -> str | None:
    """Return the first violated rule as a reason code, or None to keep."""
    src, tgt = pair.source_text, pair.target_text
    if len(src) < rules.min_chars or len(tgt) < rules.min_chars:
        return "too_short"
    if len(src) > rules.max_chars or len(tgt) > rules.max_chars:
        return "too_long"
    n_src, n_tgt = len(src.split()), len(tgt.split())
    if min(n_src, n_tgt) == 0 or max(n_src, n_tgt) / min(n_src, n_tgt) > rules.max_length_ratio:
        return "ratio"
    if ethiopic_fraction(src) < rules.min_source_script_fraction:
        return "script"
    return None
