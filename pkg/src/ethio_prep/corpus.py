"""Parallel corpus bookkeeping: manifests, ingestion, dedup, splits, stats."""

from __future__ import annotations

import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .ethiopic_norm import is_ethiopic

log = logging.getLogger(__name__)

FORMATS = ("two-file-aligned", "tsv")
SOURCE_SUFFIX = ".am"
TARGET_SUFFIX = ".en"


class CorpusError(Exception):
    pass


class ManifestError(CorpusError):
    pass


class AlignmentError(CorpusError):
    def __init__(self, origin_id, source_lines, target_lines):
        super().__init__(
            f"{origin_id}: aligned files differ in length ({source_lines} vs {target_lines} lines)"
        )
        self.origin_id = origin_id
        self.counts = (source_lines, target_lines)


class CountMismatchError(CorpusError):
    pass


class SplitError(CorpusError):
    pass


@dataclass(frozen=True)
class SentencePair:
    source_text: str
    target_text: str
    origin_id: str = ""
    line_no: int = 0

    @property
    def key(self) -> tuple[str, str]:
        return self.source_text, self.target_text

    def with_text(self, source_text: str, target_text: str) -> "SentencePair":
        return SentencePair(source_text, target_text, self.origin_id, self.line_no)


@dataclass(frozen=True)
class ManifestEntry:
    origin_id: str
    format: str
    source_path: Path
    target_path: Path | None = None
    declared_count: int | None = None


@dataclass
class CorpusManifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for entry in self.entries:
            if entry.origin_id in seen:
                raise ManifestError(f"duplicate origin_id {entry.origin_id!r}")
            seen.add(entry.origin_id)
            if entry.format not in FORMATS:
                raise ManifestError(f"{entry.origin_id}: unknown format {entry.format!r}")
            if entry.format == "two-file-aligned" and entry.target_path is None:
                raise ManifestError(f"{entry.origin_id}: two-file-aligned needs a target path")

    @property
    def declared_total(self) -> int:
        """Sum of declared counts; entries without one count as zero."""
        return sum(e.declared_count or 0 for e in self.entries)

    @classmethod
    def parse(cls, text: str, base_dir=".") -> "CorpusManifest":
        base_dir = Path(base_dir)
        entries = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            fields += [""] * (5 - len(fields))
            if len(fields) > 5 or not all(fields[:3]):
                raise ManifestError(
                    f"line {line_no}: expected origin_id<TAB>format<TAB>source[<TAB>target][<TAB>count]"
                )
            origin_id, fmt, source, target, count = (f.strip() for f in fields)
            try:
                declared = int(count.replace(",", "")) if count else None
            except ValueError:
                raise ManifestError(f"line {line_no}: bad declared count {count!r}") from None
            entries.append(ManifestEntry(
                origin_id, fmt, base_dir / source,
                base_dir / target if target else None, declared,
            ))
        return cls(entries)

    @classmethod
    def load(cls, path) -> "CorpusManifest":
        path = Path(path)
        return cls.parse(path.read_text(encoding="utf-8"), base_dir=path.parent)

    def to_tsv(self, base_dir=None) -> str:
        lines = []
        for e in self.entries:
            paths = [e.source_path, e.target_path]
            if base_dir is not None:
                paths = [Path(p).relative_to(base_dir) if p else None for p in paths]
            lines.append("\t".join([
                e.origin_id, e.format, str(paths[0]),
                str(paths[1]) if paths[1] else "",
                "" if e.declared_count is None else str(e.declared_count),
            ]))
        return "\n".join(lines) + "\n"


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [line.rstrip("\r\n") for line in fh]


def _ingest_entry(entry: ManifestEntry) -> Iterator[SentencePair]:
    if entry.format == "two-file-aligned":
        sources = _read_lines(entry.source_path)
        targets = _read_lines(entry.target_path)
        if len(sources) != len(targets):
            raise AlignmentError(entry.origin_id, len(sources), len(targets))
        for i, (src, tgt) in enumerate(zip(sources, targets), start=1):
            yield SentencePair(src, tgt, entry.origin_id, i)
    else:
        with open(entry.source_path, encoding="utf-8", newline="") as fh:
            for i, line in enumerate(fh, start=1):
                fields = line.rstrip("\r\n").split("\t")
                if len(fields) != 2:
                    raise CorpusError(f"{entry.origin_id} line {i}: expected source<TAB>target")
                yield SentencePair(fields[0], fields[1], entry.origin_id, i)


def ingest(manifest: CorpusManifest, strict_counts: bool = False) -> Iterator[SentencePair]:
    """Yield pairs in manifest order, then line order."""
    for entry in manifest.entries:
        n = 0
        for pair in _ingest_entry(entry):
            n += 1
            yield pair
        if entry.declared_count is not None and n != entry.declared_count:
            message = f"{entry.origin_id}: declared {entry.declared_count} pairs, read {n}"
            if strict_counts:
                raise CountMismatchError(message)
            log.warning(message)


def _check_line(text: str, what: str):
    if "\n" in text or "\r" in text:
        raise CorpusError(f"{what} contains a line break: {text[:40]!r}")


def write_aligned(pairs: Iterable[SentencePair], prefix) -> int:
    """Write ``prefix.am`` / ``prefix.en``; returns the number of pairs."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(f"{prefix}{SOURCE_SUFFIX}", "w", encoding="utf-8", newline="\n") as src, \
            open(f"{prefix}{TARGET_SUFFIX}", "w", encoding="utf-8", newline="\n") as tgt:
        for pair in pairs:
            _check_line(pair.source_text, "source")
            _check_line(pair.target_text, "target")
            src.write(pair.source_text + "\n")
            tgt.write(pair.target_text + "\n")
            n += 1
    return n


def write_tsv(pairs: Iterable[SentencePair], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in pairs:
            for text in pair.key:
                _check_line(text, "text")
                if "\t" in text:
                    raise CorpusError(f"tab inside text: {text[:40]!r}")
            fh.write(f"{pair.source_text}\t{pair.target_text}\n")
            n += 1
    return n


def read_aligned(prefix, origin_id=None) -> Iterator[SentencePair]:
    prefix = Path(prefix)
    entry = ManifestEntry(
        origin_id or prefix.name, "two-file-aligned",
        Path(f"{prefix}{SOURCE_SUFFIX}"), Path(f"{prefix}{TARGET_SUFFIX}"),
    )
    return _ingest_entry(entry)


def _digest(pair: SentencePair) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    src = pair.source_text.encode("utf-8")
    h.update(len(src).to_bytes(8, "little"))
    h.update(src)
    h.update(pair.target_text.encode("utf-8"))
    return h.digest()


class Deduplicator:
    """First-occurrence-wins filter over exact (source, target) keys.

    By default only a 128-bit digest of each key is kept; ``exact=True``
    stores the keys themselves.
    """

    def __init__(self, exact: bool = False):
        self.exact = exact
        self.seen: set = set()
        self.kept = 0
        self.dropped = 0

    def __call__(self, pairs: Iterable[SentencePair]) -> Iterator[SentencePair]:
        for pair in pairs:
            key = pair.key if self.exact else _digest(pair)
            if key in self.seen:
                self.dropped += 1
                continue
            self.seen.add(key)
            self.kept += 1
            yield pair


def dedup(pairs: Iterable[SentencePair], exact: bool = False) -> Iterator[SentencePair]:
    return Deduplicator(exact)(pairs)


MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


def shuffled_indices(n: int, seed: int) -> list[int]:
    """Fisher-Yates over ``range(n)``; ``j = next() % (i + 1)`` for i = n-1..1."""
    rng = SplitMix64(seed)
    idx = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.next() % (i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return idx


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: Fraction = Fraction(8, 10)
    valid_fraction: Fraction = Fraction(1, 10)
    test_fraction: Fraction = Fraction(1, 10)
    seed: int = 0

    def __post_init__(self):
        for name in ("train_fraction", "valid_fraction", "test_fraction"):
            value = getattr(self, name)
            # go through str so 0.1 means 1/10, not the nearest double
            value = value if isinstance(value, Fraction) else Fraction(str(value))
            if value <= 0:
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, value)
        if self.train_fraction + self.valid_fraction + self.test_fraction != 1:
            raise ValueError("split fractions must sum to exactly 1")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def sizes(self, n: int) -> tuple[int, int, int]:
        test = int(n * self.test_fraction)
        valid = int(n * self.valid_fraction)
        return n - valid - test, valid, test


def split(pairs: Sequence[SentencePair], spec: SplitSpec = SplitSpec()):
    """Shuffle deterministically and cut into (train, valid, test)."""
    pairs = list(pairs)
    n = len(pairs)
    if n < 3:
        raise SplitError(f"need at least 3 pairs to split, got {n}")
    n_train, n_valid, _ = spec.sizes(n)
    order = [pairs[i] for i in shuffled_indices(n, spec.seed)]
    return order[:n_train], order[n_train:n_train + n_valid], order[n_train + n_valid:]


@dataclass
class CorpusStats:
    per_origin: Counter = field(default_factory=Counter)
    total: int = 0
    unique: int = 0
    source_tokens: int = 0
    target_tokens: int = 0
    char_freq: Counter = field(default_factory=Counter)

    def to_tsv(self) -> str:
        lines = ["[totals]", f"pairs\t{self.total}", f"unique_pairs\t{self.unique}",
                 f"source_tokens\t{self.source_tokens}", f"target_tokens\t{self.target_tokens}",
                 "", "[origins]"]
        lines += [f"{origin}\t{n}" for origin, n in self.per_origin.items()]
        lines += ["", "[ethiopic_chars]"]
        lines += [f"{ord(ch):04X}\t{ch}\t{n}" for ch, n in sorted(self.char_freq.items())]
        return "\n".join(lines) + "\n"


def stats(pairs: Iterable[SentencePair]) -> CorpusStats:
    result = CorpusStats()
    keys = set()
    chars: Counter = Counter()
    pending = []  # Counter.update per pair is slow; count in batches
    for pair in pairs:
        result.total += 1
        result.per_origin[pair.origin_id] += 1
        keys.add(pair.key)
        result.source_tokens += len(pair.source_text.split())
        result.target_tokens += len(pair.target_text.split())
        pending += pair.key
        if len(pending) >= 8192:
            chars.update("".join(pending))
            pending.clear()
    chars.update("".join(pending))
    result.unique = len(keys)
    result.char_freq = Counter({ch: n for ch, n in chars.items() if is_ethiopic(ord(ch))})
    return result
