"""Byte-pair-encoding subword segmentation over Unicode code points.

Each word becomes its characters followed by a standalone end-of-word
symbol. Learning repeatedly merges the most frequent adjacent pair (ties:
lexicographically smallest pair); applying replays the merges in learned
order.
"""

from __future__ import annotations

import heapq
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

EOW = "</w>"
DEFAULT_MERGES = 32000
HEADER = "#bpe v1"


class BpeFormatError(ValueError):
    pass


@dataclass
class BpeModel:
    merges: list[tuple[str, str]]
    eow_marker: str = EOW
    vocab: frozenset = field(default=None, compare=False)

    def __post_init__(self):
        self.merges = [tuple(m) for m in self.merges]
        if len(set(self.merges)) != len(self.merges):
            raise ValueError("duplicate merges")
        if not self.eow_marker or any(c.isspace() for c in self.eow_marker):
            raise ValueError("eow marker must be a non-empty token without whitespace")
        vocab = set(self.vocab or ()) | {self.eow_marker}
        for left, right in self.merges:
            vocab.update((left, right, left + right))
        self.vocab = frozenset(vocab)
        self._ranks = {pair: rank for rank, pair in enumerate(self.merges)}
        self._cache: dict[str, tuple[str, ...]] = {}

    def segment(self, word: str) -> tuple[str, ...]:
        """Segment one whitespace-free word (end-of-word symbol included)."""
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        symbols = list(word) + [self.eow_marker]
        ranks = self._ranks
        done = -1
        while len(symbols) > 1:
            # the next merge to fire is the earliest one after the last fired
            # merge whose pair occurs in the word
            rank = min(
                (r for r in (ranks.get(p) for p in zip(symbols, symbols[1:]))
                 if r is not None and r > done),
                default=None,
            )
            if rank is None:
                break
            symbols = _merge_word(symbols, self.merges[rank])
            done = rank
        result = tuple(symbols)
        if len(self._cache) < 1_000_000:
            self._cache[word] = result
        return result

    def save(self, path) -> None:
        lines = [f"{HEADER} eow={self.eow_marker}"]
        lines += [f"{left} {right}" for left, right in self.merges]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "BpeModel":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        header = lines[0].split()
        if header[:2] != HEADER.split() or len(header) != 3 or not header[2].startswith("eow="):
            raise BpeFormatError(f"line 1: expected '{HEADER} eow=<marker>'")
        eow = header[2][len("eow="):]
        merges = []
        for line_no, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 2 or not all(parts):
                raise BpeFormatError(f"line {line_no}: expected 'left right'")
            merges.append((parts[0], parts[1]))
        return cls(merges, eow)


def _merge_word(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    left, right = pair
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i < n - 1 and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def _pair_counts(symbols: list[str]) -> Counter:
    return Counter(zip(symbols, symbols[1:]))


def count_words(lines: Iterable[str]) -> Counter:
    counts: Counter = Counter()
    for line in lines:
        counts.update(line.split())
    return counts


def bpe_learn(
    word_counts: Mapping[str, int], num_merges: int = DEFAULT_MERGES, eow_marker: str = EOW
) -> BpeModel:
    if num_merges < 0:
        raise ValueError("num_merges must be non-negative")
    # sort so symbol bookkeeping never depends on mapping iteration order
    words = []
    freqs = []
    for word, count in sorted(word_counts.items()):
        if not word or any(c.isspace() for c in word):
            raise ValueError(f"not a word: {word!r}")
        if eow_marker in word:
            raise ValueError(f"word {word!r} contains the end-of-word marker")
        if count <= 0:
            raise ValueError(f"non-positive count for {word!r}")
        words.append(list(word) + [eow_marker])
        freqs.append(count)

    vocab = {s for w in words for s in w}
    stats: Counter = Counter()
    where: dict[tuple[str, str], set[int]] = defaultdict(set)
    for i, symbols in enumerate(words):
        for pair, n in _pair_counts(symbols).items():
            stats[pair] += n * freqs[i]
            where[pair].add(i)

    heap = [(-n, pair) for pair, n in stats.items()]
    heapq.heapify(heap)
    merges = []
    while len(merges) < num_merges:
        best = None
        while heap:
            neg, pair = heapq.heappop(heap)
            if stats.get(pair, 0) == -neg:
                best = pair
                break
        if best is None or stats[best] < 2:
            break
        merges.append(best)
        vocab.add(best[0] + best[1])
        touched = Counter()
        for i in sorted(where.pop(best, ())):
            old = words[i]
            if best not in zip(old, old[1:]):
                continue
            new = _merge_word(old, best)
            for pair, n in _pair_counts(old).items():
                stats[pair] -= n * freqs[i]
                touched[pair] += 1
                where[pair].discard(i)
            for pair, n in _pair_counts(new).items():
                stats[pair] += n * freqs[i]
                touched[pair] += 1
                where[pair].add(i)
            words[i] = new
        for pair in touched:
            if stats[pair] <= 0:
                del stats[pair]
                where.pop(pair, None)
            else:
                heapq.heappush(heap, (-stats[pair], pair))
    return BpeModel(merges, eow_marker, frozenset(vocab))


def bpe_apply(model: BpeModel, text: str) -> list[str]:
    if model.eow_marker in text:
        raise ValueError("text contains the end-of-word marker")
    tokens: list[str] = []
    for word in text.split():
        tokens.extend(model.segment(word))
    return tokens


def bpe_decode(tokens: Iterable[str], eow_marker: str = EOW) -> str:
    out = []
    for token in tokens:
        if token.endswith(eow_marker):
            out.append(token[: -len(eow_marker)])
            out.append(" ")
        else:
            out.append(token)
    return "".join(out).rstrip(" ")
