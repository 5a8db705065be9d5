"""Corpus-level BLEU and the regular-vs-normalized comparison record."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

SMOOTHING = ("none", "add-one")
TOKENIZER = "whitespace"


class BleuError(ValueError):
    pass


@dataclass
class BleuReport:
    bleu: float
    precisions: tuple[float, ...] = ()
    brevity_penalty: float = 1.0
    hyp_len: int = 0
    ref_len: int = 0
    smoothing: str = "none"
    max_n: int = 4
    weights: tuple[float, ...] = (0.25, 0.25, 0.25, 0.25)
    matches: tuple[int, ...] = ()
    totals: tuple[int, ...] = ()
    tokenizer: str = TOKENIZER
    flags: list[str] = field(default_factory=list)

    @property
    def score(self) -> float:
        return 100 * self.bleu

    @property
    def ratio(self) -> float:
        return self.hyp_len / self.ref_len if self.ref_len else 0.0

    def format(self) -> str:
        precisions = "/".join(f"{100 * p:.2f}" for p in self.precisions)
        labels = "/".join(f"p{n}" for n in range(1, self.max_n + 1))
        text = (
            f"BLEU = {self.score:.2f}, {labels} = {precisions}, "
            f"BP = {self.brevity_penalty:.4f}, ratio = {self.ratio:.4f} "
            f"(c = {self.hyp_len}, r = {self.ref_len}, tokenizer = {self.tokenizer}, "
            f"smoothing = {self.smoothing})"
        )
        if self.flags:
            text += " [" + ", ".join(self.flags) + "]"
        return text

    def to_tsv(self) -> str:
        rows = [("bleu", f"{self.score:.2f}")]
        rows += [(f"p{n}", f"{p:.6f}") for n, p in enumerate(self.precisions, start=1)]
        rows += [
            ("bp", f"{self.brevity_penalty:.6f}"),
            ("hyp_len", str(self.hyp_len)),
            ("ref_len", str(self.ref_len)),
            ("tokenizer", self.tokenizer),
            ("smoothing", self.smoothing),
            ("flags", ",".join(self.flags)),
        ]
        return "".join(f"{k}\t{v}\n" for k, v in rows)


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def closest_ref_length(hyp_len: int, ref_lens: Sequence[int]) -> int:
    return min(ref_lens, key=lambda r: (abs(r - hyp_len), r))


def sentence_stats(hyp: Sequence[str], refs: Sequence[Sequence[str]], max_n: int = 4):
    """Clipped matches and hypothesis n-gram totals per order, plus lengths."""
    matches = []
    totals = []
    for n in range(1, max_n + 1):
        hyp_counts = ngrams(hyp, n)
        max_ref: Counter = Counter()
        for ref in refs:
            max_ref |= ngrams(ref, n)
        matches.append(sum(min(c, max_ref[g]) for g, c in hyp_counts.items()))
        totals.append(max(len(hyp) - n + 1, 0))
    return matches, totals, len(hyp), closest_ref_length(len(hyp), [len(r) for r in refs])


def _tokens(sentence) -> list[str]:
    return sentence.split() if isinstance(sentence, str) else list(sentence)


def corpus_bleu(
    pairs,
    max_n: int = 4,
    weights: Sequence[float] | None = None,
    smoothing: str = "none",
) -> BleuReport:
    """Score ``pairs`` of ``(hypothesis, [reference, ...])``.

    Sentences may be strings (split on whitespace) or token lists.
    """
    weights = tuple(weights) if weights is not None else (1 / max_n,) * max_n
    if len(weights) != max_n or any(w <= 0 for w in weights) or abs(sum(weights) - 1) > 1e-9:
        raise BleuError("weights must be max_n positive numbers summing to 1")
    if smoothing not in SMOOTHING:
        raise BleuError(f"unknown smoothing {smoothing!r}")
    pairs = list(pairs)
    if not pairs:
        raise BleuError("empty hypothesis set")

    matches = [0] * max_n
    totals = [0] * max_n
    c = r = 0
    for hyp, refs in pairs:
        if isinstance(refs, str):
            refs = [refs]
        if not refs:
            raise BleuError("every hypothesis needs at least one reference")
        m, t, h_len, r_len = sentence_stats(_tokens(hyp), [_tokens(x) for x in refs], max_n)
        matches = [a + b for a, b in zip(matches, m)]
        totals = [a + b for a, b in zip(totals, t)]
        c += h_len
        r += r_len

    flags = []
    precisions = []
    if c == 0:
        flags.append("empty_hypotheses")
    for n, (m, t) in enumerate(zip(matches, totals), start=1):
        if t == 0:
            # no hypothesis n-grams of this order at all: nothing can be
            # unmatched, length is left to the brevity penalty
            precisions.append(1.0)
            if c:
                flags.append(f"no_{n}grams")
        elif smoothing == "add-one" and n >= 2 and m == 0:
            precisions.append(1 / (t + 1))
        else:
            precisions.append(m / t)

    if c == 0:
        bp = 0.0
    else:
        bp = 1.0 if c > r else math.exp(1 - r / c)

    if min(precisions) == 0 or bp == 0:
        bleu = 0.0
    else:
        bleu = bp * math.exp(math.fsum(w * math.log(p) for w, p in zip(weights, precisions)))

    return BleuReport(
        bleu=bleu, precisions=tuple(precisions), brevity_penalty=bp,
        hyp_len=c, ref_len=r, smoothing=smoothing, max_n=max_n, weights=weights,
        matches=tuple(matches), totals=tuple(totals), flags=flags,
    )


@dataclass
class ComparisonRecord:
    labels: tuple[str, str]
    reports: tuple[BleuReport, BleuReport]

    @property
    def delta(self) -> float:
        """Second minus first, in BLEU points."""
        return self.reports[1].score - self.reports[0].score

    def rows(self):
        for label, report in zip(self.labels, self.reports):
            yield (label, f"{report.score:.2f}",
                   *(f"{100 * p:.2f}" for p in report.precisions),
                   f"{report.brevity_penalty:.4f}")

    def to_tsv(self) -> str:
        max_n = self.reports[0].max_n
        header = ("system", "BLEU", *(f"p{n}" for n in range(1, max_n + 1)), "BP")
        lines = ["\t".join(header)] + ["\t".join(row) for row in self.rows()]
        lines.append(f"delta\t{self.delta:+.2f}")
        return "\n".join(lines) + "\n"

    def format(self) -> str:
        width = max(len(label) for label in self.labels)
        lines = [f"{label:<{width}}  BLEU = {report.score:6.2f}"
                 for label, report in zip(self.labels, self.reports)]
        lines.append(f"{'delta':<{width}}  {self.delta:+.2f} BLEU "
                     f"({self.labels[1]} - {self.labels[0]})")
        return "\n".join(lines)


def compare_runs(
    report_a: BleuReport, report_b: BleuReport, labels=("regular", "normalized")
) -> ComparisonRecord:
    if report_a.max_n != report_b.max_n or tuple(report_a.weights) != tuple(report_b.weights):
        raise BleuError("reports were computed with different max_n or weights")
    return ComparisonRecord(tuple(labels), (report_a, report_b))
