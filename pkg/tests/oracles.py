"""Deliberately naive reference implementations used to cross-check the package."""

import math
from fractions import Fraction


def count_ngram(tokens, gram):
    n = len(gram)
    return sum(1 for i in range(len(tokens) - n + 1) if tuple(tokens[i:i + n]) == gram)


def bleu_oracle(pairs, max_n=4):
    """Corpus BLEU by enumerating every hypothesis n-gram position."""
    matches = [0] * max_n
    totals = [0] * max_n
    c = r = 0
    for hyp, refs in pairs:
        hyp = hyp.split()
        refs = [x.split() for x in refs]
        for n in range(1, max_n + 1):
            distinct = {tuple(hyp[i:i + n]) for i in range(len(hyp) - n + 1)}
            for gram in distinct:
                in_hyp = count_ngram(hyp, gram)
                in_ref = max(count_ngram(ref, gram) for ref in refs)
                matches[n - 1] += min(in_hyp, in_ref)
            totals[n - 1] += max(0, len(hyp) - n + 1)
        c += len(hyp)
        best = None
        for ref in refs:
            key = (abs(len(ref) - len(hyp)), len(ref))
            if best is None or key < best[0]:
                best = (key, len(ref))
        r += best[1]
    precisions = [Fraction(m, t) if t else Fraction(1) for m, t in zip(matches, totals)]
    bp = 1.0 if c > r else math.exp(1 - r / c)
    score = bp
    for p in precisions:
        score *= float(p) ** (1 / max_n)
    return score, precisions, bp


def bpe_oracle(word_counts, num_merges, eow="</w>"):
    """Recount every pair from scratch on every iteration."""
    words = {w: list(w) + [eow] for w in word_counts}
    merges = []
    for _ in range(num_merges):
        counts = {}
        for w, symbols in words.items():
            for i in range(len(symbols) - 1):
                pair = (symbols[i], symbols[i + 1])
                counts[pair] = counts.get(pair, 0) + word_counts[w]
        if not counts:
            break
        best_count = max(counts.values())
        if best_count < 2:
            break
        best = min(p for p, n in counts.items() if n == best_count)
        merges.append(best)
        for w, symbols in words.items():
            out, i = [], 0
            while i < len(symbols):
                if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == best:
                    out.append(symbols[i] + symbols[i + 1])
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            words[w] = out
    return merges


def dedup_oracle(keys):
    seen = []
    for key in keys:
        if key not in seen:
            seen.append(key)
    return seen
