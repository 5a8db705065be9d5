"""One test per acceptance criterion; the summary prints a PASS/FAIL line for each."""

import math
import random
import time
from collections import Counter

import pytest

from ethio_prep.bleu import corpus_bleu
from ethio_prep.bpe import EOW, bpe_apply, bpe_decode, bpe_learn, count_words
from ethio_prep.cli import main
from ethio_prep.corpus import (
    CorpusManifest, SentencePair, SplitSpec, dedup, ingest, split, stats, write_aligned,
)
from ethio_prep.ethiopic_norm import default_table, learn_table
from ethio_prep.pipeline import PipelineConfig, run

from conftest import DATA, ROOT, SYNTHETIC
from oracles import bleu_oracle, bpe_oracle, dedup_oracle
from test_pipeline import homophone_only_diff

criterion = pytest.mark.criterion

# family -> (canonical series base, other series bases, order-3 folds to order 0)
FAMILIES = {
    "h": (0x1200, (0x1210, 0x1280), True),
    "s": (0x1230, (0x1220,), False),
    "a": (0x12A0, (0x12D0,), True),
    "ts": (0x1338, (0x1340,), False),
}


def expected_default_mapping():
    mapping = {}
    for canon, others, fold in FAMILIES.values():
        for base in others:
            for order in range(7):
                mapping[base + order] = canon + (0 if fold and order == 3 else order)
        if fold:
            mapping[canon + 3] = canon
    return mapping


@criterion(1, "homophone mapping fidelity (exhaustive default table)")
def test_criterion_1_default_table():
    start = time.perf_counter()
    table = default_table()
    expected = expected_default_mapping()
    assert len(expected) == 7 * (3 + 2 + 2 + 2) - 7 * 4 + 2 == 37
    assert table.mapping == expected
    for src, dst in expected.items():
        assert table.normalize(chr(src)) == chr(dst)
    for ch in "ሃሓኃ":
        assert table.normalize(ch) == "ሀ"
    for ch in "ኣዓ":
        assert table.normalize(ch) == "አ"
    # canonical characters are fixed points
    for canon, _, fold in FAMILIES.values():
        for order in range(7):
            if not (fold and order == 3):
                assert table.normalize(chr(canon + order)) == chr(canon + order)
    assert time.perf_counter() - start < 1.0


@criterion(2, "normalization idempotence and length preservation fuzz")
def test_criterion_2_idempotence_fuzz():
    start = time.perf_counter()
    rng = random.Random(20220)
    ascii_chars = [chr(c) for c in range(32, 127)]
    ethiopic = [chr(c) for c in range(0x1200, 0x1380)]
    table = default_table()
    violations = 0
    for _ in range(10_000):
        s = "".join(rng.choice(ethiopic if rng.random() < 0.7 else ascii_chars)
                    for _ in range(rng.randint(0, 40)))
        once = table.normalize(s)
        if table.normalize(once) != once or len(once) != len(s):
            violations += 1
    assert violations == 0
    assert time.perf_counter() - start < 10.0


def brute_force_targets(text):
    """Per cell, the member with the highest ``str.count``; ties to the default target."""
    default = expected_default_mapping()
    targets = {}
    for canon, others, fold in FAMILIES.values():
        for order in range(7):
            if fold and order == 3:
                continue
            members = [canon + order] + [b + order for b in others]
            if fold and order == 0:
                members += [canon + 3] + [b + 3 for b in others]
            counts = {cp: text.count(chr(cp)) for cp in members}
            best = max(counts.values())
            fixed = default.get(canon + order, canon + order)
            tied = [cp for cp, n in counts.items() if n == best]
            target = fixed if best == 0 or fixed in tied else min(tied)
            for cp in members:
                targets[cp] = target
    return {cp: t for cp, t in targets.items() if cp != t}


@criterion(3, "frequency-learned table agrees with brute-force counting")
def test_criterion_3_learned_table():
    rng = random.Random(3)
    fixed = default_table().mapping
    canonical = sorted(set(fixed.values()))
    # canonical-dominant: canonical characters common, variants rare
    lines = []
    for _ in range(300):
        chars = [chr(rng.choice(canonical)) for _ in range(8)]
        chars += [chr(rng.choice(list(fixed)))]
        lines.append("".join(chars))
    # make sure every canonical target beats every variant
    lines += ["".join(chr(cp) for cp in canonical) * 20]
    table, _ = learn_table(lines)
    text = "\n".join(lines)
    assert table.mapping == brute_force_targets(text) == fixed

    # ሠ (U+1220) dominates the order-0 s cell, ሰ still present
    skewed = lines + ["ሠላም ሠላም ሠራ " * 40]
    table, report = learn_table(skewed)
    assert table.mapping == brute_force_targets("\n".join(skewed))
    assert table.normalize("ሰ") == "ሠ"
    assert table.normalize("ሠ") == "ሠ"
    chosen = {(c.family, c.order): c.chosen for c in report.cells}
    assert chosen[("s", 0)] == 0x1220
    # every other cell is unchanged
    assert {k: v for k, v in table.mapping.items() if k != 0x1230} == \
        {k: v for k, v in fixed.items() if k != 0x1220}


DECLARED_TOTAL = 1_140_130


@criterion(4, "manifest arithmetic totals 1,140,130 and dedup matches the oracle")
def test_criterion_4_manifest_total_and_dedup(tmp_path):
    declared = CorpusManifest.load(DATA / "sources_manifest.tsv")
    assert declared.declared_total == DECLARED_TOTAL
    assert len(declared.entries) == 11

    # materialize sources with exactly the declared line counts
    lines = []
    for entry in declared.entries:
        n = entry.declared_count
        body_am = "".join(f"ሰላም {i}\n" for i in range(n))
        body_en = "".join(f"peace {i}\n" for i in range(n))
        (tmp_path / f"{entry.origin_id}.am").write_text(body_am, encoding="utf-8")
        (tmp_path / f"{entry.origin_id}.en").write_text(body_en, encoding="utf-8")
        lines.append(f"{entry.origin_id}\ttwo-file-aligned\t{entry.origin_id}.am\t"
                     f"{entry.origin_id}.en\t{n}")
    manifest = CorpusManifest.parse("\n".join(lines) + "\n", tmp_path)
    result = stats(ingest(manifest, strict_counts=True))
    assert result.total == DECLARED_TOTAL
    assert result.per_origin == Counter({e.origin_id: e.declared_count for e in declared.entries})
    assert "[totals]\npairs\t1140130\n" in result.to_tsv()

    rng = random.Random(4)
    for case in range(1000):
        vocab = ["ሰላም", "ሠላም", "a", "b", "ab", ""][: rng.randint(2, 6)]
        keys = [(rng.choice(vocab), rng.choice(vocab)) for _ in range(rng.randint(0, 30))]
        pairs = [SentencePair(s, t, "o", i) for i, (s, t) in enumerate(keys)]
        out = list(dedup(pairs, exact=case % 2 == 0))
        assert [p.key for p in out] == dedup_oracle(keys)


@criterion(5, "split sizes, reproducibility and partition")
def test_criterion_5_split(tmp_path):
    pairs = [SentencePair(f"ሀ {i}", f"h {i}", "o", i) for i in range(1000)]
    spec = SplitSpec(seed=7)
    assert tuple(map(len, split(pairs, spec))) == (800, 100, 100)
    for name in ("a", "b"):
        for part_name, part in zip(("train", "valid", "test"), split(pairs, spec)):
            write_aligned(part, tmp_path / name / part_name)
    for f in ("train.am", "train.en", "valid.am", "valid.en", "test.am", "test.en"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    rng = random.Random(5)
    for _ in range(100):
        n, seed = rng.randint(3, 2000), rng.getrandbits(64)
        items = [SentencePair("s", "t", "o", i) for i in range(n)]
        parts = split(items, SplitSpec(seed=seed))
        ids = [p.line_no for part in parts for p in part]
        assert len(ids) == len(set(ids)) == n
        assert set(ids) == set(range(n))


def random_bleu_case(rng):
    vocab = "a b c d e f".split()
    pairs = []
    for _ in range(rng.randint(1, 6)):
        hyp = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 15)))
        refs = [" ".join(rng.choice(vocab) for _ in range(rng.randint(1, 15)))
                for _ in range(rng.randint(1, 3))]
        pairs.append((hyp, refs))
    return pairs


@criterion(6, "BLEU correctness")
def test_criterion_6_bleu():
    start = time.perf_counter()
    sentences = ["the cat sat on the mat", "a b c", "ሰላም ነው", "x"]
    assert corpus_bleu([(s, [s]) for s in sentences]).bleu == 1.0
    assert corpus_bleu([("x y z w", ["a b c d"])]).bleu == 0.0
    clipped = corpus_bleu([("the the the the the the the", ["the cat is on the mat"])])
    assert abs(clipped.precisions[0] - 2 / 7) <= 1e-12
    short = corpus_bleu([("the cat is on the", ["the cat is on the mat"])])
    assert abs(short.brevity_penalty - math.exp(1 - 6 / 5)) <= 1e-12

    rng = random.Random(6)
    for _ in range(40):
        pairs = random_bleu_case(rng)
        expected, precisions, bp = bleu_oracle(pairs)
        report = corpus_bleu(pairs)
        assert abs(report.bleu - expected) <= 1e-12
        assert abs(report.brevity_penalty - bp) <= 1e-12
        for got, want in zip(report.precisions, precisions):
            assert abs(got - float(want)) <= 1e-12
    assert time.perf_counter() - start < 5.0


@criterion(7, "BPE oracle equivalence, round-trip and monotone compression")
def test_criterion_7_bpe():
    rng = random.Random(7)
    alphabet = "abcሀለሐመሠ"
    for _ in range(50):
        counts = {}
        for _ in range(rng.randint(1, 12)):
            word = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6)))
            counts[word] = rng.randint(1, 5)
        k = rng.randint(0, 40)
        assert bpe_learn(counts, k).merges == bpe_oracle(counts, k)

    model = bpe_learn(count_words(["ሰላም ነው ab abc ለ ሀለ", "abab ሐመ ሰላማዊ ነን"]), 40)
    pool = list(alphabet) + ["ሰ", "ላ", "ም", " ", " ", "\t", "x", "ñ", "😀", "‍"]
    for _ in range(10_000):
        s = "".join(rng.choice(pool) for _ in range(rng.randint(0, 25)))
        assert bpe_decode(bpe_apply(model, s)) == " ".join(s.split())

    for case in range(20):
        corpus = [" ".join("".join(rng.choice(alphabet) for _ in range(rng.randint(1, 5)))
                           for _ in range(rng.randint(1, 6))) for _ in range(15)]
        counts = count_words(corpus)
        text = " ".join(corpus[:4])
        lengths = [len(bpe_apply(bpe_learn(counts, k), text)) for k in range(0, 60, 3)]
        assert all(a >= b for a, b in zip(lengths, lengths[1:])), case
        assert lengths[0] == sum(len(w) + 1 for w in text.split())
    assert EOW == "</w>"


@criterion(8, "end-to-end run in both normalization modes")
def test_criterion_8_end_to_end(tmp_path):
    start = time.perf_counter()
    records = {}
    for mode in ("off", "fixed", "learned"):
        cfg = PipelineConfig.load(SYNTHETIC / "pipeline.ini", output_dir=tmp_path / mode,
                                  normalization=mode)
        records[mode] = run(cfg)
    assert time.perf_counter() - start < 30.0

    for mode, record in records.items():
        assert record.status == "ok"
        assert record.stages[0].pairs_in == 1000
        assert record.splits == {"train": 800, "valid": 100, "test": 100}
        assert record.balanced(), mode
        for stage in record.stages:
            assert stage.pairs_in - stage.dropped == stage.pairs_out

    for mode in ("fixed", "learned"):
        changed = 0
        for name in ("train", "valid", "test"):
            off = (tmp_path / "off" / f"{name}.am").read_text(encoding="utf-8").splitlines()
            norm = (tmp_path / mode / f"{name}.am").read_text(encoding="utf-8").splitlines()
            assert homophone_only_diff(off, norm)
            changed += sum(a != b for a, b in zip(off, norm))
            assert (tmp_path / "off" / f"{name}.en").read_bytes() == \
                (tmp_path / mode / f"{name}.en").read_bytes()
        assert changed > 0


@criterion(9, "comparison protocol on provided hypotheses; results not reproduced")
def test_criterion_9_comparison_protocol(tmp_path, capsys):
    demo = DATA / "demo"
    tsv = tmp_path / "delta.tsv"
    code = main(["-q", "bleu", "--hyp", str(demo / "hyp_regular.en"),
                 str(demo / "hyp_normalized.en"), "--ref", str(demo / "ref.en"),
                 "--tsv", str(tsv)])
    assert code == 0
    out = capsys.readouterr().out
    lines = tsv.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "system\tBLEU\tp1\tp2\tp3\tp4\tBP"
    assert [line.split("\t")[0] for line in lines[1:]] == ["regular", "normalized", "delta"]
    regular, normalized = (float(line.split("\t")[1]) for line in lines[1:3])
    delta = float(lines[3].split("\t")[1])
    assert abs(delta - (normalized - regular)) < 0.011
    assert delta > 0
    assert "delta" in out

    readme = (ROOT / "README.md").read_text(encoding="utf-8")
    assert "37.79" in readme and "32.74" in readme
    assert "not reproduced" in readme
