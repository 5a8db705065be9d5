#!/usr/bin/env python3
"""Run the bundled pipeline with normalization off and on, then compare.

Prints Amharic vocabulary size and character inventory for each run, and
scores the two bundled demo hypothesis files against their reference.
"""

import argparse
import tempfile
from pathlib import Path

from ethio_prep.bleu import compare_runs, corpus_bleu
from ethio_prep.pipeline import PipelineConfig, run

DATA = Path(__file__).resolve().parents[1] / "src" / "ethio_prep" / "data"


def vocabulary(path):
    words, chars = set(), set()
    for line in path.read_text(encoding="utf-8").splitlines():
        words.update(line.split())
        chars.update(ch for ch in line if "ሀ" <= ch <= "፿")
    return len(words), len(chars)


def score(hyp, ref):
    hyps = hyp.read_text(encoding="utf-8").splitlines()
    refs = ref.read_text(encoding="utf-8").splitlines()
    return corpus_bleu([(h, [r]) for h, r in zip(hyps, refs)])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=DATA / "synthetic" / "pipeline.ini")
    parser.add_argument("--out-dir", help="keep run outputs here (default: a temp dir)")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        root = Path(args.out_dir or tmp)
        print("mode\tpairs\tam_types\tam_fidel")
        for mode in ("off", "fixed", "learned"):
            cfg = PipelineConfig.load(args.config, output_dir=root / mode, normalization=mode)
            record = run(cfg)
            types, fidel = vocabulary(root / mode / "train.am")
            print(f"{mode}\t{sum(record.splits.values())}\t{types}\t{fidel}")

    demo = DATA / "demo"
    record = compare_runs(score(demo / "hyp_regular.en", demo / "ref.en"),
                          score(demo / "hyp_normalized.en", demo / "ref.en"))
    print()
    print(record.format())


if __name__ == "__main__":
    main()
