#!/usr/bin/env python3
"""Regenerate the bundled synthetic Amharic-English corpus and demo BLEU files.

Sentences are templated (time, person, place/object, verb) so every English
side is distinct; the Amharic side gets random homophone spelling variants,
occasional abbreviations, URLs and emoji so that every pipeline stage has
something to do.
"""

import argparse
import random
from pathlib import Path

from ethio_prep.ethiopic_norm import DEFAULT_FAMILIES
from ethio_prep.text_clean import AbbreviationLexicon, clean_sentence

DATA = Path(__file__).resolve().parents[1] / "src" / "ethio_prep" / "data"

TIMES = [
    ("ትናንት", "Yesterday", "yesterday"),
    ("ዛሬ ጠዋት", "This morning", "this morning"),
    ("ትናንት ማታ", "Last night", "last night"),
    ("ባለፈው ሳምንት", "Last week", "last week"),
]
# (amharic, english, gender)
NAMES = [
    ("አበበ", "Abebe", "m"), ("ከበደ", "Kebede", "m"), ("ኃይሉ", "Hailu", "m"),
    ("ዓለሙ", "Alemu", "m"), ("ሐጎስ", "Hagos", "m"), ("ፀጋዬ", "Tsegaye", "m"),
    ("አልማዝ", "Almaz", "f"), ("ሰላማዊት", "Selamawit", "f"), ("ፀሐይ", "Tsehay", "f"),
    ("ሃና", "Hana", "f"), ("ትዕግሥት", "Tigist", "f"), ("መሠረት", "Meseret", "f"),
]
TITLES = {"m": ("ዶ/ር", "Dr."), "f": ("ወ/ሮ", "Mrs.")}
PLACES = [
    ("ገበያ", "the market"), ("ት/ቤት", "school"), ("ሆስፒታል", "the hospital"),
    ("ሥራ", "work"), ("ቤ/ክ", "church"), ("አዲስ አበባ", "Addis Ababa"),
    ("ጎንደር", "Gondar"), ("ሐረር", "Harar"),
]
GOODS = [
    ("ዳቦ", "bread"), ("ቡና", "coffee"), ("ወተት", "milk"), ("ሥጋ", "meat"),
    ("ዓሣ", "fish"), ("መጽሐፍ", "a book"), ("ልብስ", "clothes"), ("ጫማ", "shoes"),
]
FOODS = [("ዳቦ", "bread"), ("ሥጋ", "meat"), ("ዓሣ", "fish"), ("እንጀራ", "injera"), ("ሩዝ", "rice")]
VERBS = {
    "went": {"m": "ሄደ", "f": "ሄደች"},
    "bought": {"m": "ገዛ", "f": "ገዛች"},
    "ate": {"m": "በላ", "f": "በላች"},
}
URLS = ["https://www.press.et", "https://www.fanabc.com", "www.waltainfo.com"]
EMOJI = ["👍", "🙏", "😊", "🇪🇹"]


def variant_map():
    """Same-order alternatives for every homophone character."""
    alternatives = {}
    for family in DEFAULT_FAMILIES:
        for order in range(7):
            chars = [chr(base + order) for base in family.members]
            for ch in chars:
                alternatives[ch] = [c for c in chars if c != ch]
    return alternatives


def respell(text, rng, alternatives, p=0.25):
    return "".join(
        rng.choice(alternatives[ch]) if ch in alternatives and rng.random() < p else ch
        for ch in text
    )


def combinations():
    for t in TIMES:
        for name in NAMES:
            for titled in (False, True):
                for place in PLACES:
                    yield "went", t, name, titled, place
                for good in GOODS:
                    yield "bought", t, name, titled, good
                for food in FOODS:
                    yield "ate", t, name, titled, food


def render(kind, time, name, titled, thing):
    am_time, en_time, en_time_late = time
    am_name, en_name, gender = name
    if titled:
        am_title, en_title = TITLES[gender]
        am_name, en_name = f"{am_title} {am_name}", f"{en_title} {en_name}"
    verb = VERBS[kind][gender]
    if kind == "went":
        return f"{am_time} {am_name} ወደ {thing[0]} {verb}።", f"{en_time} {en_name} went to {thing[1]}."
    if kind == "bought":
        return f"{am_time} {am_name} {thing[0]} {verb}።", f"{en_time} {en_name} bought {thing[1]}."
    return f"{am_name} {am_time} {thing[0]} {verb}።", f"{en_name} ate {thing[1]} {en_time_late}."


def corrupt(sentence, rng, rate, vocab):
    words = sentence.split()
    out = []
    for w in words:
        r = rng.random()
        if r < rate / 2:
            continue
        out.append(rng.choice(vocab) if r < rate else w)
    return " ".join(out) or words[0]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=2022)
    parser.add_argument("--out", type=Path, default=DATA)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    alternatives = variant_map()
    combos = rng.sample(list(combinations()), args.pairs)
    am_lines, en_lines = [], []
    for combo in combos:
        am, en = render(*combo)
        am = respell(am, rng, alternatives)
        r = rng.random()
        if r < 0.06:
            am, en = f"{am} {rng.choice(URLS)}", f"{en} {rng.choice(URLS)}"
        elif r < 0.12:
            am = f"{am} {rng.choice(EMOJI)}"
        elif r < 0.16:
            en = f"{en}  {rng.choice(EMOJI)}"
        am_lines.append(am)
        en_lines.append(en)
    assert len(set(en_lines)) == len(en_lines)

    synthetic = args.out / "synthetic"
    synthetic.mkdir(parents=True, exist_ok=True)
    (synthetic / "synthetic.am").write_text("\n".join(am_lines) + "\n", encoding="utf-8")
    (synthetic / "synthetic.en").write_text("\n".join(en_lines) + "\n", encoding="utf-8")
    (synthetic / "manifest.tsv").write_text(
        f"synthetic\ttwo-file-aligned\tsynthetic.am\tsynthetic.en\t{args.pairs}\n", encoding="utf-8")

    # demo scoring files: cleaned references with two corrupted "system outputs"
    lexicon = AbbreviationLexicon.builtin("en")
    refs = [clean_sentence(lexicon.expand(en)) for en in en_lines[:200]]
    vocab = sorted({w for line in refs for w in line.split()})
    hyp_a = [corrupt(line, rng, 0.45, vocab) for line in refs]
    hyp_b = [corrupt(line, rng, 0.30, vocab) for line in refs]
    demo = args.out / "demo"
    demo.mkdir(parents=True, exist_ok=True)
    for name, lines in (("ref.en", refs), ("hyp_regular.en", hyp_a), ("hyp_normalized.en", hyp_b)):
        (demo / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {args.pairs} pairs to {synthetic} and demo files to {demo}")


if __name__ == "__main__":
    main()
