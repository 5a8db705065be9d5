"""Command-line interface: ``ethio-prep <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Failures print one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bleu import BleuError, compare_runs, corpus_bleu
from .bpe import EOW, DEFAULT_MERGES, BpeFormatError, BpeModel, bpe_learn, count_words
from .corpus import (
    CorpusError, CorpusManifest, Deduplicator, SplitSpec, ingest, read_aligned, split, stats,
    write_aligned, write_tsv,
)
from .ethiopic_norm import (
    TableFormatError, TableValidationError, count_characters, learn_table_from_counts,
    save_table,
)
from .pipeline import (
    ConfigError, PipelineConfig, PipelineError, clean_pairs, expand_pairs,
    resolve_lexicon, resolve_table, run, write_tokenized,
)
from .text_clean import CleanOptions, FilterRules, LexiconError

OUT_ENV = "ETHIO_PREP_OUT"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

DATA_ERRORS = (
    CorpusError, TableFormatError, TableValidationError, LexiconError, BpeFormatError,
    BleuError, OSError, UnicodeDecodeError,
)

log = logging.getLogger("ethio_prep")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_lines(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return [line.rstrip("\r\n") for line in fh]


def cmd_ingest(args):
    manifest = CorpusManifest.load(args.manifest)
    pairs = ingest(manifest, strict_counts=args.strict_counts)
    if args.tsv:
        n = write_tsv(pairs, args.out)
    else:
        n = write_aligned(pairs, args.out)
    log.info("ingested %d pairs", n)


def cmd_clean(args):
    options = CleanOptions(not args.keep_urls, not args.keep_emoji,
                           not args.no_lowercase, not args.no_collapse)
    rules = FilterRules(args.min_chars, args.max_chars, args.max_ratio, args.min_script_fraction)
    expand = not args.no_expand
    first = options
    if expand:
        first = CleanOptions(options.strip_urls, options.strip_emoji, False,
                             options.collapse_whitespace)
    drops = []
    pairs = clean_pairs(read_aligned(args.inp), first, rules, drops)
    if expand:
        pairs = expand_pairs(pairs, resolve_lexicon(args.abbrev_am, "am"),
                             resolve_lexicon(args.abbrev_en, "en"), options.lowercase_latin)
    write_aligned(pairs, args.out)
    if args.drop_log:
        with open(args.drop_log, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("origin_id\tline_no\treason\n")
            fh.writelines(f"{o}\t{n}\t{r}\n" for o, n, r in drops)
    log.info("kept %d pairs, dropped %d", len(pairs), len(drops))


def cmd_normalize(args):
    lines = _read_lines(args.inp)
    if args.learn:
        counts = count_characters(_read_lines(args.learn_from) if args.learn_from else lines)
        table, report = learn_table_from_counts(counts)
        if args.report:
            Path(args.report).write_text(report.to_tsv(), encoding="utf-8")
    else:
        table = resolve_table(args.table)
    if args.save_table:
        save_table(table, args.save_table)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(table.normalize(line) + "\n" for line in lines)


def cmd_dedup(args):
    dedup = Deduplicator(exact=args.exact)
    write_aligned(dedup(read_aligned(args.inp)), args.out)
    log.info("kept %d pairs, dropped %d duplicates", dedup.kept, dedup.dropped)


def cmd_split(args):
    spec = SplitSpec(Fraction(args.train), Fraction(args.valid), Fraction(args.test), args.seed)
    parts = split(list(read_aligned(args.inp)), spec)
    for name, part in zip(("train", "valid", "test"), parts):
        write_aligned(part, Path(args.out_dir) / name)
    log.info("split sizes %s", "/".join(str(len(p)) for p in parts))


def cmd_bpe_learn(args):
    counts = count_words(line for path in args.inp for line in _read_lines(path))
    model = bpe_learn(counts, args.merges, args.eow)
    model.save(args.out)
    log.info("learned %d merges", len(model.merges))


def cmd_bpe_apply(args):
    model = BpeModel.load(args.model)
    write_tokenized(model, _read_lines(args.inp), args.out)


def _eval_pairs(hyp_path, ref_paths):
    hyps = _read_lines(hyp_path)
    refs = [_read_lines(p) for p in ref_paths]
    for path, lines in zip(ref_paths, refs):
        if len(lines) != len(hyps):
            raise CorpusError(f"{path}: {len(lines)} lines, hypothesis has {len(hyps)}")
    return [(h, [r[i] for r in refs]) for i, h in enumerate(hyps)]


def cmd_bleu(args):
    if len(args.hyp) > 2:
        raise UsageError("--hyp takes one or two files")
    reports = [corpus_bleu(_eval_pairs(h, args.ref), max_n=args.max_n, smoothing=args.smoothing)
               for h in args.hyp]
    if len(reports) == 1:
        print(reports[0].format())
        tsv = reports[0].to_tsv()
    else:
        record = compare_runs(*reports, labels=tuple(args.labels))
        for label, report in zip(args.labels, reports):
            print(f"{label}: {report.format()}")
        print(record.format())
        tsv = record.to_tsv()
    if args.tsv:
        Path(args.tsv).write_text(tsv, encoding="utf-8")


def cmd_stats(args):
    if args.manifest:
        manifest = CorpusManifest.load(args.manifest)
        if args.declared:
            lines = [f"{e.origin_id}\t{e.declared_count or 0}" for e in manifest.entries]
            text = "[declared]\n" + "\n".join(lines) + f"\ntotal\t{manifest.declared_total}\n"
        else:
            text = stats(ingest(manifest)).to_tsv()
    elif args.inp:
        text = stats(read_aligned(args.inp)).to_tsv()
    else:
        raise UsageError("stats needs --in or --manifest")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_run(args):
    out_dir = args.out_dir or os.environ.get(OUT_ENV)
    config = PipelineConfig.load(args.config, output_dir=Path(out_dir) if out_dir else None)
    record = run(config)
    log.info("run finished: %s", ", ".join(f"{k}={v}" for k, v in record.splits.items()))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ethio-prep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="read manifest sources into one corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output prefix (PREFIX.am / PREFIX.en) or TSV path")
    p.add_argument("--tsv", action="store_true", help="write source<TAB>target instead")
    p.add_argument("--strict-counts", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("clean", help="clean, expand abbreviations and filter an aligned corpus")
    p.add_argument("--in", dest="inp", required=True, help="input prefix")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--keep-urls", action="store_true")
    p.add_argument("--keep-emoji", action="store_true")
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--no-collapse", action="store_true")
    p.add_argument("--no-expand", action="store_true")
    p.add_argument("--abbrev-am", default="builtin")
    p.add_argument("--abbrev-en", default="builtin")
    p.add_argument("--min-chars", type=int, default=2)
    p.add_argument("--max-chars", type=int, default=2000)
    p.add_argument("--max-ratio", type=float, default=9.0)
    p.add_argument("--min-script-fraction", type=float, default=0.5)
    p.add_argument("--drop-log")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("normalize", help="homophone-normalize an Amharic text file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--table", default="default", help="'default' or a table TSV")
    p.add_argument("--learn", action="store_true", help="learn the table from character frequencies")
    p.add_argument("--learn-from", help="count frequencies here instead of --in")
    p.add_argument("--report", help="write the cell frequency report (with --learn)")
    p.add_argument("--save-table")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("dedup", help="drop repeated (source, target) pairs")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--exact", action="store_true", help="keep full keys instead of digests")
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("split", help="seeded train/valid/test split")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train", default="0.8")
    p.add_argument("--valid", default="0.1")
    p.add_argument("--test", default="0.1")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("bpe-learn", help="learn BPE merges from text files")
    p.add_argument("--in", dest="inp", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--merges", type=int, default=DEFAULT_MERGES)
    p.add_argument("--eow", default=EOW)
    p.set_defaults(func=cmd_bpe_learn)

    p = sub.add_parser("bpe-apply", help="segment a text file with a BPE model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bpe_apply)

    p = sub.add_parser("bleu", help="corpus BLEU; two --hyp files give a comparison")
    p.add_argument("--hyp", nargs="+", required=True)
    p.add_argument("--ref", nargs="+", required=True)
    p.add_argument("--labels", nargs=2, default=["regular", "normalized"])
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--smoothing", choices=["none", "add-one"], default="none")
    p.add_argument("--tsv", help="also write the report as TSV")
    p.set_defaults(func=cmd_bleu)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--in", dest="inp")
    p.add_argument("--manifest")
    p.add_argument("--declared", action="store_true", help="sum declared counts only")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("run", help="run the configured pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", help=f"overrides the config (default from ${OUT_ENV})")
    p.set_defaults(func=cmd_run)
    return parser


def _fail(code, kind, message, **extra):
    print(json.dumps({"error": kind, "message": message, **extra}, ensure_ascii=False),
          file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except (UsageError, ConfigError) as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    except PipelineError as exc:
        code = EXIT_DATA if isinstance(exc.cause, DATA_ERRORS + (ValueError,)) else EXIT_INTERNAL
        return _fail(code, type(exc.cause).__name__, str(exc.cause), stage=exc.stage)
    except DATA_ERRORS + (ValueError,) as exc:
        return _fail(EXIT_DATA, type(exc).__name__, str(exc))
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_INTERNAL, type(exc).__name__, str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
