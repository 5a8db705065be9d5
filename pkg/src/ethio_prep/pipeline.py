"""End-to-end preprocessing runs: clean -> expand -> normalize -> dedup -> split -> bpe."""

from __future__ import annotations

import configparser
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bpe import EOW, DEFAULT_MERGES, bpe_apply, bpe_learn, count_words
from .corpus import (
    CorpusManifest, Deduplicator, SentencePair, SplitSpec, ingest, split, write_aligned,
)
from .ethiopic_norm import (
    NormalizationTable, count_characters, default_table, learn_table_from_counts,
    load_table, save_table,
)
from .text_clean import (
    AbbreviationLexicon, CleanOptions, FilterRules, clean_sentence, filter_pair,
    lowercase_latin,
)

log = logging.getLogger(__name__)

STAGES = ("clean", "expand", "normalize", "dedup", "split", "bpe")
NORMALIZATION_MODES = ("off", "fixed", "learned")
RECORD_NAME = "run_record.json"


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class BpeSettings:
    num_merges: int = DEFAULT_MERGES
    eow_marker: str = EOW
    joint: bool = False


@dataclass
class PipelineConfig:
    manifest: Path
    output_dir: Path
    stages: tuple[str, ...] = STAGES
    normalization: str = "fixed"
    table_path: Path | None = None
    clean: CleanOptions = CleanOptions()
    filter: FilterRules = FilterRules()
    split: SplitSpec = SplitSpec()
    bpe: BpeSettings = BpeSettings()
    # "builtin", a path, or None to skip a side
    source_lexicon: str | None = "builtin"
    target_lexicon: str | None = "builtin"
    dedup_before_normalize: bool = False
    exact_dedup: bool = False
    strict_counts: bool = False
    write_intermediate: bool = False

    def __post_init__(self):
        self.manifest = Path(self.manifest)
        self.output_dir = Path(self.output_dir)
        self.stages = tuple(self.stages)
        unknown = set(self.stages) - set(STAGES)
        if unknown:
            raise ConfigError(f"unknown stages: {sorted(unknown)}")
        positions = [STAGES.index(s) for s in self.stages]
        if positions != sorted(set(positions)):
            raise ConfigError(f"stages must follow the order {', '.join(STAGES)}")
        if self.normalization not in NORMALIZATION_MODES:
            raise ConfigError(f"normalization must be one of {NORMALIZATION_MODES}")

    def execution_order(self) -> list[str]:
        order = list(self.stages)
        if self.dedup_before_normalize and "dedup" in order and "normalize" in order:
            i, j = order.index("normalize"), order.index("dedup")
            order[i], order[j] = order[j], order[i]
        return order

    def snapshot(self) -> dict:
        data = asdict(self)
        data["manifest"] = str(self.manifest)
        data["output_dir"] = str(self.output_dir)
        data["table_path"] = str(self.table_path) if self.table_path else None
        data["stages"] = list(self.stages)
        data["split"] = {
            "train_fraction": str(self.split.train_fraction),
            "valid_fraction": str(self.split.valid_fraction),
            "test_fraction": str(self.split.test_fraction),
            "seed": self.split.seed,
        }
        return data

    @classmethod
    def from_ini(cls, text: str, base_dir=".", **overrides) -> "PipelineConfig":
        return _config_from_ini(text, Path(base_dir), overrides)

    @classmethod
    def load(cls, path, **overrides) -> "PipelineConfig":
        path = Path(path)
        return cls.from_ini(path.read_text(encoding="utf-8"), path.parent, **overrides)


_SECTIONS = {
    "pipeline": {"manifest", "output_dir", "stages", "dedup_before_normalize",
                 "strict_counts", "write_intermediate"},
    "clean": {"strip_urls", "strip_emoji", "lowercase_latin", "collapse_whitespace",
              "source_lexicon", "target_lexicon"},
    "filter": {"min_chars", "max_chars", "max_length_ratio", "min_source_script_fraction"},
    "normalize": {"mode", "table"},
    "dedup": {"exact"},
    "split": {"train", "valid", "test", "seed"},
    "bpe": {"num_merges", "eow", "joint"},
}


def _config_from_ini(text, base_dir, overrides):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        extra = set(parser[section]) - _SECTIONS[section]
        if extra:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(extra)}")

    def get(section, key, fallback=None):
        return parser.get(section, key, fallback=fallback) if parser.has_section(section) else fallback

    def flag(section, key, default):
        if not parser.has_section(section) or key not in parser[section]:
            return default
        try:
            return parser.getboolean(section, key)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}") from None

    def path(value):
        return None if value in (None, "") else base_dir / value

    def table(value):
        return None if value in (None, "", "default") else base_dir / value

    def lexicon(value):
        if value in (None, "builtin"):
            return "builtin"
        if value.lower() in ("none", "off", ""):
            return None
        return str(base_dir / value)

    try:
        kwargs = dict(
            manifest=path(get("pipeline", "manifest")),
            output_dir=path(get("pipeline", "output_dir", "out")),
            stages=tuple(s.strip() for s in get("pipeline", "stages", ",".join(STAGES)).split(",")
                         if s.strip()),
            dedup_before_normalize=flag("pipeline", "dedup_before_normalize", False),
            strict_counts=flag("pipeline", "strict_counts", False),
            write_intermediate=flag("pipeline", "write_intermediate", False),
            clean=CleanOptions(**{k: flag("clean", k, True) for k in (
                "strip_urls", "strip_emoji", "lowercase_latin", "collapse_whitespace")}),
            source_lexicon=lexicon(get("clean", "source_lexicon")),
            target_lexicon=lexicon(get("clean", "target_lexicon")),
            filter=FilterRules(
                min_chars=int(get("filter", "min_chars", 2)),
                max_chars=int(get("filter", "max_chars", 2000)),
                max_length_ratio=float(get("filter", "max_length_ratio", 9)),
                min_source_script_fraction=float(get("filter", "min_source_script_fraction", 0.5)),
            ),
            normalization=get("normalize", "mode", "fixed"),
            table_path=table(get("normalize", "table")),
            exact_dedup=flag("dedup", "exact", False),
            split=SplitSpec(
                Fraction(get("split", "train", "0.8")),
                Fraction(get("split", "valid", "0.1")),
                Fraction(get("split", "test", "0.1")),
                seed=int(get("split", "seed", 0)),
            ),
            bpe=BpeSettings(
                num_merges=int(get("bpe", "num_merges", DEFAULT_MERGES)),
                eow_marker=get("bpe", "eow", EOW),
                joint=flag("bpe", "joint", False),
            ),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    if kwargs["manifest"] is None:
        raise ConfigError("[pipeline] manifest is required")
    return PipelineConfig(**kwargs)


def resolve_lexicon(spec, side) -> AbbreviationLexicon | None:
    if spec is None:
        return None
    if spec == "builtin":
        return AbbreviationLexicon.builtin(side)
    return AbbreviationLexicon.load(spec)


def resolve_table(spec) -> NormalizationTable:
    if spec in (None, "default"):
        return default_table()
    return load_table(spec)


# Stage functions. Each returns the surviving pairs; drops are appended to
# ``drops`` as (origin_id, line_no, reason).

def clean_pairs(pairs, options: CleanOptions, rules: FilterRules, drops: list) -> list:
    kept = []
    for pair in pairs:
        cleaned = pair.with_text(clean_sentence(pair.source_text, options),
                                 clean_sentence(pair.target_text, options))
        reason = filter_pair(cleaned, rules)
        if reason is None:
            kept.append(cleaned)
        else:
            drops.append((pair.origin_id, pair.line_no, reason))
    return kept


def expand_pairs(pairs, source_lexicon, target_lexicon, lowercase: bool) -> list:
    def fix(text, lexicon):
        if lexicon is not None:
            text = lexicon.expand(text)
        return lowercase_latin(text) if lowercase else text

    return [p.with_text(fix(p.source_text, source_lexicon), fix(p.target_text, target_lexicon))
            for p in pairs]


def normalize_pairs(pairs, table: NormalizationTable) -> list:
    return [p.with_text(table.normalize(p.source_text), p.target_text) for p in pairs]


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class StageCount:
    stage: str
    pairs_in: int
    pairs_out: int
    dropped: int


@dataclass
class RunRecord:
    config: dict
    seed: int
    version: str = __version__
    input_digests: dict = field(default_factory=dict)
    stages: list[StageCount] = field(default_factory=list)
    splits: dict = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    status: str = "running"
    failed_stage: str | None = None
    error: str | None = None
    started: str = ""
    finished: str = ""

    def add(self, stage, pairs_in, pairs_out, dropped=0):
        self.stages.append(StageCount(stage, pairs_in, pairs_out, dropped))
        log.info("%-9s in=%d out=%d dropped=%d", stage, pairs_in, pairs_out, dropped)

    def balanced(self) -> bool:
        ok = all(s.pairs_out + s.dropped == s.pairs_in for s in self.stages)
        chained = all(a.pairs_out == b.pairs_in for a, b in zip(self.stages, self.stages[1:]))
        return ok and chained

    def to_dict(self, timestamps=True) -> dict:
        data = asdict(self)
        if not timestamps:
            data.pop("started")
            data.pop("finished")
        return data

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False,
                                         sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "RunRecord":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        data["stages"] = [StageCount(**s) for s in data["stages"]]
        return cls(**data)


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_tokenized(model, lines, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(" ".join(bpe_apply(model, line)) + "\n")


class _Run:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = config.output_dir
        self.record = RunRecord(config=config.snapshot(), seed=config.split.seed, started=_now())
        self.drops: list = []
        self.splits: dict[str, list[SentencePair]] | None = None

    def write(self, name, pairs):
        write_aligned(pairs, self.out / name)
        self.record.outputs += [name + ".am", name + ".en"]

    def ingest(self):
        manifest = CorpusManifest.load(self.config.manifest)
        for entry in manifest.entries:
            for p in (entry.source_path, entry.target_path):
                if p is not None:
                    self.record.input_digests[str(p)] = file_digest(p)
        pairs = list(ingest(manifest, strict_counts=self.config.strict_counts))
        self.record.add("ingest", len(pairs), len(pairs))
        return pairs

    def clean(self, pairs):
        options = self.config.clean
        if "expand" in self.config.stages:
            # lowercasing waits until abbreviations (case-sensitive) are expanded
            options = CleanOptions(options.strip_urls, options.strip_emoji, False,
                                   options.collapse_whitespace)
        before = len(self.drops)
        kept = clean_pairs(pairs, options, self.config.filter, self.drops)
        return kept, len(self.drops) - before

    def expand(self, pairs):
        return expand_pairs(
            pairs,
            resolve_lexicon(self.config.source_lexicon, "am"),
            resolve_lexicon(self.config.target_lexicon, "en"),
            self.config.clean.lowercase_latin,
        ), 0

    def normalize(self, pairs):
        mode = self.config.normalization
        if mode == "off":
            return pairs, 0
        if mode == "fixed":
            table = resolve_table(self.config.table_path)
        else:
            counts = count_characters(p.source_text for p in pairs)
            table, report = learn_table_from_counts(counts)
            (self.out / "cell_report.tsv").write_text(report.to_tsv(), encoding="utf-8")
            self.record.outputs.append("cell_report.tsv")
        save_table(table, self.out / "normalization_table.tsv")
        self.record.outputs.append("normalization_table.tsv")
        return normalize_pairs(pairs, table), 0

    def dedup(self, pairs):
        dedup = Deduplicator(exact=self.config.exact_dedup)
        kept = list(dedup(pairs))
        return kept, dedup.dropped

    def split(self, pairs):
        self.write("corpus", pairs)
        train, valid, test = split(pairs, self.config.split)
        self.splits = {"train": train, "valid": valid, "test": test}
        for name, part in self.splits.items():
            self.write(name, part)
        self.record.splits = {name: len(part) for name, part in self.splits.items()}
        return train + valid + test, 0

    def bpe(self, pairs):
        settings = self.config.bpe
        parts = self.splits or {"corpus": pairs}
        training = parts.get("train", pairs)
        src_counts = count_words(p.source_text for p in training)
        tgt_counts = count_words(p.target_text for p in training)
        if settings.joint:
            model = bpe_learn(src_counts + tgt_counts, settings.num_merges, settings.eow_marker)
            model.save(self.out / "bpe.joint.model")
            models = {"am": model, "en": model}
            self.record.outputs.append("bpe.joint.model")
        else:
            models = {
                "am": bpe_learn(src_counts, settings.num_merges, settings.eow_marker),
                "en": bpe_learn(tgt_counts, settings.num_merges, settings.eow_marker),
            }
            for side, model in models.items():
                model.save(self.out / f"bpe.{side}.model")
                self.record.outputs.append(f"bpe.{side}.model")
        for name, part in parts.items():
            write_tokenized(models["am"], (p.source_text for p in part), self.out / f"{name}.bpe.am")
            write_tokenized(models["en"], (p.target_text for p in part), self.out / f"{name}.bpe.en")
            self.record.outputs += [f"{name}.bpe.am", f"{name}.bpe.en"]
        return pairs, 0

    def execute(self) -> RunRecord:
        self.out.mkdir(parents=True, exist_ok=True)
        stage = "ingest"
        try:
            pairs = self.ingest()
            for i, stage in enumerate(self.config.execution_order(), start=1):
                n_in = len(pairs)
                pairs, dropped = getattr(self, stage)(pairs)
                self.record.add(stage, n_in, len(pairs), dropped)
                if self.config.write_intermediate:
                    self.write(f"stages/{i:02d}_{stage}", pairs)
            if "split" not in self.config.stages:
                self.write("corpus", pairs)
            with open(self.out / "dropped.tsv", "w", encoding="utf-8", newline="\n") as fh:
                fh.write("origin_id\tline_no\treason\n")
                fh.writelines(f"{o}\t{n}\t{r}\n" for o, n, r in self.drops)
            self.record.outputs.append("dropped.tsv")
        except Exception as exc:
            self.record.status = "failed"
            self.record.failed_stage = stage
            self.record.error = f"{type(exc).__name__}: {exc}"
            self.record.finished = _now()
            self.record.save(self.out / RECORD_NAME)
            raise PipelineError(stage, exc) from exc
        self.record.status = "ok"
        self.record.finished = _now()
        self.record.save(self.out / RECORD_NAME)
        return self.record


def run(config: PipelineConfig) -> RunRecord:
    return _Run(config).execute()
