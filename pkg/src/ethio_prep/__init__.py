"""Amharic-English parallel corpus preprocessing and evaluation toolkit."""

__version__ = "0.1.0"

from .ethiopic_norm import (  # noqa: E402
    DEFAULT_FAMILIES, HomophoneFamily, NormalizationTable, default_table, learn_table,
    load_table, normalize_text, save_table,
)
from .text_clean import (  # noqa: E402
    AbbreviationLexicon, CleanOptions, FilterRules, clean_sentence, expand_abbreviations,
    filter_pair,
)
from .corpus import (  # noqa: E402
    CorpusManifest, SentencePair, SplitSpec, dedup, ingest, split, stats,
)
from .bpe import BpeModel, bpe_apply, bpe_decode, bpe_learn  # noqa: E402
from .bleu import compare_runs, corpus_bleu  # noqa: E402
