"""Amharic homophone normalization.

Homophone series are grouped into families. Every family owns seven
equivalence cells, one per vowel order, except where an order is redirected
to another target (the glottal/pharyngeal and h-families send their 4th
order to the 1st-order canonical character); such orders are merged into the
cell of their target.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

ORDERS = 7
# main Ethiopic block; the other ranges are the supplement and extended blocks
ETHIOPIC_BLOCK = (0x1200, 0x137F)
ETHIOPIC_RANGES = (
    (0x1200, 0x139F),
    (0x2D80, 0x2DDF),
    (0xAB00, 0xAB2F),
    (0x1E7E0, 0x1E7FF),
)

MODES = ("fixed", "learned")


class TableFormatError(ValueError):
    """Malformed normalization table file."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class TableValidationError(ValueError):
    pass


def is_ethiopic(cp: int) -> bool:
    return any(lo <= cp <= hi for lo, hi in ETHIOPIC_RANGES)


@dataclass(frozen=True)
class HomophoneFamily:
    name: str
    members: tuple[int, ...]
    canonical_series: int
    order_exceptions: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "order_exceptions", dict(self.order_exceptions))
        if not self.members or len(set(self.members)) != len(self.members):
            raise ValueError(f"family {self.name!r}: members must be unique and non-empty")
        lo, hi = ETHIOPIC_BLOCK
        for base in self.members:
            if not (lo <= base and base + ORDERS - 1 <= hi) or base % 8:
                raise ValueError(f"family {self.name!r}: U+{base:04X} does not start an Ethiopic series")
            for cp in range(base, base + ORDERS):
                if not unicodedata.name(chr(cp), ""):
                    raise ValueError(f"family {self.name!r}: U+{cp:04X} is unassigned")
        if self.canonical_series not in self.members:
            raise ValueError(f"family {self.name!r}: canonical series not among members")
        for order, target in self.order_exceptions.items():
            if not 0 <= order < ORDERS:
                raise ValueError(f"family {self.name!r}: exception order {order} out of range")
            if not is_ethiopic(target):
                raise ValueError(f"family {self.name!r}: exception target U+{target:04X} is not Ethiopic")

    def default_target(self, order: int) -> int:
        return self.order_exceptions.get(order, self.canonical_series + order)

    def cells(self) -> list[tuple[int, list[int]]]:
        """Equivalence cells as ``(order, members)``.

        ``order`` is the order of the cell's default target; members of
        redirected orders are appended to the target's cell.
        """
        grouped: dict[int, list[int]] = {}
        for order in range(ORDERS):
            grouped.setdefault(self.default_target(order), []).extend(
                base + order for base in self.members
            )
        cells = []
        for target, members in grouped.items():
            offset = target - self.canonical_series
            order = offset if 0 <= offset < ORDERS else min(
                o for o in range(ORDERS) if self.default_target(o) == target
            )
            cells.append((order, members))
        return sorted(cells)


DEFAULT_FAMILIES = (
    HomophoneFamily("h", (0x1200, 0x1210, 0x1280), 0x1200, {3: 0x1200}),
    HomophoneFamily("s", (0x1230, 0x1220), 0x1230),
    HomophoneFamily("a", (0x12A0, 0x12D0), 0x12A0, {3: 0x12A0}),
    HomophoneFamily("ts", (0x1338, 0x1340), 0x1338),
)


@dataclass(frozen=True)
class NormalizationTable:
    mapping: Mapping[int, int]
    mode: str = "fixed"
    _translate: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        mapping = {int(k): int(v) for k, v in dict(self.mapping).items()}
        if self.mode not in MODES:
            raise TableValidationError(f"unknown mode {self.mode!r}")
        for src, dst in mapping.items():
            if src == dst:
                raise TableValidationError(f"U+{src:04X} maps to itself")
            if not (is_ethiopic(src) and is_ethiopic(dst)):
                raise TableValidationError(f"U+{src:04X} -> U+{dst:04X} leaves the Ethiopic range")
            if dst in mapping:
                raise TableValidationError(
                    f"U+{src:04X} -> U+{dst:04X} but U+{dst:04X} is itself mapped (not idempotent)"
                )
        object.__setattr__(self, "mapping", mapping)
        object.__setattr__(self, "_translate", mapping)

    def __len__(self):
        return len(self.mapping)

    def normalize(self, text: str) -> str:
        return text.translate(self._translate)


def normalize_text(text: str, table: NormalizationTable) -> str:
    return table.normalize(text)


def _table_from_targets(families, choose) -> NormalizationTable:
    mapping = {}
    for family in families:
        for order, members in family.cells():
            target = choose(family, order, members)
            for cp in members:
                if cp != target:
                    mapping[cp] = target
    return mapping


def default_table(families: Iterable[HomophoneFamily] = DEFAULT_FAMILIES) -> NormalizationTable:
    mapping = _table_from_targets(
        families, lambda family, order, members: family.default_target(order)
    )
    return NormalizationTable(mapping, mode="fixed")


@dataclass
class Cell:
    family: str
    order: int
    counts: list[tuple[int, int]]
    chosen: int


@dataclass
class CellFrequencyReport:
    cells: list[Cell] = field(default_factory=list)

    def rows(self):
        for cell in self.cells:
            for cp, count in cell.counts:
                yield cell.family, cell.order, cp, count, int(cp == cell.chosen)

    def to_tsv(self) -> str:
        lines = ["family\torder\tcodepoint\tcount\tchosen"]
        lines += [f"{f}\t{o}\t{cp:04X}\t{n}\t{c}" for f, o, cp, n, c in self.rows()]
        return "\n".join(lines) + "\n"


def count_characters(corpus: Iterable[str]) -> Counter:
    counts: Counter = Counter()
    for text in corpus:
        counts.update(text)
    return counts


def learn_table_from_counts(
    counts: Mapping, families: Iterable[HomophoneFamily] = DEFAULT_FAMILIES
) -> tuple[NormalizationTable, CellFrequencyReport]:
    """Pick the most frequent member of every cell as its target.

    ``counts`` may be keyed by characters or code points. Ties go to the
    fixed-table target when it is among the tied members, otherwise to the
    lowest code point; empty cells keep the fixed target.
    """
    def count_of(cp):
        return counts.get(chr(cp), 0) + counts.get(cp, 0)

    report = CellFrequencyReport()

    def choose(family, order, members):
        tallies = [(cp, count_of(cp)) for cp in members]
        default = family.default_target(order)
        best = max(n for _, n in tallies)
        if best == 0:
            target = default
        else:
            tied = [cp for cp, n in tallies if n == best]
            target = default if default in tied else min(tied)
        report.cells.append(Cell(family.name, order, tallies, target))
        return target

    mapping = _table_from_targets(families, choose)
    return NormalizationTable(mapping, mode="learned"), report


def learn_table(
    corpus: Iterable[str], families: Iterable[HomophoneFamily] = DEFAULT_FAMILIES
) -> tuple[NormalizationTable, CellFrequencyReport]:
    return learn_table_from_counts(count_characters(corpus), families)


def cell_index(families: Iterable[HomophoneFamily] = DEFAULT_FAMILIES) -> dict[int, tuple[str, int]]:
    """Map every cell member to its ``(family, order)`` cell key."""
    index = {}
    for family in families:
        for order, members in family.cells():
            for cp in members:
                index[cp] = (family.name, order)
    return index


def save_table(table: NormalizationTable, path) -> None:
    lines = ["# homophone normalization table: source<TAB>target (hex code points)",
             f"# mode={table.mode}"]
    lines += [f"{src:04X}\t{dst:04X}" for src, dst in sorted(table.mapping.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_cp(field_text: str, line_no: int) -> int:
    text = field_text.strip()
    if text[:2].upper() == "U+":
        text = text[2:]
    try:
        return int(text, 16)
    except ValueError:
        raise TableFormatError(line_no, f"not a hex code point: {field_text!r}") from None


def parse_table(text: str) -> NormalizationTable:
    mapping = {}
    mode = "fixed"
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "mode" and value.strip():
                mode = value.strip()
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise TableFormatError(line_no, f"expected 2 tab-separated fields, got {len(fields)}")
        src, dst = (_parse_cp(f, line_no) for f in fields)
        if src in mapping:
            raise TableFormatError(line_no, f"duplicate source U+{src:04X}")
        mapping[src] = dst
    return NormalizationTable(mapping, mode=mode)


def load_table(path) -> NormalizationTable:
    return parse_table(Path(path).read_text(encoding="utf-8"))
