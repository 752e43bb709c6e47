"""Character-level encodings of logographic name strings.

Names are mapped through lookup tables into phonetic (pinyin), visual
(four-corner, radical decomposition) and keystroke (Wubi98) code strings,
plus scalar per-name properties: a Han-convention indicator, an ambiguity
marker tally, and log relative frequencies of name substrings.
"""
from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class EncodingKind(str, Enum):
    J = "J"      # identity
    PY = "PY"    # pinyin
    FC = "FC"    # four-corner code
    WB = "WB"    # Wubi98
    RD = "RD"    # radical decomposition
    RDS = "RDS"  # radical decomposition + structure marks

    def __str__(self) -> str:
        return self.value


# Unicode ideographic description characters; in RDS codes these mark the
# layout of compound characters and are re-ordered after all radicals.
STRUCTURE_CHARS = frozenset("⿰⿱⿲⿳⿴⿵⿶"
                            "⿷⿸⿹⿺⿻")

# PY/FC/WB codes are joined with "_"; RD/RDS codes with a single space.
_SEPARATORS = {
    EncodingKind.J: "",
    EncodingKind.PY: "_",
    EncodingKind.FC: "_",
    EncodingKind.WB: "_",
    EncodingKind.RD: " ",
    EncodingKind.RDS: " ",
}


def logograms(name: str) -> list[str]:
    """Split a name into logograms (Unicode scalar values, NFC-normalized)."""
    return list(unicodedata.normalize("NFC", name.strip()))


@dataclass(frozen=True)
class EncodingTable:
    kind: EncodingKind
    entries: dict[str, str]
    version: str = ""
    duplicates: int = 0

    def lookup(self, logogram: str) -> str | None:
        return self.entries.get(logogram)


IDENTITY_TABLE = EncodingTable(kind=EncodingKind.J, entries={}, version="identity")


def load_encoding_table(path: str | Path, kind: EncodingKind) -> EncodingTable:
    """Load a `logogram<TAB>code` TSV. '#' lines are comments; first entry
    wins on duplicate logograms (duplicate count kept on the table)."""
    path = Path(path)
    entries: dict[str, str] = {}
    duplicates = 0
    with path.open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line or line.lstrip().startswith("#"):
                continue
            cells = line.split("\t")
            if len(cells) < 2:
                continue
            logogram, code = cells[0], cells[1]
            if len(logograms(logogram)) != 1 or not code:
                continue
            if logogram in entries:
                duplicates += 1
                continue
            entries[logogram] = code
    if not entries:
        raise ValueError(f"no valid entries in encoding table {path}")
    return EncodingTable(kind=kind, entries=entries, version=path.name, duplicates=duplicates)


@dataclass(frozen=True)
class EncodedName:
    source: str
    kind: EncodingKind
    codes: tuple[str, ...]
    joined: str
    fallbacks: int = 0


def transform(name: str, table: EncodingTable) -> EncodedName:
    """Map each logogram of `name` through `table`.

    Unknown logograms fall back to themselves and are tallied in
    `fallbacks`. The J kind bypasses the table entirely.
    """
    chars = logograms(name)
    if not chars:
        raise ValueError("cannot transform an empty name")
    kind = table.kind
    if kind is EncodingKind.J:
        codes = tuple(chars)
        return EncodedName(name, kind, codes, "".join(codes), 0)
    codes = []
    fallbacks = 0
    for ch in chars:
        code = table.lookup(ch)
        if code is None:
            code = ch
            fallbacks += 1
        codes.append(code)
    if kind is EncodingKind.RDS:
        joined = _join_rds(codes)
    else:
        joined = _SEPARATORS[kind].join(codes)
    return EncodedName(name, kind, tuple(codes), joined, fallbacks)


def _join_rds(codes: list[str]) -> str:
    # All radicals in character order, then all structure marks in
    # character order, mirroring how the codes are displayed.
    radicals: list[str] = []
    structures: list[str] = []
    for code in codes:
        for token in code.split(" "):
            if token in STRUCTURE_CHARS:
                structures.append(token)
            elif token:
                radicals.append(token)
    return " ".join(radicals + structures)


def load_surnames(path: str | Path) -> frozenset[str]:
    names = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            names.append(unicodedata.normalize("NFC", line))
    return frozenset(names)


def han_indicator(name: str, surnames: frozenset[str]) -> bool:
    """True iff the name starts with a listed surname (2-logogram surnames
    matched before 1-logogram ones) and has 2-4 logograms in total."""
    if not surnames:
        raise ValueError("surname set is empty")
    chars = logograms(name)
    if not 2 <= len(chars) <= 4:
        return False
    if "".join(chars[:2]) in surnames:
        return True
    return chars[0] in surnames


_AMBIGUITY_MARKS = ("?", "？", "(", ")", "（", "）")


def ambiguity_count(name: str, alias_phrases: tuple[str, ...] = ("又名",)) -> int:
    """Tally of ambiguity markers: question marks, parentheses (each marker
    counts one), and alias phrases such as 又名."""
    text = unicodedata.normalize("NFC", name)
    total = sum(text.count(mark) for mark in _AMBIGUITY_MARKS)
    total += sum(text.count(phrase) for phrase in alias_phrases if phrase)
    return total


LF_RANGES = ("1:1", "1:2", "2:N", "3:N")


def _extract(chars: list[str], tag: str) -> str:
    start_s, end_s = tag.split(":")
    start = int(start_s)
    end = len(chars) if end_s == "N" else int(end_s)
    return "".join(chars[start - 1 : end])


@dataclass
class FrequencyTable:
    """Log relative frequencies of name substrings, keyed by (range, substring)."""
    values: dict[tuple[str, str], float]
    floor: float

    @classmethod
    def from_corpus(cls, names: list[str], ranges: tuple[str, ...] = LF_RANGES,
                    floor: float | None = None) -> "FrequencyTable":
        from collections import Counter
        values: dict[tuple[str, str], float] = {}
        total_names = max(len(names), 1)
        for tag in ranges:
            counts: Counter[str] = Counter()
            for name in names:
                sub = _extract(logograms(name), tag)
                if sub:
                    counts[sub] += 1
            total = sum(counts.values())
            for sub, c in counts.items():
                values[(tag, sub)] = math.log(c / total)
        if floor is None:
            floor = math.log(0.5 / total_names)
        return cls(values=values, floor=floor)

    @classmethod
    def load(cls, path: str | Path, floor: float | None = None) -> "FrequencyTable":
        values: dict[tuple[str, str], float] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line or line.startswith("#"):
                continue
            tag, sub, val = line.split("\t")
            values[(tag, sub)] = float(val)
        if floor is None:
            floor = min(values.values(), default=0.0) + math.log(0.5)
        return cls(values=values, floor=floor)

    def save(self, path: str | Path) -> None:
        lines = [f"{tag}\t{sub}\t{val:.10f}" for (tag, sub), val in sorted(self.values.items())]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def log_rel_frequency(name: str, range_tag: str, freq: FrequencyTable) -> float:
    """Stored log relative frequency of the substring of `name` selected by
    `range_tag`, or the table floor when unseen."""
    if range_tag not in LF_RANGES:
        raise ValueError(f"substring range {range_tag!r} not allowed for frequencies "
                         f"(expected one of {LF_RANGES})")
    sub = _extract(logograms(name), range_tag)
    return freq.values.get((range_tag, sub), freq.floor)


@dataclass(frozen=True)
class NameProperties:
    han: bool
    amb: int
    logfreq: dict[str, float] = field(default_factory=dict)


def name_properties(name: str, surnames: frozenset[str], freq: FrequencyTable) -> NameProperties:
    return NameProperties(
        han=han_indicator(name, surnames),
        amb=ambiguity_count(name),
        logfreq={tag: log_rel_frequency(name, tag, freq) for tag in LF_RANGES},
    )
