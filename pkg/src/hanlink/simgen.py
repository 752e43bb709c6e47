"""Synthetic paired record files with ground-truth links.

Names are sampled position-by-position from the character distribution of
a reference corpus (with a STOP symbol controlling length); file B
re-records every individual of file A, corrupting each field
independently at its error rate and the name at the configured rate with
a typed error mechanism. Substitution candidates for replacement errors
are characters whose encodings are highly similar under any of the
phonetic/visual/keystroke encodings.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .compare import levenshtein_sim
from .encoding import EncodingKind, EncodingTable, logograms

# Error-type shares observed among name disagreements (single/multi
# replacement, insertion/deletion, transposition, extra/alternative name,
# decomposition, complex), renormalized to sum to one.
DEFAULT_ERROR_TYPES = {
    "single_replacement": 0.8448,
    "multi_replacement": 0.0808,
    "insertion_deletion": 0.0287,
    "transposition": 0.0236,
    "multi_name": 0.0059,
    "decomposition": 0.0050,
    "complex": 0.0111,
}

# Per-field disagreement rates among true matches (1 - field sensitivity).
DEFAULT_FIELD_ERROR_RATES = {
    "sex": 0.0053,
    "yob": 0.0178,
    "mob": 0.0367,
    "dob": 0.0465,
    "loc": 0.1178,
}

DEFAULT_NAME_ERROR_RATE = 0.0345

DEFAULT_CARDINALITIES = {"sex": 2, "yob": 80, "mob": 12, "dob": 31, "loc": 200}

SIM_FIELDS = ("sex", "yob", "mob", "dob", "loc")

STOP = "\x00"


@dataclass
class SimConfig:
    n_records: int = 10_000
    name_error_rate: float = DEFAULT_NAME_ERROR_RATE
    fields: tuple[str, ...] = SIM_FIELDS
    field_error_rates: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_FIELD_ERROR_RATES))
    error_type_probs: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_ERROR_TYPES))
    cardinalities: dict[str, int] = field(
        default_factory=lambda: dict(DEFAULT_CARDINALITIES))
    seed: int = 0

    def __post_init__(self):
        unknown = set(self.fields) - set(SIM_FIELDS)
        if unknown:
            raise ValueError(f"unknown fields {sorted(unknown)}")
        rates = [self.name_error_rate] + [self.field_error_rates[f] for f in self.fields]
        if any(not 0.0 <= r <= 1.0 for r in rates):
            raise ValueError("error rates must lie in [0, 1]")
        total = sum(self.error_type_probs.values())
        if total <= 0:
            raise ValueError("error-type distribution must have positive mass")
        if abs(total - 1.0) > 1e-6:
            self.error_type_probs = {k: v / total for k, v in self.error_type_probs.items()}
        if set(self.error_type_probs) != set(DEFAULT_ERROR_TYPES):
            raise ValueError("error-type distribution must cover exactly the "
                             f"types {sorted(DEFAULT_ERROR_TYPES)}")

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        kwargs = {}
        for key in ("n_records", "name_error_rate", "seed"):
            if key in d:
                kwargs[key] = d[key]
        if "fields" in d:
            kwargs["fields"] = tuple(d["fields"])
        for key in ("field_error_rates", "error_type_probs", "cardinalities"):
            if key in d:
                base = {"field_error_rates": DEFAULT_FIELD_ERROR_RATES,
                        "error_type_probs": DEFAULT_ERROR_TYPES,
                        "cardinalities": DEFAULT_CARDINALITIES}[key]
                merged = dict(base)
                merged.update(d[key])
                kwargs[key] = merged
        return cls(**kwargs)


@dataclass
class PositionalNameModel:
    """Per-position character distributions (with STOP) plus substitution
    and decomposition candidates for corruption."""
    position_chars: list[tuple[str, ...]]   # chars available at position i (0-based)
    position_probs: list[np.ndarray]
    substitutions: dict[str, tuple[str, ...]]
    decompositions: dict[str, str]
    inventory: tuple[str, ...]
    max_len: int


def _encoding_code(char: str, table: EncodingTable) -> str:
    code = table.lookup(char)
    return code if code is not None else char


def build_name_model(corpus: list[str],
                     tables: dict[EncodingKind, EncodingTable],
                     sim_threshold: float = 0.8) -> PositionalNameModel:
    """Positional character frequencies (add-one smoothed) and candidate
    substitutions: characters whose codes reach `sim_threshold` Levenshtein
    similarity under any of PY/FC/WB/RDS."""
    names = [logograms(n) for n in corpus if n.strip()]
    if not names:
        raise ValueError("name corpus is empty")
    max_len = max(len(n) for n in names)
    length_counts = np.bincount([len(n) for n in names], minlength=max_len + 1)

    position_chars: list[np.ndarray] = []
    position_probs: list[np.ndarray] = []
    for pos in range(max_len):
        counts: dict[str, int] = {}
        for name in names:
            if len(name) > pos:
                counts[name[pos]] = counts.get(name[pos], 0) + 1
        chars = sorted(counts)
        weights = np.array([counts[c] + 1 for c in chars], dtype=float)
        if pos >= 1:
            chars.append(STOP)
            weights = np.append(weights, length_counts[pos] + 1)
        position_chars.append(tuple(chars))
        position_probs.append(weights / weights.sum())

    inventory = tuple(sorted({c for name in names for c in name}))
    enc_kinds = (EncodingKind.PY, EncodingKind.FC, EncodingKind.WB, EncodingKind.RDS)
    codes = {kind: {c: _encoding_code(c, tables[kind]) for c in inventory}
             for kind in enc_kinds if kind in tables}
    substitutions: dict[str, list[str]] = {c: [] for c in inventory}
    for i, c1 in enumerate(inventory):
        for c2 in inventory[i + 1:]:
            for kind, table_codes in codes.items():
                a, b = table_codes[c1], table_codes[c2]
                # sim >= t requires E <= (1-t)*maxlen and E >= length gap
                if abs(len(a) - len(b)) > (1.0 - sim_threshold) * max(len(a), len(b)):
                    continue
                if levenshtein_sim(a, b) >= sim_threshold:
                    substitutions[c1].append(c2)
                    substitutions[c2].append(c1)
                    break
    decompositions: dict[str, str] = {}
    rd = tables.get(EncodingKind.RD)
    if rd is not None:
        for c, code in rd.entries.items():
            leaves = [t for t in code.split(" ") if t]
            if len(leaves) >= 2:
                decompositions[c] = "".join(leaves)
    return PositionalNameModel(
        position_chars=position_chars,
        position_probs=position_probs,
        substitutions={c: tuple(v) for c, v in substitutions.items()},
        decompositions=decompositions,
        inventory=inventory,
        max_len=max_len,
    )


def sample_name(model: PositionalNameModel, rng: np.random.Generator) -> str:
    chars = []
    for pos in range(model.max_len):
        pick = model.position_chars[pos][rng.choice(len(model.position_probs[pos]),
                                                    p=model.position_probs[pos])]
        if pick == STOP:
            break
        chars.append(pick)
    return "".join(chars)


def _random_other_char(char: str, model: PositionalNameModel,
                       rng: np.random.Generator) -> str:
    candidates = [c for c in model.substitutions.get(char, ()) if c != char]
    if not candidates:
        candidates = [c for c in model.inventory if c != char]
    return candidates[rng.integers(len(candidates))]


def _replace_at(chars: list[str], pos: int, model, rng) -> list[str]:
    out = list(chars)
    out[pos] = _random_other_char(chars[pos], model, rng)
    return out


def _single_replacement(chars, model, rng):
    return _replace_at(chars, int(rng.integers(len(chars))), model, rng)


def _multi_replacement(chars, model, rng):
    k = min(len(chars), 2)
    positions = rng.choice(len(chars), size=k, replace=False)
    out = list(chars)
    for pos in positions:
        out = _replace_at(out, int(pos), model, rng)
    return out


def _insertion_deletion(chars, model, rng):
    if len(chars) < 2 or rng.random() < 0.5:
        pos = int(rng.integers(len(chars) + 1))
        extra = model.inventory[rng.integers(len(model.inventory))]
        return chars[:pos] + [extra] + chars[pos:]
    pos = int(rng.integers(len(chars)))
    return chars[:pos] + chars[pos + 1:]


def _transposition(chars, model, rng):
    swappable = [i for i in range(len(chars) - 1) if chars[i] != chars[i + 1]]
    if not swappable:
        return None
    i = swappable[rng.integers(len(swappable))]
    out = list(chars)
    out[i], out[i + 1] = out[i + 1], out[i]
    return out


def _decomposition(chars, model, rng):
    spots = [i for i, c in enumerate(chars) if c in model.decompositions]
    if not spots:
        return None
    i = spots[rng.integers(len(spots))]
    return chars[:i] + list(model.decompositions[chars[i]]) + chars[i + 1:]


def _multi_name(chars, model, rng):
    variant = _single_replacement(chars, model, rng)
    return chars + ["("] + variant + [")"]


ERROR_TYPE_ORDER = tuple(DEFAULT_ERROR_TYPES)


def corrupt_name(name: str, error_type: str, model: PositionalNameModel,
                 rng: np.random.Generator) -> tuple[str, bool]:
    """Apply one error mechanism to `name`; returns (variant, fell_back).

    Mechanisms infeasible for the given name (transposition or
    decomposition with nothing to act on) fall back to single replacement
    and set the flag. Output is guaranteed to differ from the input.
    """
    chars = logograms(name)
    if not chars:
        raise ValueError("cannot corrupt an empty name")
    fallback = False

    def apply(etype, cs):
        nonlocal fallback
        if etype == "single_replacement":
            return _single_replacement(cs, model, rng)
        if etype == "multi_replacement":
            if len(cs) < 2:
                fallback = True
                return _single_replacement(cs, model, rng)
            return _multi_replacement(cs, model, rng)
        if etype == "insertion_deletion":
            return _insertion_deletion(cs, model, rng)
        if etype == "transposition":
            out = _transposition(cs, model, rng) if len(cs) >= 2 else None
            if out is None:
                fallback = True
                return _single_replacement(cs, model, rng)
            return out
        if etype == "decomposition":
            out = _decomposition(cs, model, rng) if len(cs) >= 2 else None
            if out is None:
                fallback = True
                return _single_replacement(cs, model, rng)
            return out
        if etype == "multi_name":
            return _multi_name(cs, model, rng)
        if etype == "complex":
            simple = ("single_replacement", "insertion_deletion", "transposition")
            out = list(cs)
            for _ in range(2):
                out = apply(simple[rng.integers(len(simple))], out)
            return out
        raise ValueError(f"unknown error type {error_type!r}")

    for _ in range(8):
        variant = apply(error_type, chars)
        if variant != chars:
            return "".join(variant), fallback
    fallback = True
    return "".join(_single_replacement(chars, model, rng)), fallback


def _sample_field_values(fld: str, n: int, card: int, rng: np.random.Generator) -> np.ndarray:
    if fld == "sex":
        return rng.integers(1, card + 1, size=n)
    if fld == "loc":
        weights = 1.0 / np.arange(1, card + 1)  # Zipf-ish location sizes
        weights /= weights.sum()
        return rng.choice(card, size=n, p=weights) + 1
    return rng.integers(1, card + 1, size=n)


def _field_value_str(fld: str, value: int) -> str:
    if fld == "yob":
        return str(1939 + value)
    if fld == "loc":
        return f"L{value:03d}"
    return str(value)


def _redraw_different(fld: str, current: int, card: int, rng: np.random.Generator) -> int:
    for _ in range(64):
        new = int(_sample_field_values(fld, 1, card, rng)[0])
        if new != current:
            return new
    return current % card + 1


@dataclass
class SimResult:
    records_a: dict[str, list[str]]
    records_b: dict[str, list[str]]
    truth: np.ndarray                 # (n, 2) row indices into A and B
    requested_error_types: list[str]  # per corrupted name, in A order
    fallback_count: int


def generate_pair_files(cfg: SimConfig, model: PositionalNameModel) -> SimResult:
    """Sample a base population and its corrupted re-recording.

    File B contains the same individuals in shuffled order; truth maps A
    row indices to B row indices. Fixed seed => byte-identical output.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    n = cfg.n_records
    names = [sample_name(model, rng) for _ in range(n)]
    base_values = {f: _sample_field_values(f, n, cfg.cardinalities[f], rng)
                   for f in cfg.fields}

    type_names = ERROR_TYPE_ORDER
    type_probs = np.array([cfg.error_type_probs[t] for t in type_names])

    names_b = []
    requested: list[str] = []
    fallbacks = 0
    values_b = {f: base_values[f].copy() for f in cfg.fields}
    for i in range(n):
        if rng.random() < cfg.name_error_rate:
            etype = type_names[rng.choice(len(type_names), p=type_probs)]
            requested.append(etype)
            variant, fell_back = corrupt_name(names[i], etype, model, rng)
            fallbacks += int(fell_back)
            names_b.append(variant)
        else:
            names_b.append(names[i])
        for f in cfg.fields:
            if rng.random() < cfg.field_error_rates[f]:
                values_b[f][i] = _redraw_different(f, int(values_b[f][i]),
                                                   cfg.cardinalities[f], rng)

    perm = rng.permutation(n)
    truth = np.column_stack([np.arange(n), np.empty(n, dtype=np.int64)])
    position = np.empty(n, dtype=np.int64)
    position[perm] = np.arange(n)
    truth[:, 1] = position

    def as_records(names_list, values) -> dict[str, list[str]]:
        recs = {"name": list(names_list)}
        for f in SIM_FIELDS:
            if f in cfg.fields:
                recs[f] = [_field_value_str(f, int(v)) for v in values[f]]
            else:
                recs[f] = [""] * len(names_list)
        return recs

    records_a = as_records(names, base_values)
    shuffled_names_b = [names_b[i] for i in perm]
    shuffled_values_b = {f: values_b[f][perm] for f in cfg.fields}
    records_b = as_records(shuffled_names_b, shuffled_values_b)
    return SimResult(records_a=records_a, records_b=records_b, truth=truth,
                     requested_error_types=requested, fallback_count=fallbacks)


def write_truth(path: str | Path, truth: np.ndarray) -> None:
    lines = ["id_a,id_b"] + [f"{int(a)},{int(b)}" for a, b in truth]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_truth(path: str | Path) -> np.ndarray:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "id_a,id_b":
        raise ValueError(f"truth file {path} must have header id_a,id_b")
    rows = [tuple(int(x) for x in line.split(",")) for line in lines[1:] if line]
    return np.array(rows, dtype=np.int64).reshape(-1, 2)
