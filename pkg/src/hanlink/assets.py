"""Locating and loading the bundled demo lookup-table assets."""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

from .encoding import (
    EncodingKind,
    EncodingTable,
    FrequencyTable,
    load_encoding_table,
    load_surnames,
)

ASSET_ENV_VAR = "HANLINK_ASSETS"

_TABLE_FILES = {
    EncodingKind.PY: "pinyin.tsv",
    EncodingKind.FC: "fourcorner.tsv",
    EncodingKind.WB: "wubi98.tsv",
    EncodingKind.RD: "radicals.tsv",
    EncodingKind.RDS: "radicals_struct.tsv",
}


def default_asset_dir() -> Path:
    override = os.environ.get(ASSET_ENV_VAR)
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "assets"


@dataclass
class AssetBundle:
    tables: dict[EncodingKind, EncodingTable]
    surnames: frozenset[str]
    freq: FrequencyTable
    corpus: list[str]
    directory: Path

    def versions(self) -> dict[str, str]:
        out = {}
        for path in sorted(self.directory.iterdir()):
            if path.suffix in (".tsv", ".txt"):
                digest = hashlib.sha256(path.read_bytes()).hexdigest()[:12]
                out[path.name] = digest
        return out


def load_bundle(asset_dir: str | Path | None = None) -> AssetBundle:
    directory = Path(asset_dir) if asset_dir is not None else default_asset_dir()
    if not directory.is_dir():
        raise FileNotFoundError(f"asset directory {directory} does not exist")
    tables = {kind: load_encoding_table(directory / fname, kind)
              for kind, fname in _TABLE_FILES.items()}
    surnames = load_surnames(directory / "surnames.tsv")
    freq = FrequencyTable.load(directory / "freq_demo.tsv")
    corpus = [line for line in (directory / "corpus_names.txt")
              .read_text(encoding="utf-8").splitlines()
              if line and not line.startswith("#")]
    return AssetBundle(tables=tables, surnames=surnames, freq=freq,
                       corpus=corpus, directory=directory)
