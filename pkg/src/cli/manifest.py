"""Manifest CSV: path_a, path_b, label[, obfuscation] with paths relative to the file."""
from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import List, Sequence

from pydantic import ValidationError

from ..core.errors import ManifestError
from ..core.fileio import PathLike
from ..core.models import ManifestRow
from .output import write_csv


logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("path_a", "path_b", "label")
COLUMNS = REQUIRED_COLUMNS + ("obfuscation",)


def read_manifest(path: PathLike) -> List[ManifestRow]:
    """Parse a manifest; returned paths are resolved against its directory."""
    p = Path(path)
    if not p.exists():
        raise ManifestError(f"manifest not found: {p}")
    base = p.parent
    rows: List[ManifestRow] = []
    with p.open("r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in REQUIRED_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ManifestError(f"{p}: missing column(s) {', '.join(missing)}")
        for lineno, raw in enumerate(reader, start=2):
            obf = (raw.get("obfuscation") or "").strip() or None
            try:
                row = ManifestRow(
                    path_a=str(base / raw["path_a"].strip()),
                    path_b=str(base / raw["path_b"].strip()),
                    label=raw["label"].strip(),  # type: ignore[arg-type]
                    obfuscation=obf,
                )
            except ValidationError as exc:
                raise ManifestError(f"{p}:{lineno}: label must be 'positive' or 'negative', got {raw['label']!r}") from exc
            rows.append(row)
    if not rows:
        raise ManifestError(f"{p}: manifest has no rows")
    logger.info("Read manifest %s (%d rows)", p, len(rows))
    return rows


def write_manifest(rows: Sequence[ManifestRow], path: PathLike) -> Path:
    return write_csv(
        path,
        COLUMNS,
        ([r.path_a, r.path_b, r.label, r.obfuscation or ""] for r in rows),
    )
