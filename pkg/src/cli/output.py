from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Any, Iterable, Sequence

try:
    import orjson as _json
except Exception:  # pragma: no cover - fallback
    import json as _json  # type: ignore

from ..core.fileio import PathLike, atomic_write


def dumps_json(obj: Any) -> bytes:
    if hasattr(_json, "OPT_INDENT_2"):
        return _json.dumps(obj, option=getattr(_json, "OPT_INDENT_2") | getattr(_json, "OPT_SERIALIZE_NUMPY"))  # type: ignore[call-arg]
    return _json.dumps(obj, indent=2).encode("utf-8")  # type: ignore[attr-defined]


def write_json(path: PathLike, obj: Any) -> Path:
    return atomic_write(path, dumps_json(obj) + b"\n")


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return atomic_write(path, buf.getvalue().encode("utf-8"))
