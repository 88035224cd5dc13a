from __future__ import annotations

import logging
import zlib
from pathlib import Path
from typing import Any, Dict

try:
    import orjson as _json
except Exception:  # pragma: no cover - fallback
    import json as _json  # type: ignore

import numpy as np
from pydantic import ValidationError

from .cubical import BettiCurve
from .errors import ChecksumError, MalformedFileError, VersionMismatchError
from .fileio import PathLike, atomic_write
from .fingerprint import Fingerprint, FingerprintEntry
from .models import FingerprintConfig


logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def _dumps(obj: Any, pretty: bool = False) -> bytes:
    """Pretty output for files, sorted compact output for checksums."""
    if hasattr(_json, "OPT_INDENT_2"):
        option = getattr(_json, "OPT_INDENT_2") if pretty else getattr(_json, "OPT_SORT_KEYS")
        return _json.dumps(obj, option=option)  # type: ignore[call-arg]
    if pretty:
        return _json.dumps(obj, indent=2).encode("utf-8")  # type: ignore[attr-defined]
    return _json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")  # type: ignore[attr-defined]


def _loads(data: bytes) -> Any:
    return _json.loads(data)


def _body(fp: Fingerprint) -> Dict[str, Any]:
    return {
        "version": FORMAT_VERSION,
        "config": fp.config.model_dump(mode="json"),
        "source_duration": fp.source_duration,
        "entries": [
            {"t": e.t, "beta0": e.beta0.samples.tolist(), "beta1": e.beta1.samples.tolist()}
            for e in fp.entries
        ],
    }


CANONICAL_FIELDS = ("version", "config", "source_duration", "entries")


def canonical_bytes(body: Dict[str, Any]) -> bytes:
    """Compact object with the checksummed fields in fixed order; nested keys sorted."""
    parts = [b"\"" + k.encode("ascii") + b"\":" + _dumps(body[k]) for k in CANONICAL_FIELDS]
    return b"{" + b",".join(parts) + b"}"


def checksum(body: Dict[str, Any]) -> int:
    return zlib.crc32(canonical_bytes(body)) & 0xFFFFFFFF


def dumps_fingerprint(fp: Fingerprint) -> bytes:
    body = _body(fp)
    body["crc32"] = checksum(body)
    return _dumps(body, pretty=True)


def loads_fingerprint(data: bytes) -> Fingerprint:
    try:
        obj = _loads(data)
    except Exception as exc:
        raise MalformedFileError(f"not a valid fingerprint document: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedFileError("fingerprint document must be a JSON object")
    if obj.get("version") != FORMAT_VERSION:
        raise VersionMismatchError(
            f"fingerprint format version {obj.get('version')!r} is not supported (expected {FORMAT_VERSION})"
        )
    missing = [k for k in ("config", "source_duration", "entries", "crc32") if k not in obj]
    if missing:
        raise MalformedFileError(f"fingerprint document lacks {', '.join(missing)}")
    try:
        expected = checksum(obj)
    except Exception as exc:
        raise MalformedFileError(f"cannot serialize fingerprint body: {exc}") from exc
    if obj["crc32"] != expected:
        raise ChecksumError(f"checksum mismatch: stored {obj['crc32']!r}, computed {expected}")

    try:
        cfg = FingerprintConfig.model_validate(obj["config"])
        entries = []
        for raw in obj["entries"]:
            b0 = BettiCurve(np.asarray(raw["beta0"], dtype=np.int64), cfg.betti_lo, cfg.betti_hi)
            b1 = BettiCurve(np.asarray(raw["beta1"], dtype=np.int64), cfg.betti_lo, cfg.betti_hi)
            if b0.resolution != cfg.betti_res or b1.resolution != cfg.betti_res:
                raise MalformedFileError(f"entry at t={raw['t']} does not have {cfg.betti_res} samples")
            entries.append(FingerprintEntry(t=float(raw["t"]), beta0=b0, beta1=b1))
        return Fingerprint(entries=tuple(entries), config=cfg, source_duration=float(obj["source_duration"]))
    except MalformedFileError:
        raise
    except (ValidationError, KeyError, TypeError, ValueError) as exc:
        raise MalformedFileError(f"invalid fingerprint content: {exc}") from exc


def write_fingerprint(fp: Fingerprint, path: PathLike) -> None:
    p = atomic_write(path, dumps_fingerprint(fp))
    logger.info("Wrote fingerprint %s (%d entries)", p, len(fp))


def read_fingerprint(path: PathLike) -> Fingerprint:
    p = Path(path)
    fp = loads_fingerprint(p.read_bytes())
    logger.info("Read fingerprint %s (%d entries)", p, len(fp))
    return fp
