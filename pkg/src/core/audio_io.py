from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import soundfile as sf

from .errors import AudioError
from .fileio import PathLike, atomic_write


logger = logging.getLogger(__name__)


# libsndfile subtypes accepted on read: 8/16/24/32-bit integer PCM and 32-bit float
READ_SUBTYPES = {"PCM_U8", "PCM_S8", "PCM_16", "PCM_24", "PCM_32", "FLOAT"}
WRITE_BITS = {16: "PCM_16", 24: "PCM_24"}


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono sample sequence with its sampling rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1:
            raise AudioError(f"Waveform must be mono (1-D), got shape {x.shape}")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise AudioError(f"sample rate must be a positive integer, got {self.sample_rate}")
        if not np.all(np.isfinite(x)):
            raise AudioError("Waveform samples must be finite")
        x = x.copy()
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def scaled(self, gain: float) -> "Waveform":
        return Waveform(self.samples * gain, self.sample_rate)

    def rms(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(np.sqrt(np.mean(self.samples**2)))

    def same_as(self, other: "Waveform") -> bool:
        return self.sample_rate == other.sample_rate and np.array_equal(self.samples, other.samples)


def load_wav(path: PathLike) -> Waveform:
    """Decode a PCM/float WAV file to a mono Waveform scaled to [-1, 1].

    Stereo input is averaged to mono.
    """
    p = Path(path)
    if not p.exists():
        raise AudioError(f"File not found: {p}")
    try:
        info = sf.info(str(p))
    except Exception as exc:  # libsndfile raises its own RuntimeError subclass
        raise AudioError(f"Cannot read audio file {p}: {exc}") from exc
    if info.format != "WAV":
        raise AudioError(f"{p}: unsupported container {info.format!r} (WAV expected)")
    if info.subtype not in READ_SUBTYPES:
        raise AudioError(f"{p}: unsupported codec {info.subtype!r}")
    if info.channels not in (1, 2):
        raise AudioError(f"{p}: {info.channels} channels, only mono or stereo are supported")
    try:
        data, sr = sf.read(str(p), dtype="float64", always_2d=True)
    except Exception as exc:
        raise AudioError(f"Cannot decode {p}: {exc}") from exc
    if data.shape[0] == 0:
        raise AudioError(f"{p}: zero-length audio")
    mono = data.mean(axis=1) if data.shape[1] > 1 else data[:, 0]
    logger.info("Loaded %s (%d samples @ %d Hz, %s)", p, mono.shape[0], sr, info.subtype)
    return Waveform(mono, int(sr))


def _quantize(samples: np.ndarray, bits: int) -> np.ndarray:
    full = float(2 ** (bits - 1))
    q = np.clip(np.round(samples * full), -full, full - 1)
    if bits == 16:
        return q.astype(np.int16)
    # libsndfile takes 24-bit PCM from the upper bits of int32 data
    return q.astype(np.int32) << 8


def save_wav(w: Waveform, path: PathLike, bits: int = 16) -> None:
    """Write a Waveform as integer PCM WAV (16-bit by default, 24-bit optional)."""
    if len(w) == 0:
        raise AudioError("Cannot save an empty Waveform")
    if bits not in WRITE_BITS:
        raise AudioError(f"Unsupported bit depth {bits}; choose one of {sorted(WRITE_BITS)}")
    p = Path(path)
    buf = io.BytesIO()
    try:
        sf.write(buf, _quantize(w.samples, bits), w.sample_rate, subtype=WRITE_BITS[bits], format="WAV")
        atomic_write(p, buf.getvalue())
    except Exception as exc:
        raise AudioError(f"Cannot write {p}: {exc}") from exc
    logger.info("Saved %s (%d samples @ %d Hz, %d-bit)", p, len(w), w.sample_rate, bits)
