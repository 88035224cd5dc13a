from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .audio_io import Waveform
from .cubical import Barcode, BettiCurve, IntensityImage, betti_curve, upper_star_persistence
from .errors import FingerprintError
from .models import FingerprintConfig
from .spectral import MelSpectrogram, mel_spectrogram


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FingerprintEntry:
    t: float  # window midpoint, seconds
    beta0: BettiCurve
    beta1: BettiCurve

    def same_as(self, other: "FingerprintEntry") -> bool:
        return self.t == other.t and self.beta0.same_as(other.beta0) and self.beta1.same_as(other.beta1)


@dataclass(frozen=True, eq=False)
class Fingerprint:
    entries: Tuple[FingerprintEntry, ...]
    config: FingerprintConfig
    source_duration: float

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def times(self) -> np.ndarray:
        return np.array([e.t for e in self.entries], dtype=np.float64)

    def curves(self, dim: int) -> np.ndarray:
        """Stacked Betti samples, shape (entries, R)."""
        attr = "beta0" if dim == 0 else "beta1"
        return np.stack([getattr(e, attr).samples for e in self.entries])

    def same_as(self, other: "Fingerprint") -> bool:
        return (
            self.config == other.config
            and self.source_duration == other.source_duration
            and len(self) == len(other)
            and all(a.same_as(b) for a, b in zip(self.entries, other.entries))
        )


@dataclass(frozen=True, eq=False)
class WindowTopology:
    t: float
    image: IntensityImage
    barcode: Barcode
    entry: FingerprintEntry


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def window_slices(spec: MelSpectrogram, cfg: Optional[FingerprintConfig] = None) -> List[Tuple[float, IntensityImage]]:
    """Cut the spectrogram into tau-overlapping windows of omega seconds.

    Window i starts at column round(i (1 - tau) omega f_s / h) and spans
    round(omega f_s / h) columns; windows that would overrun are dropped.
    """
    cfg = cfg or FingerprintConfig()
    if spec.duration < cfg.omega:
        raise FingerprintError(f"track lasts {spec.duration:.3f}s, shorter than the {cfg.omega}s window")
    fps = spec.frames_per_second
    width = _round_half_up(cfg.omega * fps)
    if width < 1 or width > spec.n_frames:
        raise FingerprintError(
            f"window of {width} columns does not fit a spectrogram of {spec.n_frames} columns"
        )
    out = []
    i = 0
    while True:
        start = _round_half_up(i * cfg.step_seconds * fps)
        if start + width > spec.n_frames:
            break
        t = i * cfg.step_seconds + cfg.omega / 2.0
        out.append((t, IntensityImage(spec.values[:, start : start + width])))
        i += 1
    return out


def normalize_window(w: IntensityImage) -> IntensityImage:
    """Affine map of the window range onto [0, 1]; constant windows become zeros."""
    v = w.values
    lo = float(v.min())
    hi = float(v.max())
    if hi == lo:
        return IntensityImage(np.zeros_like(v))
    return IntensityImage((v - lo) / (hi - lo))


def _entry(t: float, img: IntensityImage, cfg: FingerprintConfig) -> Tuple[FingerprintEntry, Barcode]:
    bc = upper_star_persistence(normalize_window(img))
    b0 = betti_curve(bc, 0, cfg.betti_lo, cfg.betti_hi, cfg.betti_res)
    b1 = betti_curve(bc, 1, cfg.betti_lo, cfg.betti_hi, cfg.betti_res)
    return FingerprintEntry(t=t, beta0=b0, beta1=b1), bc


def fingerprint_windows(w: Waveform, cfg: Optional[FingerprintConfig] = None) -> List[WindowTopology]:
    """Per-window images, barcodes and fingerprint entries (for plot-data export)."""
    cfg = cfg or FingerprintConfig()
    if w.duration < cfg.omega:
        raise FingerprintError(f"track lasts {w.duration:.3f}s, shorter than the {cfg.omega}s window")
    spec = mel_spectrogram(w, cfg.stft)
    out = []
    for t, img in window_slices(spec, cfg):
        entry, bc = _entry(t, img, cfg)
        out.append(WindowTopology(t=t, image=img, barcode=bc, entry=entry))
    return out


def fingerprint_track(w: Waveform, cfg: Optional[FingerprintConfig] = None) -> Fingerprint:
    """Topological fingerprint: (t_i, beta_0, beta_1) per normalized window."""
    cfg = cfg or FingerprintConfig()
    windows = fingerprint_windows(w, cfg)
    fp = Fingerprint(entries=tuple(x.entry for x in windows), config=cfg, source_duration=w.duration)
    logger.info("Fingerprinted %.2fs of audio into %d windows", w.duration, len(fp))
    return fp


def expected_entry_count(duration: float, cfg: Optional[FingerprintConfig] = None) -> int:
    """k + 1 with k = floor((T - omega) / (omega (1 - tau)))."""
    cfg = cfg or FingerprintConfig()
    return int(math.floor((duration - cfg.omega) / cfg.step_seconds + 1e-9)) + 1
