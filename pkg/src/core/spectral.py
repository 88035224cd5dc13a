"""STFT, mel filterbank and dB scaling for the fingerprint front-end."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio_io import Waveform
from .errors import SpectralError
from .models import StftConfig


logger = logging.getLogger(__name__)

# power floor for the dB conversion; silence is referenced against this
AMIN = 1e-10

# integration points per FFT bin interval when building the mel filterbank
FILTER_OVERSAMPLE = 32


@dataclass(frozen=True, eq=False)
class MelSpectrogram:
    values: np.ndarray  # (n_mels, n_frames) dB, low -> high frequency rows
    frame_times: np.ndarray  # seconds, one per column
    config: StftConfig
    sample_rate: int
    n_samples: int

    @property
    def n_mels(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[1])

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    @property
    def frames_per_second(self) -> float:
        return self.sample_rate / self.config.hop


def hann_window(n_fft: int) -> np.ndarray:
    """Symmetric Hann window w_k = (1 - cos(2 pi k / (N - 1))) / 2."""
    if n_fft < 2:
        raise SpectralError(f"Hann window needs at least 2 points, got {n_fft}")
    k = np.arange(n_fft)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * k / (n_fft - 1)))


def frame_count(n_samples: int, hop: int) -> int:
    return n_samples // hop + 1


def _frames(x: np.ndarray, cfg: StftConfig) -> np.ndarray:
    pad = cfg.n_fft // 2
    padded = np.pad(x, (pad, cfg.n_fft - pad), mode="reflect")
    n_frames = frame_count(x.shape[0], cfg.hop)
    return sliding_window_view(padded, cfg.n_fft)[:: cfg.hop][:n_frames]


def _stft(w: Waveform, cfg: StftConfig) -> np.ndarray:
    if len(w) == 0:
        raise SpectralError("Cannot transform an empty waveform")
    frames = _frames(w.samples, cfg) * hann_window(cfg.n_fft)
    return np.fft.rfft(frames, n=cfg.n_fft, axis=1).T


def stft_magnitude(w: Waveform, cfg: Optional[StftConfig] = None) -> np.ndarray:
    """|STFT| with n_fft/2 + 1 rows and floor(N/hop) + 1 centered columns."""
    cfg = cfg or StftConfig()
    return np.abs(_stft(w, cfg))


def power_spectrogram(w: Waveform, cfg: Optional[StftConfig] = None) -> np.ndarray:
    cfg = cfg or StftConfig()
    spec = _stft(w, cfg)
    return spec.real**2 + spec.imag**2


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def _triangles(freqs: np.ndarray, edges: np.ndarray) -> np.ndarray:
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs[None, :] - lower) / (center - lower)
    falling = (upper - freqs[None, :]) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def mel_filterbank(sample_rate: int, cfg: Optional[StftConfig] = None) -> np.ndarray:
    """Triangular unit-peak filters, edges uniformly spaced on the mel scale.

    A filter reads the power spectrum linearly interpolated between bin
    centres: weight k is the integral of the triangle against the hat function
    of bin k, in units of one bin. Filters narrower than the bin spacing (the
    low end at the default geometry) therefore follow the interpolated
    spectrum instead of landing on or between bin centres. Returns an
    (n_mels, n_fft/2 + 1) matrix.
    """
    cfg = cfg or StftConfig()
    f_min, f_max = cfg.band(sample_rate)
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), cfg.n_mels + 2))
    n_bins = cfg.n_fft // 2 + 1
    df = sample_rate / cfg.n_fft

    # midpoint rule: FILTER_OVERSAMPLE points per bin interval, alpha = position inside it
    alpha = (np.arange(FILTER_OVERSAMPLE) + 0.5) / FILTER_OVERSAMPLE
    fine = ((np.arange(n_bins - 1)[:, None] + alpha[None, :]) * df).ravel()
    tri = _triangles(fine, edges).reshape(cfg.n_mels, n_bins - 1, FILTER_OVERSAMPLE)
    fb = np.zeros((cfg.n_mels, n_bins))
    fb[:, :-1] += tri @ (1.0 - alpha)
    fb[:, 1:] += tri @ alpha
    fb /= FILTER_OVERSAMPLE

    narrow = int(np.count_nonzero(edges[2:] - edges[:-2] < 2.0 * df))
    if narrow:
        logger.debug("%d of %d mel filters are narrower than two FFT bins (n_fft=%d)", narrow, cfg.n_mels, cfg.n_fft)
    return fb


def power_to_db(power: np.ndarray, db_floor: float) -> np.ndarray:
    """10 log10(p / max p), floored at -db_floor; silence maps to -db_floor."""
    ref = max(float(np.max(power)) if power.size else 0.0, AMIN)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power / ref)
    return np.maximum(db, -db_floor)


def mel_spectrogram(w: Waveform, cfg: Optional[StftConfig] = None) -> MelSpectrogram:
    cfg = cfg or StftConfig()
    if len(w) < cfg.n_fft:
        logger.debug("Waveform (%d samples) shorter than n_fft=%d; relying on padding", len(w), cfg.n_fft)
    power = power_spectrogram(w, cfg)
    mel = mel_filterbank(w.sample_rate, cfg) @ power
    values = power_to_db(mel, cfg.db_floor)
    values.setflags(write=False)
    times = np.arange(values.shape[1]) * cfg.hop / w.sample_rate
    return MelSpectrogram(
        values=values,
        frame_times=times,
        config=cfg,
        sample_rate=w.sample_rate,
        n_samples=len(w),
    )
