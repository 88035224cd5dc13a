"""Software stand-ins for the obfuscation taxonomy.

Rigid kinds (noise, reverb, filters) keep the time and frequency axes;
topological kinds (tempo and pitch shift) distort them.
"""
from __future__ import annotations

import logging
from typing import Callable, Dict, Tuple

import numpy as np
from pydantic import ValidationError
from scipy import signal

from .audio_io import Waveform
from .errors import ObfuscationError
from .models import ObfuscationKind, ObfuscationSpec


logger = logging.getLogger(__name__)

# Published degree grid per kind
PUBLISHED_DEGREES: Dict[str, Tuple[float, ...]] = {
    "low_pass": (200.0, 400.0, 800.0, 1600.0, 2000.0),
    "high_pass": (50.0, 100.0, 200.0, 400.0, 800.0, 1200.0),
    "white_noise": (0.05, 0.1, 0.2, 0.4),
    "pink_noise": (0.05, 0.1, 0.2, 0.4),
    "reverb": (25.0, 50.0, 75.0, 100.0),
    "pitch_shift": (-8.0, -4.0, -2.0, -1.0, 1.0, 2.0, 4.0, 8.0),
    "tempo_shift": (0.5, 0.8, 1.1, 1.2, 1.5, 2.0),
}

PINK_ROWS = 16

# Schroeder reverberator: delays in seconds, feedback gains
COMB_DELAYS = (0.0297, 0.0371, 0.0411, 0.0437)
COMB_GAINS = (0.805, 0.827, 0.783, 0.764)
ALLPASS_DELAYS = (0.0050, 0.0017)
ALLPASS_GAIN = 0.7

FILTER_ORDER = 2

# phase vocoder analysis
STRETCH_N_FFT = 2048
STRETCH_HOP = STRETCH_N_FFT // 4

# windowed-sinc resampler
SINC_TAPS = 32
KAISER_BETA = 8.0
_RESAMPLE_CHUNK = 4096


def parse_obfuscation(text: str) -> ObfuscationSpec:
    """Parse the "kind:degree" form used in manifests and group labels."""
    kind, sep, degree = text.strip().partition(":")
    if not sep:
        raise ObfuscationError(f"obfuscation descriptor {text!r} is not of the form kind:degree")
    try:
        return ObfuscationSpec(kind=kind, degree=float(degree))  # type: ignore[arg-type]
    except (ValidationError, ValueError) as exc:
        raise ObfuscationError(f"invalid obfuscation {text!r}: {exc}") from exc


def _scaled_noise(noise: np.ndarray, x: np.ndarray, degree: float) -> np.ndarray:
    """Zero-mean noise with RMS = degree * RMS(x)."""
    noise = noise - noise.mean()
    n_rms = float(np.sqrt(np.mean(noise**2)))
    x_rms = float(np.sqrt(np.mean(x**2)))
    if n_rms == 0.0:
        return np.zeros_like(x)
    return noise * (degree * x_rms / n_rms)


def white_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(n)


def pink_noise(n: int, rng: np.random.Generator, rows: int = PINK_ROWS) -> np.ndarray:
    """Voss-McCartney: row r holds a random value for 2**r samples; rows are summed."""
    out = np.zeros(n)
    for r in range(rows):
        block = 1 << r
        values = rng.standard_normal(n // block + 1)
        out += np.repeat(values, block)[:n]
    return out


def _add_noise(w: Waveform, degree: float, seed: int, kind: str) -> Waveform:
    if degree == 0:
        return Waveform(w.samples, w.sample_rate)
    rng = np.random.default_rng(seed)
    raw = white_noise(len(w), rng) if kind == "white_noise" else pink_noise(len(w), rng)
    return Waveform(w.samples + _scaled_noise(raw, w.samples, degree), w.sample_rate)


def _comb(x: np.ndarray, delay: int, gain: float) -> np.ndarray:
    b = np.zeros(delay + 1)
    b[delay] = 1.0
    a = np.zeros(delay + 1)
    a[0], a[delay] = 1.0, -gain
    return signal.lfilter(b, a, x)


def _allpass(x: np.ndarray, delay: int, gain: float) -> np.ndarray:
    b = np.zeros(delay + 1)
    b[0], b[delay] = -gain, 1.0
    a = np.zeros(delay + 1)
    a[0], a[delay] = 1.0, -gain
    return signal.lfilter(b, a, x)


def schroeder_reverb(x: np.ndarray, sample_rate: int) -> np.ndarray:
    """Wet signal: 4 parallel combs then 2 series all-pass, RMS matched to the input."""
    wet = np.zeros_like(x)
    for d, g in zip(COMB_DELAYS, COMB_GAINS):
        wet += _comb(x, max(1, round(d * sample_rate)), g)
    wet /= len(COMB_DELAYS)
    for d in ALLPASS_DELAYS:
        wet = _allpass(wet, max(1, round(d * sample_rate)), ALLPASS_GAIN)
    w_rms = float(np.sqrt(np.mean(wet**2)))
    x_rms = float(np.sqrt(np.mean(x**2)))
    if w_rms > 0:
        wet *= x_rms / w_rms
    return wet


def _reverb(w: Waveform, degree: float) -> Waveform:
    mix = degree / 100.0
    if mix == 0:
        return Waveform(w.samples, w.sample_rate)
    wet = schroeder_reverb(w.samples, w.sample_rate)
    return Waveform((1.0 - mix) * w.samples + mix * wet, w.sample_rate)


def _butterworth(w: Waveform, cutoff: float, btype: str) -> Waveform:
    nyquist = w.sample_rate / 2.0
    if not 0 < cutoff < nyquist:
        raise ObfuscationError(f"cutoff {cutoff} Hz must lie strictly between 0 and Nyquist ({nyquist} Hz)")
    sos = signal.butter(FILTER_ORDER, cutoff, btype=btype, fs=w.sample_rate, output="sos")
    return Waveform(signal.sosfilt(sos, w.samples), w.sample_rate)


def _stft(x: np.ndarray, window: np.ndarray, hop: int) -> np.ndarray:
    n_fft = window.shape[0]
    padded = np.pad(x, n_fft // 2, mode="reflect" if x.shape[0] > n_fft // 2 else "constant")
    n_frames = 1 + (padded.shape[0] - n_fft) // hop
    frames = np.lib.stride_tricks.sliding_window_view(padded, n_fft)[::hop][:n_frames]
    return np.fft.rfft(frames * window, axis=1).T


def _istft(d: np.ndarray, window: np.ndarray, hop: int, length: int) -> np.ndarray:
    n_fft = window.shape[0]
    n_frames = d.shape[1]
    total = n_fft + hop * (n_frames - 1)
    out = np.zeros(total)
    norm = np.zeros(total)
    frames = np.fft.irfft(d, n=n_fft, axis=0).T * window
    wsq = window**2
    for t in range(n_frames):
        s = t * hop
        out[s : s + n_fft] += frames[t]
        norm[s : s + n_fft] += wsq
    nz = norm > 1e-10
    out[nz] /= norm[nz]
    out = out[n_fft // 2 :]
    if out.shape[0] >= length:
        return out[:length]
    return np.pad(out, (0, length - out.shape[0]))


def phase_vocoder(d: np.ndarray, rate: float, hop: int) -> np.ndarray:
    """Resample STFT columns at steps of `rate`, propagating phase per bin."""
    n_bins, n_frames = d.shape
    steps = np.arange(0, n_frames, rate, dtype=np.float64)
    out = np.zeros((n_bins, steps.shape[0]), dtype=np.complex128)
    advance = np.linspace(0, np.pi * hop, n_bins)
    phase = np.angle(d[:, 0])
    d = np.pad(d, [(0, 0), (0, 2)], mode="constant")
    for t, step in enumerate(steps):
        cols = d[:, int(step) : int(step) + 2]
        alpha = step % 1.0
        mag = (1.0 - alpha) * np.abs(cols[:, 0]) + alpha * np.abs(cols[:, 1])
        out[:, t] = mag * np.exp(1j * phase)
        dphase = np.angle(cols[:, 1]) - np.angle(cols[:, 0]) - advance
        dphase -= 2.0 * np.pi * np.round(dphase / (2.0 * np.pi))
        phase += advance + dphase
    return out


def time_stretch(w: Waveform, rate: float) -> Waveform:
    """Play back `rate` times faster; output length round(N / rate)."""
    if rate <= 0:
        raise ObfuscationError(f"stretch rate must be > 0, got {rate}")
    if len(w) == 0:
        raise ObfuscationError("cannot stretch an empty waveform")
    length = max(1, int(round(len(w) / rate)))
    if rate == 1.0:
        return Waveform(w.samples, w.sample_rate)
    window = signal.get_window("hann", STRETCH_N_FFT)
    d = _stft(w.samples, window, STRETCH_HOP)
    stretched = phase_vocoder(d, rate, STRETCH_HOP)
    y = _istft(stretched, window, STRETCH_HOP, length)
    logger.debug("time-stretched %d -> %d samples (rate %.4g)", len(w), length, rate)
    return Waveform(y, w.sample_rate)


def _kaiser(u: np.ndarray, half_width: float) -> np.ndarray:
    r = np.clip(u / half_width, -1.0, 1.0)
    return np.i0(KAISER_BETA * np.sqrt(1.0 - r * r)) / np.i0(KAISER_BETA)


def _resample_ratio(x: np.ndarray, ratio: float, length: int) -> np.ndarray:
    """Windowed-sinc interpolation: output m samples the input at m / ratio."""
    cutoff = min(1.0, ratio)
    offsets = np.arange(-SINC_TAPS + 1, SINC_TAPS + 1)
    half_width = float(SINC_TAPS)
    n_in = x.shape[0]
    out = np.empty(length)
    for lo in range(0, length, _RESAMPLE_CHUNK):
        m = np.arange(lo, min(length, lo + _RESAMPLE_CHUNK))
        t = m / ratio
        idx = np.floor(t).astype(np.int64)[:, None] + offsets[None, :]
        u = t[:, None] - idx
        weights = cutoff * np.sinc(cutoff * u) * _kaiser(u, half_width)
        valid = (idx >= 0) & (idx < n_in)
        taps = np.where(valid, x[np.clip(idx, 0, n_in - 1)], 0.0)
        out[m] = np.sum(taps * weights, axis=1)
    return out


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Kaiser windowed-sinc resampling to a new sampling rate."""
    if target_rate <= 0 or int(target_rate) != target_rate:
        raise ObfuscationError(f"target rate must be a positive integer, got {target_rate}")
    if len(w) == 0:
        raise ObfuscationError("cannot resample an empty waveform")
    if target_rate == w.sample_rate:
        return Waveform(w.samples, w.sample_rate)
    ratio = target_rate / w.sample_rate
    length = max(1, int(round(len(w) * ratio)))
    return Waveform(_resample_ratio(w.samples, ratio, length), int(target_rate))


def pitch_shift(w: Waveform, semitones: float) -> Waveform:
    """Stretch by 2**(s/12), then resample back to the original length."""
    if len(w) == 0:
        raise ObfuscationError("cannot pitch-shift an empty waveform")
    if semitones == 0:
        return Waveform(w.samples, w.sample_rate)
    factor = 2.0 ** (semitones / 12.0)
    stretched = time_stretch(w, 1.0 / factor)
    y = _resample_ratio(stretched.samples, 1.0 / factor, len(w))
    return Waveform(y, w.sample_rate)


def obfuscate(w: Waveform, spec: ObfuscationSpec, seed: int = 0) -> Waveform:
    """Apply one obfuscation; deterministic given (w, spec, seed)."""
    if len(w) == 0:
        raise ObfuscationError("cannot obfuscate an empty waveform")
    handlers: Dict[ObfuscationKind, Callable[[], Waveform]] = {
        "white_noise": lambda: _add_noise(w, spec.degree, seed, "white_noise"),
        "pink_noise": lambda: _add_noise(w, spec.degree, seed, "pink_noise"),
        "reverb": lambda: _reverb(w, spec.degree),
        "high_pass": lambda: _butterworth(w, spec.degree, "highpass"),
        "low_pass": lambda: _butterworth(w, spec.degree, "lowpass"),
        "tempo_shift": lambda: time_stretch(w, spec.degree),
        "pitch_shift": lambda: pitch_shift(w, spec.degree),
    }
    out = handlers[spec.kind]()
    logger.info("Applied %s to %.2fs of audio (-> %.2fs)", spec.descriptor, w.duration, out.duration)
    return out


def degree_grid(kind: str) -> Tuple[float, ...]:
    if kind not in PUBLISHED_DEGREES:
        raise ObfuscationError(f"unknown obfuscation kind {kind!r}")
    return PUBLISHED_DEGREES[kind]
