from __future__ import annotations

import math
from typing import List, Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from .audio_io import Waveform
from .errors import SynthesisError
from .models import DEFAULT_SAMPLE_RATE
from .obfuscate import pink_noise


class _SynthBase(BaseModel):
    sample_rate: int = Field(DEFAULT_SAMPLE_RATE, gt=0)


class SineSpec(_SynthBase):
    type: Literal["sine"] = "sine"
    freq: float
    duration: float
    amplitude: float = 1.0


class ChirpSpec(_SynthBase):
    type: Literal["chirp"] = "chirp"
    f0: float
    f1: float
    duration: float
    amplitude: float = 1.0


class ToneSequenceSpec(_SynthBase):
    type: Literal["tone_sequence"] = "tone_sequence"
    tones: List[Tuple[float, float]]  # (frequency Hz, duration s)
    amplitude: float = 1.0


class HarmonicMixSpec(_SynthBase):
    type: Literal["harmonic_mix"] = "harmonic_mix"
    fundamental: float
    n_partials: int = Field(gt=0)
    duration: float


class SeededNoiseSpec(_SynthBase):
    type: Literal["seeded_noise"] = "seeded_noise"
    duration: float
    seed: int = 0


SynthSpec = Union[SineSpec, ChirpSpec, ToneSequenceSpec, HarmonicMixSpec, SeededNoiseSpec]


def _n_samples(duration: float, sample_rate: int) -> int:
    if not duration > 0:
        raise SynthesisError(f"duration must be positive, got {duration}")
    n = int(round(duration * sample_rate))
    if n == 0:
        raise SynthesisError(f"duration {duration}s is shorter than one sample at {sample_rate} Hz")
    return n


def _check_freq(freq: float, sample_rate: int) -> None:
    if not freq > 0:
        raise SynthesisError(f"frequency must be positive, got {freq}")
    if freq >= sample_rate / 2:
        raise SynthesisError(f"frequency {freq} Hz is at or above Nyquist ({sample_rate / 2} Hz)")


def sine(freq: float, duration: float, sample_rate: int = DEFAULT_SAMPLE_RATE, amplitude: float = 1.0) -> Waveform:
    _check_freq(freq, sample_rate)
    n = np.arange(_n_samples(duration, sample_rate))
    return Waveform(amplitude * np.sin(2.0 * np.pi * freq * n / sample_rate), sample_rate)


def chirp(f0: float, f1: float, duration: float, sample_rate: int = DEFAULT_SAMPLE_RATE, amplitude: float = 1.0) -> Waveform:
    """Linear frequency sweep from f0 to f1 over the duration."""
    _check_freq(f0, sample_rate)
    _check_freq(f1, sample_rate)
    t = np.arange(_n_samples(duration, sample_rate)) / sample_rate
    phase = 2.0 * np.pi * (f0 * t + (f1 - f0) * t**2 / (2.0 * duration))
    return Waveform(amplitude * np.sin(phase), sample_rate)


def _phase_continuous_tones(tones: Sequence[Tuple[float, float]], sample_rate: int) -> np.ndarray:
    chunks = []
    phase = 0.0
    for freq, dur in tones:
        _check_freq(freq, sample_rate)
        n = _n_samples(dur, sample_rate)
        inc = 2.0 * np.pi * freq / sample_rate
        chunks.append(np.sin(phase + inc * np.arange(n)))
        phase = math.fmod(phase + inc * n, 2.0 * np.pi)
    return np.concatenate(chunks)


def tone_sequence(tones: Sequence[Tuple[float, float]], sample_rate: int = DEFAULT_SAMPLE_RATE, amplitude: float = 1.0) -> Waveform:
    if not tones:
        raise SynthesisError("tone_sequence needs at least one (frequency, duration) pair")
    return Waveform(amplitude * _phase_continuous_tones(tones, sample_rate), sample_rate)


def harmonic_mix(fundamental: float, n_partials: int, duration: float, sample_rate: int = DEFAULT_SAMPLE_RATE) -> Waveform:
    """Partials k*f0 with 1/k amplitudes, scaled so the sum stays within [-1, 1]."""
    if n_partials < 1:
        raise SynthesisError("n_partials must be >= 1")
    _check_freq(fundamental, sample_rate)
    _check_freq(fundamental * n_partials, sample_rate)
    n = np.arange(_n_samples(duration, sample_rate))
    weights = 1.0 / np.arange(1, n_partials + 1)
    out = np.zeros(n.shape[0])
    for k, a in enumerate(weights, start=1):
        out += a * np.sin(2.0 * np.pi * k * fundamental * n / sample_rate)
    return Waveform(out / weights.sum(), sample_rate)


def seeded_noise(duration: float, seed: int = 0, sample_rate: int = DEFAULT_SAMPLE_RATE) -> Waveform:
    rng = np.random.default_rng(seed)
    return Waveform(rng.uniform(-1.0, 1.0, _n_samples(duration, sample_rate)), sample_rate)


def synth(spec: SynthSpec) -> Waveform:
    """Render a synthesis description to a deterministic Waveform."""
    if isinstance(spec, SineSpec):
        return sine(spec.freq, spec.duration, spec.sample_rate, spec.amplitude)
    if isinstance(spec, ChirpSpec):
        return chirp(spec.f0, spec.f1, spec.duration, spec.sample_rate, spec.amplitude)
    if isinstance(spec, ToneSequenceSpec):
        return tone_sequence(spec.tones, spec.sample_rate, spec.amplitude)
    if isinstance(spec, HarmonicMixSpec):
        return harmonic_mix(spec.fundamental, spec.n_partials, spec.duration, spec.sample_rate)
    if isinstance(spec, SeededNoiseSpec):
        return seeded_noise(spec.duration, spec.seed, spec.sample_rate)
    raise SynthesisError(f"Unknown synthesis description: {spec!r}")


# Pentatonic-ish scale degrees (semitones above the song root)
_SCALE = (0, 2, 4, 7, 9, 12, 14, 16)

# drum voice: hit probability per slot, decay (1/s), length (s), amplitude range
_Voice = Tuple[float, float, float, Tuple[float, float]]
_KICK: _Voice = (0.45, 14.0, 0.25, (0.5, 0.8))
_SNARE: _Voice = (0.7, 22.0, 0.18, (0.25, 0.45))
_HAT: _Voice = (0.55, 70.0, 0.06, (0.08, 0.2))

# room tone: pink noise RMS relative to the mix
BED_LEVEL = 0.02


def _hit(rng: np.random.Generator, out: np.ndarray, onset: float, sample_rate: int, voice: _Voice, kind: str) -> None:
    _, decay, length, (a_lo, a_hi) = voice
    i0 = int(onset * sample_rate)
    i1 = min(out.shape[0], i0 + int(length * sample_rate))
    if i1 <= i0:
        return
    tt = np.arange(i1 - i0) / sample_rate
    env = float(rng.uniform(a_lo, a_hi)) * np.exp(-tt * decay)
    if kind == "kick":
        # pitch drops from 110 Hz towards 45 Hz
        freq = 45.0 + 65.0 * np.exp(-tt * 30.0)
        body = np.sin(2.0 * np.pi * np.cumsum(freq) / sample_rate)
    elif kind == "hat":
        body = np.diff(rng.standard_normal(i1 - i0 + 1))
    else:
        body = rng.standard_normal(i1 - i0)
    out[i0:i1] += env * body


def _drums(rng: np.random.Generator, n: int, sample_rate: int, beat: float) -> np.ndarray:
    """Seeded kick/snare/hat pattern on an eighth-note grid, redrawn every slot."""
    out = np.zeros(n)
    duration = n / sample_rate
    slot = 0
    while slot * beat / 2.0 < duration:
        onset = slot * beat / 2.0
        on_beat = slot % 2 == 0
        if on_beat and rng.random() < _KICK[0]:
            _hit(rng, out, onset, sample_rate, _KICK, "kick")
        # snare only on the back beats (2 and 4)
        if slot % 4 == 2 and rng.random() < _SNARE[0]:
            _hit(rng, out, onset, sample_rate, _SNARE, "snare")
        if rng.random() < _HAT[0]:
            _hit(rng, out, onset, sample_rate, _HAT, "hat")
        slot += 1
    return out


def synth_song(seed: int, duration: float = 15.0, sample_rate: int = DEFAULT_SAMPLE_RATE) -> Waveform:
    """A seeded harmonic tone sequence with rhythm.

    Notes start on a beat grid (random tempo per song), carry 3-6 partials with
    an attack/decay envelope, and a sustained bass note changes every bar. A
    drum pattern on eighth notes and a quiet pink room tone sit underneath.
    """
    rng = np.random.default_rng(seed)
    n = _n_samples(duration, sample_rate)
    t = np.arange(n) / sample_rate
    out = np.zeros(n)

    bpm = float(rng.uniform(80.0, 150.0))
    beat = 60.0 / bpm
    root = 110.0 * 2 ** (float(rng.integers(0, 12)) / 12.0)
    n_partials = int(rng.integers(3, 7))
    partial_amps = 1.0 / np.arange(1, n_partials + 1) ** float(rng.uniform(0.8, 1.6))

    onset = 0.0
    while onset < duration:
        length = beat * float(rng.choice([0.5, 1.0, 1.0, 2.0]))
        if rng.random() < 0.85:
            freq = root * 2 * 2 ** (_SCALE[int(rng.integers(0, len(_SCALE)))] / 12.0)
            i0 = int(onset * sample_rate)
            i1 = min(n, int((onset + length) * sample_rate))
            tt = t[i0:i1] - onset
            env = np.minimum(tt / 0.01, 1.0) * np.exp(-tt * float(rng.uniform(2.0, 6.0)))
            note = np.zeros(i1 - i0)
            for k, a in enumerate(partial_amps, start=1):
                if k * freq < sample_rate / 2:
                    note += a * np.sin(2.0 * np.pi * k * freq * tt)
            out[i0:i1] += float(rng.uniform(0.5, 1.0)) * env * note
        onset += length

    bar = 4 * beat
    start = 0.0
    while start < duration:
        freq = root * 2 ** (_SCALE[int(rng.integers(0, 5))] / 12.0)
        i0 = int(start * sample_rate)
        i1 = min(n, int((start + bar) * sample_rate))
        tt = t[i0:i1] - start
        out[i0:i1] += 0.4 * np.sin(2.0 * np.pi * freq * tt) * np.exp(-tt * 0.7)
        start += bar

    out += _drums(rng, n, sample_rate, beat)
    bed = pink_noise(n, rng)
    bed -= bed.mean()
    bed_rms = float(np.sqrt(np.mean(bed**2)))
    if bed_rms > 0:
        out += bed * (BED_LEVEL * float(np.sqrt(np.mean(out**2))) / bed_rms)

    peak = float(np.max(np.abs(out)))
    if peak > 0:
        out *= 0.9 / peak
    return Waveform(out, sample_rate)
