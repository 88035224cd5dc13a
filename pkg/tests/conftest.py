from __future__ import annotations

import numpy as np
import pytest

from src.core.models import FingerprintConfig, StftConfig
from src.core.synth import synth_song, tone_sequence


# Small front-end for tests that only need the pipeline shape, not full-size geometry.
FAST_RATE = 8000
FAST_STFT = StftConfig(n_fft=256, hop=64, n_mels=32)
FAST_CFG = FingerprintConfig(stft=FAST_STFT, betti_res=64)

# Worked co-filtration example, rows top to bottom.
WORKED_IMAGE = np.array(
    [
        [16, 19, 20, 17, 18],
        [15, 14, 4, 13, 12],
        [11, 3, 2, 0, 10],
        [9, 8, 4, 8, 7],
    ],
    dtype=np.float64,
)


@pytest.fixture
def fast_cfg() -> FingerprintConfig:
    return FAST_CFG


@pytest.fixture
def short_song():
    return synth_song(7, duration=4.0, sample_rate=FAST_RATE)


@pytest.fixture
def melody():
    notes = [(261.63, 0.5), (329.63, 0.5), (392.0, 0.5), (523.25, 0.5), (440.0, 0.5), (349.23, 0.5)]
    return tone_sequence(notes, sample_rate=FAST_RATE, amplitude=0.8)
