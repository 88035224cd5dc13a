#!/usr/bin/env python3
"""
Topological audio fingerprinting (mel-spectrogram -> cubical persistence -> Betti curves).

Quickstart
----------
   $ python topoprint.py fingerprint song.wav -o song.fp.json
   $ python topoprint.py obfuscate song.wav --kind tempo_shift --degree 1.1 -o fast.wav
   $ python topoprint.py compare song.fp.json fast.wav --dump-pairs pairs.csv
   $ python topoprint.py dataset data/synthetic --songs 20
   $ python topoprint.py evaluate data/synthetic/manifest.csv --out-dir results

Exit codes: 0 success (compare: positive), 1 compare negative, 2 failure.
"""
from __future__ import annotations

import sys

from src.cli.app import main


if __name__ == "__main__":
    sys.exit(main())
