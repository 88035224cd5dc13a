"""Brute-force references, written independently of the production code."""
from __future__ import annotations

import itertools
from typing import Dict, List, Sequence, Tuple

import numpy as np


def upper_star_bruteforce(values: np.ndarray) -> Dict[int, List[Tuple[float, float]]]:
    """Dense F2 reduction of the upper-star co-filtration of the vertex construction.

    Cubes enter at the minimum of their vertex values; cells are ordered by
    decreasing value, then increasing dimension. No clearing, no union-find.
    """
    h, w = values.shape
    cells = []  # (value, dim, faces as keys), keyed by their list position
    key = {}

    def add(k, dim, faces, val):
        key[k] = len(cells)
        cells.append((val, dim, faces))

    for i in range(h):
        for j in range(w):
            add(("v", i, j), 0, (), float(values[i, j]))
    for i in range(h):
        for j in range(w - 1):
            add(("h", i, j), 1, (("v", i, j), ("v", i, j + 1)), float(min(values[i, j], values[i, j + 1])))
    for i in range(h - 1):
        for j in range(w):
            add(("u", i, j), 1, (("v", i, j), ("v", i + 1, j)), float(min(values[i, j], values[i + 1, j])))
    for i in range(h - 1):
        for j in range(w - 1):
            faces = (("h", i, j), ("h", i + 1, j), ("u", i, j), ("u", i, j + 1))
            val = float(min(values[i, j], values[i, j + 1], values[i + 1, j], values[i + 1, j + 1]))
            add(("s", i, j), 2, faces, val)

    order = sorted(range(len(cells)), key=lambda c: (-cells[c][0], cells[c][1], c))
    pos = {c: p for p, c in enumerate(order)}
    n = len(cells)
    mat = np.zeros((n, n), dtype=bool)
    for c in range(n):
        for f in cells[c][2]:
            mat[pos[key[f]], pos[c]] = True
    vals = [cells[c][0] for c in order]
    dims = [cells[c][1] for c in order]

    low_of: Dict[int, int] = {}
    paired = set()
    bars: Dict[int, List[Tuple[float, float]]] = {0: [], 1: []}
    for j in range(n):
        col = mat[:, j]
        while col.any():
            low = int(np.flatnonzero(col)[-1])
            if low not in low_of:
                break
            col ^= mat[:, low_of[low]]
        if col.any():
            low = int(np.flatnonzero(col)[-1])
            low_of[low] = j
            paired.update((low, j))
            if vals[low] != vals[j]:
                bars[dims[low]].append((vals[low], vals[j]))
    for p in range(n):
        if p not in paired and dims[p] < 2:
            bars[dims[p]].append((vals[p], float("-inf")))
    return {d: sorted(b) for d, b in bars.items()}


def assignment_bruteforce(values: np.ndarray) -> float:
    """Minimum total cost over every injection of the shorter side into the longer."""
    c = np.asarray(values, dtype=np.float64)
    n, m = c.shape
    if n <= m:
        return min(sum(c[i, cols[i]] for i in range(n)) for cols in itertools.permutations(range(m), n))
    return min(sum(c[rows[j], j] for j in range(m)) for rows in itertools.permutations(range(n), m))


def mann_whitney_auc(scores: Sequence[float], labels: Sequence[str]) -> float:
    """P(score of a positive < score of a negative), ties counted as one half."""
    pos = [s for s, l in zip(scores, labels) if l == "positive"]
    neg = [s for s, l in zip(scores, labels) if l == "negative"]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p < q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def betti_count(bars: Sequence[Tuple[float, float]], x: float) -> int:
    return sum(1 for b, d in bars if d < x <= b)


def exact_betti_l1(a: Sequence[Tuple[float, float]], b: Sequence[Tuple[float, float]], lo: float, hi: float) -> float:
    """Integral of |beta_a - beta_b| over [lo, hi] by sweeping the breakpoints."""
    points = {lo, hi}
    for bars in (a, b):
        for birth, death in bars:
            for x in (birth, death):
                if lo < x < hi:
                    points.add(x)
    xs = sorted(points)
    total = 0.0
    for x0, x1 in zip(xs, xs[1:]):
        mid = (x0 + x1) / 2.0
        total += abs(betti_count(a, mid) - betti_count(b, mid)) * (x1 - x0)
    return total


def assignment_lexmin(values: np.ndarray) -> List[Tuple[int, int]]:
    """Lexicographically smallest row-sorted pair list among all optimal injections."""
    c = np.asarray(values, dtype=np.float64)
    n, m = c.shape
    candidates = []
    if n <= m:
        for cols in itertools.permutations(range(m), n):
            candidates.append([(i, cols[i]) for i in range(n)])
    else:
        for rows in itertools.permutations(range(n), m):
            candidates.append(sorted((rows[j], j) for j in range(m)))
    best = min(sum(c[i, j] for i, j in p) for p in candidates)
    return min(p for p in candidates if sum(c[i, j] for i, j in p) == best)
