"""Rectangular minimum-cost assignment with a lexicographic tie-break.

The matrix is padded to a square with zero-cost dummy rows/columns and solved
with the potentials form of the Hungarian method. The dual potentials define
the tight graph (reduced cost 0): a perfect matching is optimal iff it uses
tight edges only. Among those, rows are fixed greedily to their smallest
feasible column, re-routing the rest of the matching along alternating paths.
"""
from __future__ import annotations

import logging
from collections import deque
from typing import List, Tuple

import numpy as np

from .errors import MatchingError


logger = logging.getLogger(__name__)

Pairs = List[Tuple[int, int]]


def _hungarian(cost: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Square assignment; returns (col_of_row, u, v) with cost - u - v >= 0."""
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row (1-based) owning column j
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            js = np.flatnonzero(~used[1:]) + 1
            cur = cost[i0 - 1, js - 1] - u[i0] - v[js]
            better = cur < minv[js]
            minv[js[better]] = cur[better]
            way[js[better]] = j0
            k = int(np.argmin(minv[js]))
            j1 = int(js[k])
            delta = minv[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = int(way[j0])
            p[j0] = p[j1]
            j0 = j1
    col_of_row = np.empty(n, dtype=np.int64)
    col_of_row[p[1:] - 1] = np.arange(n)
    return col_of_row, u[1:], v[1:]


def _reroute(tight: np.ndarray, col_of_row: np.ndarray, row_of_col: np.ndarray,
             fixed: np.ndarray, i: int, c: int) -> bool:
    """Give column c to row i if an alternating cycle through (i, c) exists."""
    old = int(col_of_row[i])
    start = int(row_of_col[c])
    parent = {}
    seen = fixed.copy()
    seen[c] = True
    queue = deque([start])
    found = False
    while queue and not found:
        x = queue.popleft()
        for y in np.flatnonzero(tight[x] & ~seen):
            y = int(y)
            seen[y] = True
            parent[y] = x
            if y == old:
                found = True
                break
            queue.append(int(row_of_col[y]))
    if not found:
        return False

    y = old
    while True:
        x = parent[y]
        prev = int(col_of_row[x])
        col_of_row[x] = y
        row_of_col[y] = x
        if x == start:
            break
        y = prev
    col_of_row[i] = c
    row_of_col[c] = i
    logger.debug("re-matched row %d from column %d to %d", i, old, c)
    return True


def solve_assignment(values: np.ndarray, tol: float = 1e-9) -> Pairs:
    """Minimum-cost injection of the shorter side into the longer one.

    Returns min(rows, cols) (row, col) pairs sorted by row; among optimal
    matchings the lexicographically smallest pair list is returned.
    """
    c = np.asarray(values, dtype=np.float64)
    if c.ndim != 2 or c.size == 0:
        raise MatchingError(f"cost matrix must be a non-empty 2-D array, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise MatchingError("cost matrix has non-finite entries")
    if np.any(c < 0):
        raise MatchingError("cost matrix has negative entries")

    n, m = c.shape
    s = max(n, m)
    square = np.zeros((s, s))
    square[:n, :m] = c
    col_of_row, u, v = _hungarian(square)

    scale = max(1.0, float(square.max()))
    tight = np.abs(square - u[:, None] - v[None, :]) <= tol * scale
    row_of_col = np.empty(s, dtype=np.int64)
    row_of_col[col_of_row] = np.arange(s)

    fixed = np.zeros(s, dtype=bool)
    for i in range(n):
        for col in np.flatnonzero(tight[i, :m] & ~fixed[:m]):
            col = int(col)
            if col == col_of_row[i] or _reroute(tight, col_of_row, row_of_col, fixed, i, col):
                break
        fixed[col_of_row[i]] = True

    return [(i, int(col_of_row[i])) for i in range(n) if col_of_row[i] < m]


def assignment_cost(values: np.ndarray, pairs: Pairs) -> float:
    c = np.asarray(values, dtype=np.float64)
    return float(sum(c[i, j] for i, j in pairs))
