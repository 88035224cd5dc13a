"""Standard boundary-matrix reduction over F2 with clearing.

Columns are Python ints used as bitsets over filtration positions, so adding
two columns is a XOR and the pivot (lowest one) is the highest set bit.
"""
from __future__ import annotations

import logging
from typing import Dict, List, Tuple

import numpy as np


logger = logging.getLogger(__name__)

Pairs = List[Tuple[float, float]]


def _filtration(values: np.ndarray):
    """Cells of the vertex construction in lower-star order.

    Returns per-position values, dimensions and boundary lists (as positions).
    """
    h, w = values.shape
    width = 2 * w - 1
    cells = []  # (value, dim, grid index, faces as grid indices)
    for i in range(h):
        for j in range(w):
            cells.append((float(values[i, j]), 0, (2 * i) * width + 2 * j, ()))
    for i in range(h):
        for j in range(w - 1):
            idx = (2 * i) * width + 2 * j + 1
            cells.append((float(max(values[i, j], values[i, j + 1])), 1, idx, (idx - 1, idx + 1)))
    for i in range(h - 1):
        for j in range(w):
            idx = (2 * i + 1) * width + 2 * j
            cells.append((float(max(values[i, j], values[i + 1, j])), 1, idx, (idx - width, idx + width)))
    for i in range(h - 1):
        for j in range(w - 1):
            idx = (2 * i + 1) * width + 2 * j + 1
            v = max(values[i, j], values[i, j + 1], values[i + 1, j], values[i + 1, j + 1])
            cells.append((float(v), 2, idx, (idx - width, idx - 1, idx + 1, idx + width)))

    cells.sort(key=lambda c: (c[0], c[1], c[2]))
    position = {c[2]: pos for pos, c in enumerate(cells)}
    vals = [c[0] for c in cells]
    dims = [c[1] for c in cells]
    boundary = [[position[f] for f in c[3]] for c in cells]
    return vals, dims, boundary


def boundary_matrix_persistence(values: np.ndarray) -> Tuple[Pairs, Pairs]:
    """Lower-star persistence pairs in dimensions 0 and 1 by column reduction.

    Dimension 2 columns are reduced first; every pivot they produce clears the
    corresponding dimension 1 column. Zero-length pairs are dropped; essential
    dimension 0 classes are reported with death = +inf.
    """
    vals, dims, boundary = _filtration(np.asarray(values, dtype=np.float64))
    n = len(vals)
    cleared = [False] * n
    paired = [False] * n
    dim0: Pairs = []
    dim1: Pairs = []

    for dim in (2, 1):
        pivot_of: Dict[int, int] = {}
        reduced: Dict[int, int] = {}
        for j in range(n):
            if dims[j] != dim or cleared[j]:
                continue
            col = 0
            for f in boundary[j]:
                col ^= 1 << f
            while col:
                low = col.bit_length() - 1
                other = pivot_of.get(low)
                if other is None:
                    break
                col ^= reduced[other]
            if not col:
                continue
            low = col.bit_length() - 1
            pivot_of[low] = j
            reduced[j] = col
            cleared[low] = True
            paired[low] = paired[j] = True
            if vals[low] != vals[j]:
                (dim1 if dim == 2 else dim0).append((vals[low], vals[j]))

    essential = [(vals[p], float("inf")) for p in range(n) if dims[p] == 0 and not paired[p]]
    logger.debug("reduced %d cells: %d dim-0 and %d dim-1 finite pairs", n, len(dim0), len(dim1))
    return essential + dim0, dim1
