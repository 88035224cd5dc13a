"""Persistent homology of 2-D images on the cubical vertex construction.

Pixels are vertices; horizontally/vertically adjacent pixels span edges and
2x2 pixel blocks span squares. A cell carries the extreme value of its vertices
(max for the lower-star filtration, min for the upper-star co-filtration).
Cells are totally ordered by (value, dimension, row-major index in the
(2H-1) x (2W-1) cell grid).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Literal, Sequence, Tuple

import numpy as np

from .errors import TopoprintError


logger = logging.getLogger(__name__)

Method = Literal["union_find", "reduction"]


@dataclass(frozen=True, eq=False)
class IntensityImage:
    values: np.ndarray  # rows = mel bins, cols = time frames

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise TopoprintError(f"IntensityImage must be a non-empty 2-D matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise TopoprintError("IntensityImage values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    @property
    def T(self) -> "IntensityImage":
        return IntensityImage(self.values.T)


def _as_bars(pairs: Sequence[Tuple[float, float]]) -> np.ndarray:
    arr = np.array(pairs, dtype=np.float64).reshape(-1, 2)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Barcode:
    """(birth, death) pairs per dimension; co-filtration bars have birth > death.

    Essential dimension-0 classes carry death = -inf.
    """

    dim0: np.ndarray
    dim1: np.ndarray

    @classmethod
    def from_pairs(cls, dim0: Sequence[Tuple[float, float]], dim1: Sequence[Tuple[float, float]]) -> "Barcode":
        return cls(_as_bars(dim0), _as_bars(dim1))

    def bars(self, dim: int) -> np.ndarray:
        if dim == 0:
            return self.dim0
        if dim == 1:
            return self.dim1
        raise TopoprintError(f"Barcodes are computed in dimensions 0 and 1 only, got {dim}")

    def essential(self, dim: int) -> np.ndarray:
        b = self.bars(dim)
        return b[np.isinf(b[:, 1])]

    def finite(self, dim: int) -> np.ndarray:
        b = self.bars(dim)
        return b[np.isfinite(b[:, 1])]

    def multiset(self, dim: int) -> List[Tuple[float, float]]:
        return sorted((float(b), float(d)) for b, d in self.bars(dim))

    def same_as(self, other: "Barcode") -> bool:
        return self.multiset(0) == other.multiset(0) and self.multiset(1) == other.multiset(1)

    def mapped(self, fn) -> "Barcode":
        """Apply a monotone map to every finite endpoint (infinite ends are kept)."""

        def apply(arr: np.ndarray) -> np.ndarray:
            out = arr.copy()
            mask = np.isfinite(out)
            out[mask] = fn(out[mask])
            return out

        return Barcode(_as_bars(apply(self.dim0)), _as_bars(apply(self.dim1)))

    def to_dict(self) -> dict:
        def enc(x: float):
            return None if np.isinf(x) else float(x)

        return {
            "dim0": [[enc(b), enc(d)] for b, d in self.dim0],
            "dim1": [[enc(b), enc(d)] for b, d in self.dim1],
        }


@dataclass(frozen=True, eq=False)
class BettiCurve:
    samples: np.ndarray  # non-negative integer counts on the midpoint grid
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.int64)
        if s.ndim != 1 or s.shape[0] < 2:
            raise TopoprintError("BettiCurve needs a 1-D sample vector of length >= 2")
        if np.any(s < 0):
            raise TopoprintError("Betti numbers are non-negative")
        if not self.lo < self.hi:
            raise TopoprintError(f"Betti curve domain must satisfy lo < hi, got [{self.lo}, {self.hi}]")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))

    @property
    def resolution(self) -> int:
        return int(self.samples.shape[0])

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / self.resolution

    @property
    def grid(self) -> np.ndarray:
        return midpoint_grid(self.lo, self.hi, self.resolution)

    def same_grid(self, other: "BettiCurve") -> bool:
        return self.lo == other.lo and self.hi == other.hi and self.resolution == other.resolution

    def same_as(self, other: "BettiCurve") -> bool:
        return self.same_grid(other) and np.array_equal(self.samples, other.samples)


def midpoint_grid(lo: float, hi: float, resolution: int) -> np.ndarray:
    return lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution


# -- cell geometry ---------------------------------------------------------


def _cell_index(r: np.ndarray, c: np.ndarray, width: int) -> np.ndarray:
    return r * (2 * width - 1) + c


def _cells(values: np.ndarray, reduce) -> dict:
    """Filtration values and cell-grid indices of every cell of the image."""
    h, w = values.shape
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    cells = {
        "vertex": (values, _cell_index(2 * ii, 2 * jj, w)),
        "h_edge": (reduce(values[:, :-1], values[:, 1:]), _cell_index(2 * ii[:, :-1], 2 * jj[:, :-1] + 1, w)),
        "v_edge": (reduce(values[:-1, :], values[1:, :]), _cell_index(2 * ii[:-1, :] + 1, 2 * jj[:-1, :], w)),
        "square": (
            reduce(reduce(values[:-1, :-1], values[:-1, 1:]), reduce(values[1:, :-1], values[1:, 1:])),
            _cell_index(2 * ii[:-1, :-1] + 1, 2 * jj[:-1, :-1] + 1, w),
        ),
    }
    return cells


def _rank(vals: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Position of every cell in the ascending (value, index) order."""
    order = np.lexsort((idx.ravel(), vals.ravel()))
    rank = np.empty(order.shape[0], dtype=np.int64)
    rank[order] = np.arange(order.shape[0])
    return rank


def _find(parent: List[int], x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _lower_star_dim0(vals: np.ndarray, cells: dict) -> Tuple[list, list]:
    """Union-find sweep over edges in filtration order (elder rule on vertices)."""
    h, w = vals.shape
    vflat = vals.ravel().tolist()
    vrank = _rank(vals, cells["vertex"][1]).tolist()

    he_val, he_idx = cells["h_edge"]
    ve_val, ve_idx = cells["v_edge"]
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    vid = ii * w + jj
    e_val = np.concatenate([he_val.ravel(), ve_val.ravel()])
    e_idx = np.concatenate([he_idx.ravel(), ve_idx.ravel()])
    e_u = np.concatenate([vid[:, :-1].ravel(), vid[:-1, :].ravel()])
    e_v = np.concatenate([vid[:, 1:].ravel(), vid[1:, :].ravel()])
    order = np.lexsort((e_idx, e_val))

    parent = list(range(h * w))
    pairs = []
    for u, v, ev in zip(e_u[order].tolist(), e_v[order].tolist(), e_val[order].tolist()):
        ru = _find(parent, u)
        rv = _find(parent, v)
        if ru == rv:
            continue
        young, old = (ru, rv) if vrank[ru] > vrank[rv] else (rv, ru)
        parent[young] = old
        if vflat[young] != ev:
            pairs.append((vflat[young], ev))
    roots = {_find(parent, x) for x in range(h * w)}
    essential = [(vflat[r], float("inf")) for r in sorted(roots, key=lambda r: vrank[r])]
    return pairs, essential


def _lower_star_dim1(vals: np.ndarray, cells: dict) -> list:
    """Dual union-find: squares (plus one outer cell) merged by edges in reverse order.

    An edge that joins two dual components pairs with the root square of the
    younger one, i.e. the square of smaller filtration rank.
    """
    h, w = vals.shape
    if h < 2 or w < 2:
        return []
    sq_val, sq_idx = cells["square"]
    n_sq = (h - 1) * (w - 1)
    outer = n_sq
    sq_flat = sq_val.ravel().tolist()
    sq_rank = _rank(sq_val, sq_idx).tolist() + [n_sq]  # outer cell is the eldest

    sid = np.arange(n_sq).reshape(h - 1, w - 1)
    # horizontal edge (i, j): squares (i-1, j) above and (i, j) below
    h_above = np.full((h, w - 1), outer)
    h_above[1:, :] = sid
    h_below = np.full((h, w - 1), outer)
    h_below[:-1, :] = sid
    # vertical edge (i, j): squares (i, j-1) left and (i, j) right
    v_left = np.full((h - 1, w), outer)
    v_left[:, 1:] = sid
    v_right = np.full((h - 1, w), outer)
    v_right[:, :-1] = sid

    he_val, he_idx = cells["h_edge"]
    ve_val, ve_idx = cells["v_edge"]
    e_val = np.concatenate([he_val.ravel(), ve_val.ravel()])
    e_idx = np.concatenate([he_idx.ravel(), ve_idx.ravel()])
    e_a = np.concatenate([h_above.ravel(), v_left.ravel()])
    e_b = np.concatenate([h_below.ravel(), v_right.ravel()])
    order = np.lexsort((e_idx, e_val))[::-1]

    parent = list(range(n_sq + 1))
    pairs = []
    for a, b, ev in zip(e_a[order].tolist(), e_b[order].tolist(), e_val[order].tolist()):
        ra = _find(parent, a)
        rb = _find(parent, b)
        if ra == rb:
            continue
        young, old = (ra, rb) if sq_rank[ra] < sq_rank[rb] else (rb, ra)
        parent[young] = old
        if ev != sq_flat[young]:
            pairs.append((ev, sq_flat[young]))
    return pairs


def lower_star_persistence(img: IntensityImage, method: Method = "union_find") -> Barcode:
    """Sublevel persistence: births <= deaths, essential classes die at +inf."""
    vals = img.values
    if method == "reduction":
        from .reduction import boundary_matrix_persistence

        dim0, dim1 = boundary_matrix_persistence(vals)
        return Barcode.from_pairs(dim0, dim1)
    if method != "union_find":
        raise TopoprintError(f"Unknown persistence method {method!r}")
    cells = _cells(vals, np.maximum)
    finite0, essential0 = _lower_star_dim0(vals, cells)
    dim1 = _lower_star_dim1(vals, cells)
    logger.debug("lower-star %s: %d dim-0 bars, %d dim-1 bars", vals.shape, len(finite0) + len(essential0), len(dim1))
    return Barcode.from_pairs(essential0 + finite0, dim1)


def upper_star_persistence(img: IntensityImage, method: Method = "union_find") -> Barcode:
    """Persistence of the upper-star co-filtration K^s = {Q : f(v) >= s for all vertices v of Q}.

    Computed as the lower-star persistence of the negated image; bars come back
    with birth > death and essential classes with death = -inf.
    """
    low = lower_star_persistence(IntensityImage(-img.values), method=method)
    # negation maps +inf deaths to -inf and flips every inequality
    return Barcode(_as_bars(-low.dim0 + 0.0), _as_bars(-low.dim1 + 0.0))


def betti_curve(bc: Barcode, dim: int, lo: float = 0.0, hi: float = 1.0, resolution: int = 256) -> BettiCurve:
    """Count bars with death < x <= birth at the midpoints of R equal cells of [lo, hi]."""
    if not lo < hi:
        raise TopoprintError(f"Betti curve domain must satisfy lo < hi, got [{lo}, {hi}]")
    if resolution < 2:
        raise TopoprintError(f"Betti curve resolution must be >= 2, got {resolution}")
    bars = bc.bars(dim)
    x = midpoint_grid(lo, hi, resolution)
    births = np.sort(bars[:, 0])
    deaths = np.sort(bars[:, 1])
    # alive(x) = #{birth >= x} - #{death >= x}, since death < birth for every bar
    n_birth = births.shape[0] - np.searchsorted(births, x, side="left")
    n_death = deaths.shape[0] - np.searchsorted(deaths, x, side="left")
    return BettiCurve(n_birth - n_death, lo, hi)


def betti_l1(a: BettiCurve, b: BettiCurve) -> float:
    """Riemann sum of |a - b| on the shared midpoint grid."""
    if not a.same_grid(b):
        raise TopoprintError(
            f"Betti curves live on different grids: [{a.lo}, {a.hi}]x{a.resolution} vs [{b.lo}, {b.hi}]x{b.resolution}"
        )
    return a.step * float(np.abs(a.samples - b.samples).sum())
