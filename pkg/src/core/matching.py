from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .assignment import solve_assignment
from .errors import MatchingError
from .fingerprint import Fingerprint
from .models import MatchConfig, MatchResult, MedianEdge


logger = logging.getLogger(__name__)

TimePairs = List[Tuple[float, float]]


@dataclass(frozen=True, eq=False)
class CostMatrix:
    values: np.ndarray  # (rows, cols), lam * M0 + (1 - lam) * M1
    row_times: np.ndarray
    col_times: np.ndarray
    lam: float

    @property
    def shape(self) -> Tuple[int, int]:
        return int(self.values.shape[0]), int(self.values.shape[1])


def _check_compatible(a: Fingerprint, b: Fingerprint) -> None:
    if len(a) == 0 or len(b) == 0:
        raise MatchingError("cannot match an empty fingerprint")
    ca, cb = a.config, b.config
    if (ca.betti_res, ca.betti_lo, ca.betti_hi) != (cb.betti_res, cb.betti_lo, cb.betti_hi):
        raise MatchingError(
            "fingerprints use different Betti grids: "
            f"[{ca.betti_lo}, {ca.betti_hi}]x{ca.betti_res} vs [{cb.betti_lo}, {cb.betti_hi}]x{cb.betti_res}"
        )
    if (ca.omega, ca.tau) != (cb.omega, cb.tau):
        logger.warning(
            "comparing fingerprints with different windows (omega %g/%g, tau %g/%g)",
            ca.omega, cb.omega, ca.tau, cb.tau,
        )


def distance_matrix(a: np.ndarray, b: np.ndarray, step: float) -> np.ndarray:
    """Pairwise L1 Betti distances between stacked curves (rows of a vs rows of b)."""
    out = np.empty((a.shape[0], b.shape[0]))
    for i in range(a.shape[0]):
        out[i] = np.abs(b - a[i]).sum(axis=1)
    return out * step


def cost_matrix(a: Fingerprint, b: Fingerprint, lam: float = 0.5) -> CostMatrix:
    if not 0 <= lam <= 1:
        raise MatchingError(f"lambda must lie in [0, 1], got {lam}")
    _check_compatible(a, b)
    step = (a.config.betti_hi - a.config.betti_lo) / a.config.betti_res
    m0 = distance_matrix(a.curves(0), b.curves(0), step)
    m1 = distance_matrix(a.curves(1), b.curves(1), step)
    values = lam * m0 + (1.0 - lam) * m1
    return CostMatrix(values=values, row_times=a.times, col_times=b.times, lam=lam)


def min_cost_assignment(c: CostMatrix) -> List[Tuple[int, int]]:
    return solve_assignment(c.values)


def neighborhood_median(pairs: Sequence[Tuple[float, float]], k: int = 2, edge: MedianEdge = "shrink") -> TimePairs:
    """Replace each second coordinate by the median of its 2k+1 neighbours.

    "shrink" narrows the window symmetrically near the ends, "truncate" cuts it
    one-sidedly.
    """
    if not pairs:
        raise MatchingError("cannot smooth an empty pair list")
    if k < 0:
        raise MatchingError(f"smoothing constant must be >= 0, got {k}")
    xs = [float(p[0]) for p in pairs]
    ys = np.array([float(p[1]) for p in pairs])
    n = len(xs)
    out = []
    for i in range(n):
        if edge == "shrink":
            r = min(k, i, n - 1 - i)
            lo, hi = i - r, i + r
        elif edge == "truncate":
            lo, hi = max(0, i - k), min(n - 1, i + k)
        else:
            raise MatchingError(f"unknown median edge policy {edge!r}")
        out.append((xs[i], float(np.median(ys[lo : hi + 1]))))
    return out


def order_score(smoothed: Sequence[Tuple[float, float]]) -> float:
    """Pearson correlation of the two coordinates; 0 when either is constant."""
    if len(smoothed) < 2:
        raise MatchingError(f"order score needs at least 2 pairs, got {len(smoothed)}")
    x = np.array([p[0] for p in smoothed], dtype=np.float64)
    y = np.array([p[1] for p in smoothed], dtype=np.float64)
    xm = x - x.mean()
    ym = y - y.mean()
    sxx = float(np.dot(xm, xm))
    syy = float(np.dot(ym, ym))
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    rho = float(np.dot(xm, ym)) / float(np.sqrt(sxx * syy))
    return min(1.0, max(-1.0, rho))


def compare(a: Fingerprint, b: Fingerprint, cfg: Optional[MatchConfig] = None) -> MatchResult:
    cfg = cfg or MatchConfig()
    c = cost_matrix(a, b, cfg.lam)
    index_pairs = min_cost_assignment(c)
    if len(index_pairs) < 2:
        raise MatchingError(f"need at least 2 matched windows, got {len(index_pairs)}")
    pairs = [(float(c.row_times[i]), float(c.col_times[j])) for i, j in index_pairs]
    smoothed = neighborhood_median(pairs, cfg.smooth_k, cfg.median_edge)
    rho = order_score(smoothed)
    error = 1.0 - rho
    result = MatchResult(
        pairs=pairs,
        smoothed=smoothed,
        index_pairs=index_pairs,
        rho=rho,
        error=error,
        decision="positive" if error < cfg.kappa else "negative",
        kappa=cfg.kappa,
        lam=cfg.lam,
        smooth_k=cfg.smooth_k,
    )
    logger.info("Compared %d x %d windows: E=%.4f (%s)", len(a), len(b), error, result.decision)
    return result
