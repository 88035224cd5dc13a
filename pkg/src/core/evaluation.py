"""Batch classification metrics: confusion counts, ROC/AUC, learned threshold."""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import EvaluationError
from .fingerprint import Fingerprint
from .matching import compare
from .models import (
    DEFAULT_KAPPA,
    BatchMetrics,
    Label,
    MatchConfig,
    PairRecord,
    RocPoint,
)


logger = logging.getLogger(__name__)

TARGET_FPR = 0.01
LABELS = ("positive", "negative")


@dataclass(frozen=True)
class LabeledPair:
    a: Fingerprint
    b: Fingerprint
    label: Label
    group: Optional[str] = None


def _as_labeled(items: Sequence) -> List[LabeledPair]:
    out = []
    for item in items:
        if not isinstance(item, LabeledPair):
            item = LabeledPair(*item)
        if item.label not in LABELS:
            raise EvaluationError(f"label must be 'positive' or 'negative', got {item.label!r}")
        out.append(item)
    if not out:
        raise EvaluationError("cannot evaluate an empty batch")
    return out


def _default_group(label: str) -> str:
    return "identity" if label == "positive" else "negative"


def _arrays(scores: Sequence[float], labels: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise EvaluationError("no scores to evaluate")
    if s.shape[0] != len(labels):
        raise EvaluationError(f"{s.shape[0]} scores but {len(labels)} labels")
    bad = [x for x in labels if x not in LABELS]
    if bad:
        raise EvaluationError(f"labels must be 'positive' or 'negative', got {bad[0]!r}")
    return s, np.array([x == "positive" for x in labels])


def candidate_thresholds(scores: np.ndarray) -> np.ndarray:
    """Every distinct score plus one value just above the largest."""
    u = np.unique(scores)
    return np.append(u, np.nextafter(u[-1], np.inf))


def confusion(scores: np.ndarray, positive: np.ndarray, kappa: float) -> Tuple[int, int, int, int]:
    predicted = scores < kappa
    tp = int(np.sum(predicted & positive))
    fp = int(np.sum(predicted & ~positive))
    tn = int(np.sum(~predicted & ~positive))
    fn = int(np.sum(~predicted & positive))
    return tp, fp, tn, fn


def _rates(tp: int, fp: int, tn: int, fn: int) -> Tuple[float, float]:
    tpr = tp / (tp + fn) if tp + fn else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0
    return tpr, fpr


def roc_curve(scores: Sequence[float], labels: Sequence[str]) -> List[RocPoint]:
    """One point per candidate threshold, ascending; E < threshold predicts positive."""
    s, pos = _arrays(scores, labels)
    points = []
    for theta in candidate_thresholds(s):
        tpr, fpr = _rates(*confusion(s, pos, float(theta)))
        points.append(RocPoint(threshold=float(theta), fpr=fpr, tpr=tpr))
    return points


def auc(points: Sequence[RocPoint]) -> float:
    """Trapezoidal area under the ROC points."""
    fpr = np.array([p.fpr for p in points])
    tpr = np.array([p.tpr for p in points])
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def learn_kappa(scores: Sequence[float], labels: Sequence[str], target_fpr: float = TARGET_FPR) -> float:
    """Smallest threshold reaching the best recall among those with FPR <= target."""
    if not 0 <= target_fpr <= 1:
        raise EvaluationError(f"target FPR must lie in [0, 1], got {target_fpr}")
    s, pos = _arrays(scores, labels)
    best_kappa, best_tpr = float(s.min()), -1.0
    for theta in candidate_thresholds(s):
        tpr, fpr = _rates(*confusion(s, pos, float(theta)))
        if fpr <= target_fpr and tpr > best_tpr:
            best_kappa, best_tpr = float(theta), tpr
    return best_kappa


def accuracy(scores: np.ndarray, positive: np.ndarray, kappa: float) -> float:
    tp, fp, tn, fn = confusion(scores, positive, kappa)
    return (tp + tn) / (tp + fp + tn + fn)


def metrics_from_records(
    records: Sequence[PairRecord],
    kappa: float,
    target_fpr: float = TARGET_FPR,
    lam: float = 0.5,
    lambda_sweep: Optional[Dict[str, float]] = None,
) -> BatchMetrics:
    scores = [r.error for r in records]
    labels = [r.label for r in records]
    s, pos = _arrays(scores, labels)
    tp, fp, tn, fn = confusion(s, pos, kappa)
    recall, fpr = _rates(tp, fp, tn, fn)
    roc = roc_curve(scores, labels)
    if pos.all() or not pos.any():
        logger.warning("batch holds a single class; AUC reported as 0.5")
        area = 0.5
    else:
        area = auc(roc)
    learned = learn_kappa(scores, labels, target_fpr)
    return BatchMetrics(
        kappa=kappa,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        accuracy=(tp + tn) / len(records),
        precision=tp / (tp + fp) if tp + fp else 0.0,
        recall=recall,
        fpr=fpr,
        auc=area,
        learned_kappa=learned,
        learned_accuracy=accuracy(s, pos, learned),
        target_fpr=target_fpr,
        records=list(records),
        roc=roc,
        lam=lam,
        lambda_sweep=lambda_sweep or {},
    )


def score_pairs(pairs: Sequence[LabeledPair], cfg: MatchConfig) -> List[PairRecord]:
    records = []
    for idx, p in enumerate(pairs):
        res = compare(p.a, p.b, cfg)
        records.append(
            PairRecord(
                index=idx,
                label=p.label,
                group=p.group or _default_group(p.label),
                error=res.error,
                rho=res.rho,
                n_pairs=res.n_pairs,
                decision=res.decision,
            )
        )
        logger.debug("pair %d (%s): E=%.4f", idx, p.label, res.error)
    return records


def sweep_lambda(
    pairs: Sequence,
    lambdas: Sequence[float],
    folds: int = 4,
    cfg: Optional[MatchConfig] = None,
    target_fpr: float = TARGET_FPR,
    seed: int = 0,
) -> Tuple[float, Dict[str, float]]:
    """Pick lambda by k-fold cross-validated accuracy with kappa learned per training split.

    Ties go to the smallest lambda.
    """
    items = _as_labeled(pairs)
    if not lambdas:
        raise EvaluationError("lambda grid is empty")
    if len(items) < 2:
        raise EvaluationError("cross-validation needs at least 2 pairs")
    cfg = cfg or MatchConfig()
    k = min(folds, len(items))
    order = np.random.default_rng(seed).permutation(len(items))
    splits = np.array_split(order, k)

    table: Dict[str, float] = {}
    best_lam, best_acc = 0.0, -1.0
    for lam in sorted(float(x) for x in lambdas):
        records = score_pairs(items, cfg.model_copy(update={"lam": lam}))
        s, pos = _arrays([r.error for r in records], [r.label for r in records])
        fold_acc = []
        for test in splits:
            train = np.setdiff1d(order, test)
            train_labels = ["positive" if x else "negative" for x in pos[train]]
            kappa = learn_kappa(s[train], train_labels, target_fpr)
            fold_acc.append(accuracy(s[test], pos[test], kappa))
        mean_acc = float(np.mean(fold_acc))
        table[f"{lam:g}"] = mean_acc
        logger.info("lambda %.3g: cross-validated accuracy %.4f", lam, mean_acc)
        if mean_acc > best_acc:
            best_lam, best_acc = lam, mean_acc
    return best_lam, table


def classify_batch(
    pairs: Sequence,
    kappa: float = DEFAULT_KAPPA,
    cfg: Optional[MatchConfig] = None,
    target_fpr: float = TARGET_FPR,
    lambda_grid: Optional[Sequence[float]] = None,
    seed: int = 0,
) -> BatchMetrics:
    """Score labeled fingerprint pairs and summarize the classifier at `kappa`.

    Items are LabeledPair or (a, b, label[, group]) tuples. With a lambda grid,
    lambda is first chosen by cross-validation and the batch is scored with it.
    """
    items = _as_labeled(pairs)
    cfg = (cfg or MatchConfig()).model_copy(update={"kappa": kappa})
    sweep: Dict[str, float] = {}
    if lambda_grid:
        lam, sweep = sweep_lambda(items, lambda_grid, cfg=cfg, target_fpr=target_fpr, seed=seed)
        cfg = cfg.model_copy(update={"lam": lam})
    records = score_pairs(items, cfg)
    metrics = metrics_from_records(records, kappa, target_fpr, lam=cfg.lam, lambda_sweep=sweep)
    logger.info(
        "Evaluated %d pairs: accuracy %.4f at kappa %.4f, AUC %.4f, learned kappa %.4f",
        metrics.total, metrics.accuracy, kappa, metrics.auc, metrics.learned_kappa,
    )
    return metrics


def group_accuracy(records: Sequence[PairRecord]) -> Dict[str, float]:
    """Fraction of correctly decided pairs per group."""
    hits: Dict[str, List[bool]] = defaultdict(list)
    for r in records:
        hits[r.group].append(r.decision == r.label)
    return {g: sum(v) / len(v) for g, v in sorted(hits.items())}


def cumulative_distribution(records: Sequence[PairRecord]) -> Dict[str, List[Tuple[float, float]]]:
    """Per group, the empirical CDF of E as (error, fraction <= error) steps."""
    by_group: Dict[str, List[float]] = defaultdict(list)
    for r in records:
        by_group[r.group].append(r.error)
    out = {}
    for g, errs in sorted(by_group.items()):
        errs.sort()
        n = len(errs)
        out[g] = [(e, (i + 1) / n) for i, e in enumerate(errs)]
    return out
