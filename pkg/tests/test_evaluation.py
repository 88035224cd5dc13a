from __future__ import annotations

import logging

import numpy as np
import pytest

from oracles import mann_whitney_auc
from src.core.cubical import BettiCurve
from src.core.errors import EvaluationError
from src.core.evaluation import (
    LabeledPair,
    auc,
    candidate_thresholds,
    classify_batch,
    cumulative_distribution,
    group_accuracy,
    learn_kappa,
    metrics_from_records,
    roc_curve,
    sweep_lambda,
)
from src.core.fingerprint import Fingerprint, FingerprintEntry
from src.core.models import FingerprintConfig, PairRecord


def _records(scores, labels, kappa=0.3, groups=None):
    groups = groups or [None] * len(scores)
    return [
        PairRecord(
            index=i,
            label=lab,
            group=g or ("identity" if lab == "positive" else "negative"),
            error=e,
            rho=1.0 - e,
            n_pairs=5,
            decision="positive" if e < kappa else "negative",
        )
        for i, (e, lab, g) in enumerate(zip(scores, labels, groups))
    ]


def test_perfect_separation():
    scores = [0.0, 0.1, 0.2, 0.5, 0.9]
    labels = ["positive"] * 3 + ["negative"] * 2
    m = metrics_from_records(_records(scores, labels), kappa=0.3)
    assert (m.tp, m.fp, m.tn, m.fn) == (3, 0, 2, 0)
    assert m.accuracy == m.precision == m.recall == 1.0
    assert m.fpr == 0.0
    assert m.auc == 1.0
    assert m.learned_kappa == 0.5
    assert m.learned_accuracy == 1.0
    assert m.total == 5


def test_constant_scores_give_chance_auc():
    rng = np.random.default_rng(0)
    labels = [str(x) for x in rng.choice(["positive", "negative"], size=12)]
    labels[:2] = ["positive", "negative"]
    m = metrics_from_records(_records([0.4] * 12, labels), kappa=0.3)
    assert m.auc == 0.5


def test_single_class_batch_warns(caplog):
    with caplog.at_level(logging.WARNING):
        m = metrics_from_records(_records([0.1, 0.2], ["positive", "positive"]), kappa=0.3)
    assert m.auc == 0.5
    assert "single class" in caplog.text


def test_auc_matches_rank_statistic():
    scores = [0.12, 0.5, 0.33, 0.9, 0.05, 0.5, 0.61, 0.2, 0.77, 0.33,
              0.41, 0.08, 0.95, 0.5, 0.27, 0.66, 0.14, 0.88, 0.3, 0.59]
    labels = ["positive", "negative", "positive", "negative", "positive", "positive", "negative",
              "positive", "negative", "negative", "positive", "positive", "negative", "negative",
              "positive", "negative", "positive", "negative", "positive", "negative"]
    points = roc_curve(scores, labels)
    assert auc(points) == pytest.approx(mann_whitney_auc(scores, labels), abs=1e-12)


def test_roc_endpoints_and_order():
    points = roc_curve([0.3, 0.1, 0.7], ["positive", "negative", "positive"])
    assert (points[0].fpr, points[0].tpr) == (0.0, 0.0)
    assert (points[-1].fpr, points[-1].tpr) == (1.0, 1.0)
    assert [p.threshold for p in points] == sorted(p.threshold for p in points)
    assert all(a.fpr <= b.fpr and a.tpr <= b.tpr for a, b in zip(points, points[1:]))


def test_candidate_thresholds():
    t = candidate_thresholds(np.array([0.3, 0.1, 0.3]))
    assert list(t[:2]) == [0.1, 0.3]
    assert t[2] > 0.3 and t[2] == np.nextafter(0.3, np.inf)


def test_learn_kappa_respects_false_positive_budget():
    scores = [0.1, 0.2, 0.6, 0.3, 0.5]
    labels = ["positive", "positive", "positive", "negative", "negative"]
    assert learn_kappa(scores, labels) == 0.3
    assert learn_kappa(scores, labels, target_fpr=1.0) == np.nextafter(0.6, np.inf)
    with pytest.raises(EvaluationError):
        learn_kappa(scores, labels, target_fpr=1.5)


def test_precision_without_predicted_positives():
    m = metrics_from_records(_records([0.5, 0.6], ["positive", "negative"], kappa=0.1), kappa=0.1)
    assert m.precision == 0.0
    assert m.recall == 0.0
    assert m.accuracy == 0.5


def test_group_accuracy_and_cdf():
    records = _records(
        [0.05, 0.4, 0.1, 0.9, 0.2],
        ["positive", "positive", "positive", "negative", "negative"],
        groups=["reverb:50", "reverb:50", "pitch_shift:2", None, None],
    )
    assert group_accuracy(records) == {"negative": 0.5, "pitch_shift:2": 1.0, "reverb:50": 0.5}
    cdf = cumulative_distribution(records)
    assert cdf["reverb:50"] == [(0.05, 0.5), (0.4, 1.0)]
    assert cdf["negative"] == [(0.2, 0.5), (0.9, 1.0)]


def test_mismatched_inputs_rejected():
    with pytest.raises(EvaluationError):
        roc_curve([0.1, 0.2], ["positive"])
    with pytest.raises(EvaluationError):
        roc_curve([0.1], ["maybe"])
    with pytest.raises(EvaluationError):
        roc_curve([], [])


# -- end to end on hand-built fingerprints ---------------------------------------


def _fp(curves: np.ndarray) -> Fingerprint:
    times = 0.5 + 0.6 * np.arange(curves.shape[0])
    entries = tuple(
        FingerprintEntry(t=float(t), beta0=BettiCurve(c), beta1=BettiCurve(c[::-1])) for t, c in zip(times, curves)
    )
    return Fingerprint(entries=entries, config=FingerprintConfig(betti_res=curves.shape[1]), source_duration=times[-1] + 0.5)


@pytest.fixture
def labeled_pairs():
    rng = np.random.default_rng(17)
    out = []
    for i in range(4):
        curves = rng.integers(0, 20, size=(8, 16))
        a = _fp(curves)
        out.append(LabeledPair(a, a, "positive", f"copy:{i}"))
        out.append((a, _fp(curves[::-1]), "negative"))
    return out


def test_classify_batch(labeled_pairs):
    m = classify_batch(labeled_pairs)
    assert m.total == 8
    assert m.accuracy == 1.0
    assert m.auc == 1.0
    assert m.learned_accuracy == 1.0
    assert [r.group for r in m.records[:2]] == ["copy:0", "negative"]


def test_sweep_lambda_prefers_smallest_on_ties(labeled_pairs):
    best, table = sweep_lambda(labeled_pairs, [0.7, 0.3, 0.5], folds=4, seed=1)
    assert best == 0.3
    assert table == {"0.3": 1.0, "0.5": 1.0, "0.7": 1.0}


def test_classify_batch_with_lambda_grid(labeled_pairs):
    m = classify_batch(labeled_pairs, lambda_grid=[0.9, 0.2])
    assert m.lam == 0.2
    assert set(m.lambda_sweep) == {"0.2", "0.9"}


def test_batch_errors(labeled_pairs):
    with pytest.raises(EvaluationError):
        classify_batch([])
    a = labeled_pairs[0].a
    with pytest.raises(EvaluationError):
        classify_batch([(a, a, "maybe")])
    with pytest.raises(EvaluationError):
        sweep_lambda(labeled_pairs, [])
