"""Scoring harness: balanced accuracy, per-origin threshold tuning,
bootstrap confidence intervals, and report assembly.

The internal score convention is "higher means more likely
inconsistent"; metrics oriented the other way are negated at load time.
The positive class throughout is the inconsistent one.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import EvaluationError

ORIGINS = ("cnn", "xsum")
SPLITS = ("val", "test")
GOLD_VALUES = ("consistent", "inconsistent")


@dataclass(frozen=True)
class EvalRecord:
    dataset_name: str
    origin: str
    split: str
    score: float
    gold: str

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise EvaluationError(f"unknown origin {self.origin!r}")
        if self.split not in SPLITS:
            raise EvaluationError(f"unknown split {self.split!r}")
        if not math.isfinite(self.score):
            raise EvaluationError(f"non-finite score in {self.dataset_name!r}")
        if self.gold not in GOLD_VALUES:
            raise EvaluationError(f"unknown gold label {self.gold!r}")

    @property
    def is_inconsistent(self) -> bool:
        return self.gold == "inconsistent"


def load_eval_records(path: str, invert_scores: bool = False) -> list[EvalRecord]:
    """Read eval JSONL ({dataset_name, origin, split, score, gold});
    ``invert_scores`` negates scores so the higher-means-inconsistent
    convention holds."""
    records = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise EvaluationError(f"cannot read eval file: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            score = float(obj["score"])
            records.append(
                EvalRecord(
                    dataset_name=str(obj["dataset_name"]),
                    origin=str(obj["origin"]),
                    split=str(obj["split"]),
                    score=-score if invert_scores else score,
                    gold=str(obj["gold"]),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise EvaluationError(f"{path}:{lineno}: malformed record: {exc}") from exc
    if not records:
        raise EvaluationError(f"{path}: no eval records")
    return records


def balanced_accuracy(
    preds: Sequence[Union[bool, int]], golds: Sequence[Union[bool, int]]
) -> float:
    """(TPR + TNR) / 2 with the inconsistent class as positive."""
    if len(preds) != len(golds):
        raise EvaluationError("preds and golds differ in length")
    if not golds:
        raise EvaluationError("balanced accuracy over empty input")
    tp = fn = tn = fp = 0
    for p, g in zip(preds, golds):
        if g:
            if p:
                tp += 1
            else:
                fn += 1
        else:
            if p:
                fp += 1
            else:
                tn += 1
    if tp + fn == 0 or tn + fp == 0:
        raise EvaluationError("balanced accuracy undefined: single-class golds")
    return (tp / (tp + fn) + tn / (tn + fp)) / 2.0


def _candidate_thresholds(scores: Sequence[float]) -> list[float]:
    distinct = sorted(set(scores))
    mids = [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]
    return [float("-inf")] + mids + [float("inf")]


def predict_with_threshold(scores: Sequence[float], threshold: float) -> list[bool]:
    return [s >= threshold for s in scores]


def tune_threshold_scores(
    scores: Sequence[float], golds: Sequence[Union[bool, int]]
) -> float:
    """The threshold maximizing balanced accuracy of (score >= t), over
    midpoints of consecutive distinct scores plus the two infinities.
    Ties resolve to the smallest candidate."""
    if len(scores) != len(golds) or not scores:
        raise EvaluationError("tuning needs equal-length nonempty inputs")
    best_t = None
    best_ba = -1.0
    for t in _candidate_thresholds(scores):
        ba = balanced_accuracy(predict_with_threshold(scores, t), golds)
        if ba > best_ba:
            best_ba = ba
            best_t = t
    assert best_t is not None
    return best_t


def tune_threshold(records: Sequence[EvalRecord]) -> float:
    """Tune on validation records of a single origin."""
    if not records:
        raise EvaluationError("tuning over empty records")
    origins = {r.origin for r in records}
    if len(origins) > 1:
        raise EvaluationError(f"tuning expects one origin, got {sorted(origins)}")
    return tune_threshold_scores(
        [r.score for r in records], [r.is_inconsistent for r in records]
    )


def tune_thresholds_by_origin(
    records: Sequence[EvalRecord],
) -> dict[str, float]:
    by_origin: dict[str, list[EvalRecord]] = {}
    for r in records:
        by_origin.setdefault(r.origin, []).append(r)
    return {
        origin: tune_threshold(group) for origin, group in sorted(by_origin.items())
    }


def bootstrap_ci(
    records: Sequence[EvalRecord],
    threshold: float,
    n_resamples: int = 1000,
    seed: int = 0,
    level: float = 0.95,
) -> float:
    """Half-width of the central ``level`` percentile interval of
    balanced accuracy over resamples drawn with replacement.

    Each resample gets its own RNG stream keyed on (seed, index), so
    results do not depend on evaluation order. Resamples that lose a
    class are redrawn within their stream.
    """
    if n_resamples < 100:
        raise EvaluationError("n_resamples must be at least 100")
    if not 0.0 < level < 1.0:
        raise EvaluationError("level must be in (0,1)")
    golds = np.array([r.is_inconsistent for r in records], dtype=bool)
    preds = np.array(
        [r.score >= threshold for r in records], dtype=bool
    )
    n = len(golds)
    if n == 0 or golds.all() or not golds.any():
        raise EvaluationError(
            "bootstrap needs records containing both gold classes"
        )
    values = np.empty(n_resamples)
    for i in range(n_resamples):
        rng = np.random.default_rng([seed, i])
        for _ in range(10000):
            idx = rng.integers(0, n, size=n)
            g = golds[idx]
            if g.any() and not g.all():
                break
        else:
            raise EvaluationError("could not draw a two-class resample")
        p = preds[idx]
        tpr = (p & g).sum() / g.sum()
        tnr = (~p & ~g).sum() / (~g).sum()
        values[i] = (tpr + tnr) / 2.0
    lo, hi = np.percentile(values, [(1 - level) * 50, (1 + level) * 50])
    return float((hi - lo) / 2.0)


@dataclass(frozen=True)
class OriginResult:
    origin: str
    threshold: float
    balanced_accuracy: float
    ci_half_width: Optional[float]
    n: int


@dataclass(frozen=True)
class DatasetResult:
    dataset_name: str
    origin: str
    n: int
    balanced_accuracy: Optional[float]  # None when single-class


@dataclass(frozen=True)
class EvalReport:
    origins: tuple[OriginResult, ...]
    average: float
    partial: bool
    breakdown: tuple[DatasetResult, ...]

    def to_dict(self) -> dict:
        return {
            "origins": [
                {
                    "origin": o.origin,
                    "threshold": _json_number(o.threshold),
                    "balanced_accuracy": o.balanced_accuracy,
                    "ci_half_width": o.ci_half_width,
                    "n": o.n,
                }
                for o in self.origins
            ],
            "average": self.average,
            "partial": self.partial,
            "breakdown": [
                {
                    "dataset_name": b.dataset_name,
                    "origin": b.origin,
                    "n": b.n,
                    "balanced_accuracy": b.balanced_accuracy,
                }
                for b in self.breakdown
            ],
        }

    def render_table(self) -> str:
        lines = [
            f"{'origin':<8} {'threshold':>12} {'bal_acc':>8} {'ci_half':>8} {'n':>6}"
        ]
        for o in self.origins:
            ci = f"{o.ci_half_width:.4f}" if o.ci_half_width is not None else "-"
            lines.append(
                f"{o.origin:<8} {o.threshold:>12.4g} {o.balanced_accuracy:>8.4f} "
                f"{ci:>8} {o.n:>6}"
            )
        avg = f"average {'(partial) ' if self.partial else ''}= {self.average:.4f}"
        lines.append(avg)
        if self.breakdown:
            lines.append("")
            lines.append(f"{'dataset':<24} {'origin':<8} {'n':>6} {'bal_acc':>8}")
            for b in self.breakdown:
                ba = (
                    f"{b.balanced_accuracy:.4f}"
                    if b.balanced_accuracy is not None
                    else "-"
                )
                lines.append(f"{b.dataset_name:<24} {b.origin:<8} {b.n:>6} {ba:>8}")
        return "\n".join(lines)


def _json_number(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def evaluate(
    test_records: Sequence[EvalRecord],
    thresholds: Mapping[str, float],
    ci_resamples: Optional[int] = None,
    seed: int = 0,
    level: float = 0.95,
) -> EvalReport:
    """Per-origin balanced accuracy under the tuned thresholds, their
    arithmetic average, and a per-dataset breakdown.

    Every origin with a threshold must appear in the test data and vice
    versa; a report built from fewer than two origins is flagged partial.
    """
    if not test_records:
        raise EvaluationError("no test records")
    by_origin: dict[str, list[EvalRecord]] = {}
    for r in test_records:
        by_origin.setdefault(r.origin, []).append(r)
    missing = sorted(set(thresholds) - set(by_origin))
    if missing:
        raise EvaluationError(f"missing origin in test data: {', '.join(missing)}")
    untuned = sorted(set(by_origin) - set(thresholds))
    if untuned:
        raise EvaluationError(f"no tuned threshold for origin: {', '.join(untuned)}")

    origin_results = []
    for origin, group in sorted(by_origin.items()):
        t = thresholds[origin]
        preds = [r.score >= t for r in group]
        golds = [r.is_inconsistent for r in group]
        ba = balanced_accuracy(preds, golds)
        ci = (
            bootstrap_ci(group, t, ci_resamples, seed=seed, level=level)
            if ci_resamples
            else None
        )
        origin_results.append(OriginResult(origin, t, ba, ci, len(group)))

    average = sum(o.balanced_accuracy for o in origin_results) / len(origin_results)

    breakdown = []
    for origin, group in sorted(by_origin.items()):
        t = thresholds[origin]
        names: dict[str, list[EvalRecord]] = {}
        for r in group:
            names.setdefault(r.dataset_name, []).append(r)
        for name, sub in sorted(names.items()):
            golds = [r.is_inconsistent for r in sub]
            if all(golds) or not any(golds):
                ba = None
            else:
                ba = balanced_accuracy([r.score >= t for r in sub], golds)
            breakdown.append(DatasetResult(name, origin, len(sub), ba))

    return EvalReport(
        origins=tuple(origin_results),
        average=average,
        partial=len(origin_results) < 2,
        breakdown=tuple(breakdown),
    )


class ThresholdClassifier(ClassifierMixin, BaseEstimator):
    """Score thresholding as a scikit-learn classifier.

    fit tunes the cutoff on validation scores; predict labels a score 1
    (inconsistent) when it reaches the cutoff. ``invert_scores`` negates
    inputs first, for metrics where higher means more faithful.
    """

    def __init__(self, invert_scores: bool = False):
        self.invert_scores = invert_scores

    def _scores(self, X) -> np.ndarray:
        arr = np.asarray(X, dtype=float).ravel()
        return -arr if self.invert_scores else arr

    def fit(self, X, y) -> "ThresholdClassifier":
        scores = self._scores(X)
        golds = np.asarray(y).astype(bool)
        self.threshold_ = tune_threshold_scores(list(scores), list(golds))
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X) -> np.ndarray:
        return self._scores(X)

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "threshold_"):
            raise EvaluationError("ThresholdClassifier.predict before fit")
        return (self._scores(X) >= self.threshold_).astype(int)

    def score(self, X, y) -> float:
        return balanced_accuracy(list(self.predict(X).astype(bool)),
                                 list(np.asarray(y).astype(bool)))
