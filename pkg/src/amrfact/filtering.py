"""Two-threshold validity decision for perturbed candidates.

A candidate is kept iff its entailment score stays below the ceiling
tau1 (it must not still be inferable from the original summary) and its
relevance score stays above the floor tau2 (it must still talk about
the document). Both inequalities are strict; boundary values reject.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .corpus import NegativeCandidate
from .errors import ScoreJoinError
from .scoring import ScoreRecord

REJECT_ENTAILMENT = "entailment-too-high"
REJECT_RELEVANCE = "relevance-too-low"
REJECT_BOTH = "both"


@dataclass(frozen=True)
class FilterConfig:
    tau1: float = 0.9
    tau2: float = -1.8

    def __post_init__(self):
        if not 0.0 < self.tau1 <= 1.0:
            raise ValueError(f"tau1 must be in (0,1], got {self.tau1}")
        if not math.isfinite(self.tau2):
            raise ValueError("tau2 must be finite")


def decide(score: ScoreRecord, cfg: FilterConfig) -> bool:
    """True iff entailment < tau1 and relevance > tau2, both strict."""
    return score.entailment < cfg.tau1 and score.relevance > cfg.tau2


@dataclass(frozen=True)
class Rejection:
    candidate: NegativeCandidate
    reason: str


def filter_batch(
    candidates: Sequence[NegativeCandidate],
    scores: Sequence[ScoreRecord],
    cfg: FilterConfig,
) -> tuple[list[NegativeCandidate], list[Rejection]]:
    """Partition candidates into (valid, rejected-with-reason).

    Scores are joined on candidate_id; a missing or duplicate score is a
    :class:`ScoreJoinError` naming the id. Input order is preserved in
    both halves.
    """
    table: dict[str, ScoreRecord] = {}
    for s in scores:
        if s.candidate_id in table:
            raise ScoreJoinError(f"duplicate score for candidate {s.candidate_id!r}")
        table[s.candidate_id] = s

    valid: list[NegativeCandidate] = []
    rejected: list[Rejection] = []
    for c in candidates:
        score = table.get(c.candidate_id)
        if score is None:
            raise ScoreJoinError(f"no score for candidate {c.candidate_id!r}")
        if decide(score, cfg):
            valid.append(c)
            continue
        too_entailed = score.entailment >= cfg.tau1
        off_topic = score.relevance <= cfg.tau2
        if too_entailed and off_topic:
            reason = REJECT_BOTH
        elif too_entailed:
            reason = REJECT_ENTAILMENT
        else:
            reason = REJECT_RELEVANCE
        rejected.append(Rejection(c, reason))
    return valid, rejected


class NegativeFilter(BaseEstimator):
    """The validity decision as a fixed-threshold scikit-learn classifier.

    X rows are (entailment, relevance) pairs; predict returns 1 for
    candidates the filter keeps. fit only validates the thresholds, so
    the estimator composes with pipelines and grid search.
    """

    def __init__(self, tau1: float = 0.9, tau2: float = -1.8):
        self.tau1 = tau1
        self.tau2 = tau2

    def fit(self, X=None, y=None) -> "NegativeFilter":
        self.config_ = FilterConfig(self.tau1, self.tau2)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "config_"):
            self.fit()
        arr = np.asarray(X, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("X must be an (n, 2) array of (entailment, relevance)")
        return (
            (arr[:, 0] < self.config_.tau1) & (arr[:, 1] > self.config_.tau2)
        ).astype(int)
