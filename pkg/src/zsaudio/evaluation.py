"""Accuracy, prediction distributions and precision-recall sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import MissingGoldError
from .scores import Prediction


@dataclass(frozen=True)
class PrPoint:
    threshold: float
    precision: float
    recall: float


@dataclass
class EvalReport:
    """Everything reported for one (dataset, model, method) cell."""

    task_id: str
    model_id: str
    method: str
    accuracy: float
    n: int
    class_distribution: np.ndarray
    top1_gap: float
    all_label_gaps: np.ndarray
    pr_curve: list[PrPoint] | None = None
    prompt_id: str | None = None

    def __post_init__(self):
        self.class_distribution = np.asarray(self.class_distribution, np.float64)
        self.all_label_gaps = np.asarray(self.all_label_gaps, np.float64)
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy {self.accuracy} outside [0, 1]")
        if abs(self.class_distribution.sum() - 1.0) > 1e-12:
            raise ValueError("class_distribution must sum to 1 within 1e-12")
        if self.pr_curve is not None:
            for pt in self.pr_curve:
                if not (0.0 <= pt.precision <= 1.0 and 0.0 <= pt.recall <= 1.0):
                    raise ValueError(f"PR point outside [0, 1]: {pt}")

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "model_id": self.model_id,
            "method": self.method,
            "prompt_id": self.prompt_id,
            "accuracy": float(self.accuracy),
            "n": self.n,
            "class_distribution": [float(x) for x in self.class_distribution],
            "calibration": {
                "top1_gap": float(self.top1_gap),
                "all_label_gaps": [float(x) for x in self.all_label_gaps],
            },
            "pr_curve": None
            if self.pr_curve is None
            else [
                {
                    "threshold": pt.threshold,
                    "precision": pt.precision,
                    "recall": pt.recall,
                }
                for pt in self.pr_curve
            ],
        }


@dataclass(frozen=True)
class EvalCore:
    accuracy: float
    n: int
    class_distribution: np.ndarray


def evaluate(
    predictions: Sequence[Prediction],
    golds: Sequence[int | None],
    k: int,
) -> EvalCore:
    """Top-1 accuracy and the per-class distribution of predictions."""
    if len(predictions) != len(golds):
        raise ValueError("predictions and golds must align")
    if not predictions:
        raise ValueError("nothing to evaluate")
    missing = [p.utt_id for p, g in zip(predictions, golds) if g is None]
    if missing:
        raise MissingGoldError(missing)
    pred_idx = np.array([p.class_index for p in predictions], dtype=np.int64)
    gold_idx = np.array(golds, dtype=np.int64)
    accuracy = float((pred_idx == gold_idx).mean())
    distribution = np.bincount(pred_idx, minlength=k) / len(pred_idx)
    return EvalCore(accuracy, len(predictions), distribution)


def random_baseline(k: int) -> float:
    """Uniform-guess accuracy on balanced classes."""
    if k < 2:
        raise ValueError("k must be >= 2")
    return 1.0 / k


def precision_recall_curve(
    probs: np.ndarray,
    golds: Sequence[int],
    positive_class: int,
) -> list[PrPoint]:
    """Precision/recall of the positive class at every observed threshold.

    Thresholds are the distinct positive-class probabilities (no binning or
    interpolation); a row is predicted positive when its score is >= the
    threshold.  Points come back in ascending threshold order, so recall is
    non-increasing along the list.
    """
    probs = np.asarray(probs, dtype=np.float64)
    golds = np.asarray(golds, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[1] != 2:
        raise ValueError("precision_recall_curve expects an N x 2 posterior table")
    if probs.shape[0] != len(golds):
        raise ValueError("posterior table and golds must align")
    if positive_class not in (0, 1):
        raise ValueError("positive_class must be 0 or 1")
    scores = probs[:, positive_class]
    is_pos = golds == positive_class
    n_pos = int(is_pos.sum())
    if n_pos == 0:
        raise ValueError("no positive golds; cannot sweep recall")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    cum_tp = np.cumsum(is_pos[order])
    points = []
    # Descending scan; each distinct value's prediction set is the prefix
    # through the last row tied with it.
    i = 0
    n = len(scores)
    while i < n:
        j = i
        while j + 1 < n and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        tp = int(cum_tp[j])
        n_pred = j + 1
        points.append(
            PrPoint(
                threshold=float(sorted_scores[i]),
                precision=tp / n_pred,
                recall=tp / n_pos,
            )
        )
        i = j + 1
    points.reverse()
    return points
