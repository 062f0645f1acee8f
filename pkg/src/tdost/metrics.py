"""Classification metrics computed from scratch.

Weighted F1 follows the support-weighted convention: per-class F1 scores
averaged with weights proportional to the true-label counts, classes with
zero predicted and true positives contributing an F1 of zero.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass


def accuracy(y_true: list, y_pred: list) -> float:
    if len(y_true) != len(y_pred):
        raise ValueError("label sequences differ in length")
    if not y_true:
        raise ValueError("cannot score an empty set")
    hits = sum(1 for t, p in zip(y_true, y_pred) if t == p)
    return hits / len(y_true)


@dataclass(frozen=True, slots=True)
class ClassScores:
    label: str
    support: int
    precision: float
    recall: float
    f1: float


def per_class_scores(y_true: list, y_pred: list, labels: list | None = None) -> list[ClassScores]:
    if len(y_true) != len(y_pred):
        raise ValueError("label sequences differ in length")
    if labels is None:
        labels = sorted(set(y_true) | set(y_pred))
    true_counts = Counter(y_true)
    pred_counts = Counter(y_pred)
    hit_counts = Counter(t for t, p in zip(y_true, y_pred) if t == p)
    scores = []
    for label in labels:
        tp = hit_counts[label]
        precision = tp / pred_counts[label] if pred_counts[label] else 0.0
        recall = tp / true_counts[label] if true_counts[label] else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        scores.append(
            ClassScores(
                label=label,
                support=true_counts[label],
                precision=precision,
                recall=recall,
                f1=f1,
            )
        )
    return scores


def weighted_f1(y_true: list, y_pred: list, labels: list | None = None) -> float:
    if not y_true:
        raise ValueError("cannot score an empty set")
    scores = per_class_scores(y_true, y_pred, labels)
    total = sum(s.support for s in scores)
    if total == 0:
        raise ValueError("no true labels among the scored classes")
    return sum(s.f1 * s.support for s in scores) / total


def mean_and_std(values: list[float]) -> tuple[float, float]:
    """Mean and population standard deviation, as reported over folds."""
    if not values:
        raise ValueError("no values")
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, var**0.5
