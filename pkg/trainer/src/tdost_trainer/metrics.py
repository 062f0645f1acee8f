"""Accuracy and support-weighted F1 over predicted label sequences."""

from __future__ import annotations

from collections import Counter


def accuracy(y_true: list[str], y_pred: list[str]) -> float:
    if len(y_true) != len(y_pred):
        raise ValueError("prediction count does not match truth count")
    if not y_true:
        raise ValueError("cannot score an empty evaluation set")
    return sum(t == p for t, p in zip(y_true, y_pred)) / len(y_true)


def weighted_f1(y_true: list[str], y_pred: list[str],
                labels: list[str] | None = None) -> float:
    """Per-class F1 averaged with class support as the weight."""
    if len(y_true) != len(y_pred):
        raise ValueError("prediction count does not match truth count")
    if not y_true:
        raise ValueError("cannot score an empty evaluation set")
    if labels is None:
        labels = sorted(set(y_true) | set(y_pred))
    support = Counter(y_true)
    if not any(support[l] for l in labels):
        raise ValueError("no true labels among the scored classes")
    tp: Counter = Counter()
    fp: Counter = Counter()
    fn: Counter = Counter()
    for t, p in zip(y_true, y_pred):
        if t == p:
            tp[t] += 1
        else:
            fp[p] += 1
            fn[t] += 1
    total = sum(support[l] for l in labels)
    score = 0.0
    for label in labels:
        if not support[label]:
            continue
        denom_p = tp[label] + fp[label]
        denom_r = tp[label] + fn[label]
        precision = tp[label] / denom_p if denom_p else 0.0
        recall = tp[label] / denom_r if denom_r else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        score += support[label] / total * f1
    return score
