"""Greedy forward feature selection scored by leave-one-out NB accuracy.

At each step the candidate feature that maximizes leave-one-out accuracy
of the Naive Bayes classifier joins the subset; selection stops when the
best candidate improves accuracy by less than epsilon or the feature
budget is reached. The first feature is always kept so the result is
never empty.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EngageError
from .nb import _check_bins

DEFAULT_EPSILON = 0.005


@dataclass(frozen=True, slots=True)
class WrapperResult:
    """Selected feature indices (in selection order) and the accuracy
    reached after each addition."""

    selected: tuple[int, ...]
    accuracies: tuple[float, ...]


def _encode(labels: Sequence[str | int]) -> tuple[np.ndarray, int]:
    classes = sorted(set(labels))
    idx = {c: i for i, c in enumerate(classes)}
    return np.fromiter((idx[l] for l in labels), np.int64, len(labels)), len(classes)


def loo_accuracy(
    bins: np.ndarray,
    labels: Sequence[str | int],
    features: Sequence[int] | None = None,
    n_bins: Sequence[int] | None = None,
) -> float:
    """Leave-one-out NB accuracy on the given feature subset.

    Counts are built once and the held-out sample's contribution is
    subtracted per evaluation, so each prediction trains on the other
    n-1 rows exactly.
    """
    data = _check_bins(bins)
    n = data.shape[0]
    if n != len(labels):
        raise EngageError("one label per row required")
    if n < 2:
        raise EngageError("leave-one-out needs at least two rows")
    y, n_classes = _encode(labels)
    if features is None:
        features = tuple(range(data.shape[1]))
    else:
        features = tuple(features)
        if any(not 0 <= f < data.shape[1] for f in features):
            raise EngageError("feature index out of range")
    if n_bins is None:
        sizes = [int(data[:, f].max()) + 1 for f in features]
    else:
        sizes = [int(n_bins[f]) for f in features]

    class_counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    tables = []
    for f, size in zip(features, sizes):
        table = np.zeros((n_classes, size), np.float64)
        np.add.at(table, (y, data[:, f]), 1)
        tables.append(table)

    correct = 0
    for i in range(n):
        true = y[i]
        counts = class_counts.copy()
        counts[true] -= 1
        with np.errstate(divide="ignore"):
            scores = np.log(counts / (n - 1))
        for table, size, f in zip(tables, sizes, features):
            col = table[:, data[i, f]].copy()
            col[true] -= 1
            scores = scores + np.log(col + 1) - np.log(counts + size)
        if int(np.argmax(scores)) == true:
            correct += 1
    return correct / n


def wrapper_select(
    bins: np.ndarray,
    labels: Sequence[str | int],
    max_features: int | None = None,
    epsilon: float = DEFAULT_EPSILON,
    n_bins: Sequence[int] | None = None,
) -> WrapperResult:
    """Greedy forward selection against leave-one-out NB accuracy.

    Ties on accuracy go to the lowest feature index. The first feature is
    accepted unconditionally; afterwards selection stops as soon as the
    best remaining candidate gains less than epsilon.
    """
    data = _check_bins(bins)
    n_features = data.shape[1]
    if n_features == 0:
        raise EngageError("no candidate features")
    if len(set(labels)) < 2:
        raise EngageError("feature selection needs at least two classes")
    if max_features is None:
        max_features = n_features
    if not 1 <= max_features <= n_features:
        raise EngageError(f"max_features must be in [1, {n_features}]")

    selected: list[int] = []
    accuracies: list[float] = []
    current = 0.0
    while len(selected) < max_features:
        best_feature = -1
        best_acc = -1.0
        for f in range(n_features):
            if f in selected:
                continue
            acc = loo_accuracy(data, labels, (*selected, f), n_bins)
            if acc > best_acc + 1e-12:
                best_acc = acc
                best_feature = f
        if best_feature < 0:
            break
        if selected and best_acc - current < epsilon:
            break
        selected.append(best_feature)
        accuracies.append(best_acc)
        current = best_acc
    return WrapperResult(selected=tuple(selected), accuracies=tuple(accuracies))
