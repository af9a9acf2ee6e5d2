"""Multinomial Naive Bayes over discretized feature bins.

Likelihoods are add-one smoothed bin frequencies per class, priors are
maximum-likelihood class frequencies, and scoring runs in log space. A
bin index never seen in training still gets positive probability through
the smoothing, so posteriors are always well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EngageError


@dataclass(frozen=True, eq=False)
class NBClassifier:
    classes: tuple[str | int, ...]
    class_counts: np.ndarray
    bin_counts: tuple[np.ndarray, ...]  # per feature: (n_classes, n_bins)
    n_bins: tuple[int, ...]

    @property
    def n_features(self) -> int:
        return len(self.bin_counts)

    @property
    def n_samples(self) -> int:
        return int(self.class_counts.sum())


def _check_bins(bins: np.ndarray) -> np.ndarray:
    data = np.asarray(bins)
    if data.ndim != 2 or data.size == 0:
        raise EngageError("bin matrix must be 2-D and non-empty")
    if not np.issubdtype(data.dtype, np.integer) or np.any(data < 0):
        raise EngageError("bin indices must be nonnegative integers")
    return data.astype(np.int64)


def nb_train(
    bins: np.ndarray,
    labels: Sequence[str | int],
    n_bins: Sequence[int] | None = None,
) -> NBClassifier:
    """Fit class priors and smoothed per-feature bin frequencies."""
    data = _check_bins(bins)
    if data.shape[0] != len(labels):
        raise EngageError("one label per row required")
    classes = tuple(sorted(set(labels)))
    class_idx = {c: i for i, c in enumerate(classes)}
    y = np.fromiter((class_idx[l] for l in labels), np.int64, len(labels))
    if n_bins is None:
        sizes = tuple(int(data[:, f].max()) + 1 for f in range(data.shape[1]))
    else:
        sizes = tuple(int(b) for b in n_bins)
        if len(sizes) != data.shape[1]:
            raise EngageError("n_bins must list one size per feature")
        for f, size in enumerate(sizes):
            if size < 1 or int(data[:, f].max()) >= size:
                raise EngageError(f"feature {f}: bin index out of declared range")
    class_counts = np.bincount(y, minlength=len(classes)).astype(np.int64)
    bin_counts = []
    for f in range(data.shape[1]):
        table = np.zeros((len(classes), sizes[f]), np.int64)
        np.add.at(table, (y, data[:, f]), 1)
        bin_counts.append(table)
    return NBClassifier(
        classes=classes,
        class_counts=class_counts,
        bin_counts=tuple(bin_counts),
        n_bins=sizes,
    )


def _log_joint(clf: NBClassifier, x: np.ndarray) -> np.ndarray:
    n = clf.n_samples
    scores = np.log(clf.class_counts / n)
    for f, bin_index in enumerate(x):
        table = clf.bin_counts[f]
        size = clf.n_bins[f]
        if 0 <= bin_index < size:
            counts = table[:, bin_index]
        else:
            counts = np.zeros(len(clf.classes), np.int64)
        scores = scores + np.log(counts + 1) - np.log(clf.class_counts + size)
    return scores


def nb_classify(clf: NBClassifier, x: Sequence[int]) -> tuple[str, np.ndarray]:
    """Predicted class and the full posterior vector (sums to 1)."""
    sample = np.asarray(x, np.int64)
    if sample.shape != (clf.n_features,):
        raise EngageError(f"sample must have {clf.n_features} features")
    if np.any(sample < 0):
        raise EngageError("bin indices must be nonnegative")
    log_scores = _log_joint(clf, sample)
    log_scores -= log_scores.max()
    probs = np.exp(log_scores)
    probs /= probs.sum()
    return clf.classes[int(np.argmax(probs))], probs


def nb_classify_many(clf: NBClassifier, bins: np.ndarray) -> list[str]:
    data = _check_bins(bins)
    return [nb_classify(clf, row)[0] for row in data]
