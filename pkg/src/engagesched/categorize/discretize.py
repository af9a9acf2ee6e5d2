"""Supervised discretization of real features into bins via recursive
entropy-minimizing splits with an MDL stopping rule.

Each feature is treated independently: candidate cuts are midpoints
between adjacent distinct sorted values, the best cut minimizes the
class-label entropy of the two halves, and a cut is kept only when its
information gain clears the minimum-description-length threshold. Kept
halves are split recursively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EngageError


@dataclass(frozen=True, slots=True)
class DiscretizationModel:
    """Per-feature sorted cut points; feature i maps to len(cuts[i])+1 bins."""

    cut_points: tuple[tuple[float, ...], ...]

    @property
    def n_features(self) -> int:
        return len(self.cut_points)

    def n_bins(self) -> tuple[int, ...]:
        return tuple(len(c) + 1 for c in self.cut_points)


def _entropy(labels: np.ndarray) -> float:
    """Shannon entropy (bits) of an integer label array."""
    if labels.size == 0:
        return 0.0
    counts = np.bincount(labels)
    counts = counts[counts > 0]
    p = counts / labels.size
    return float(-(p * np.log2(p)).sum())


def _split_gain(labels: np.ndarray, left: np.ndarray, right: np.ndarray) -> tuple[float, float]:
    """(information gain, MDL acceptance threshold) for one binary split."""
    n = labels.size
    ent = _entropy(labels)
    ent_l = _entropy(left)
    ent_r = _entropy(right)
    gain = ent - (left.size / n) * ent_l - (right.size / n) * ent_r
    c = np.unique(labels).size
    c_l = np.unique(left).size
    c_r = np.unique(right).size
    delta = math.log2(3**c - 2) - (c * ent - c_l * ent_l - c_r * ent_r)
    threshold = (math.log2(n - 1) + delta) / n
    return gain, threshold


def _best_cut(values: np.ndarray, labels: np.ndarray) -> float | None:
    """The gain-maximizing cut if it clears the MDL threshold, else None.

    Candidates are midpoints between adjacent distinct values; ties on
    gain resolve to the smallest cut value. The MDL test applies to the
    chosen cut only.
    """
    n = values.size
    if n < 2 or np.unique(labels).size < 2:
        return None
    order = np.argsort(values, kind="stable")
    v = values[order]
    y = labels[order]
    best = None  # (gain, cut, threshold)
    for i in range(n - 1):
        if v[i] == v[i + 1]:
            continue
        cut = (float(v[i]) + float(v[i + 1])) / 2.0
        gain, threshold = _split_gain(y, y[: i + 1], y[i + 1 :])
        if best is None or gain > best[0] + 1e-12:
            best = (gain, cut, threshold)
    if best is None or best[0] <= best[2]:
        return None
    return best[1]


def _recurse(values: np.ndarray, labels: np.ndarray, cuts: list[float]) -> None:
    cut = _best_cut(values, labels)
    if cut is None:
        return
    cuts.append(cut)
    mask = values <= cut
    _recurse(values[mask], labels[mask], cuts)
    _recurse(values[~mask], labels[~mask], cuts)


def _encode_labels(classes: Sequence[str]) -> np.ndarray:
    mapping = {label: i for i, label in enumerate(sorted(set(classes)))}
    return np.fromiter((mapping[c] for c in classes), np.int64, len(classes))


def discretize_fit(matrix: np.ndarray, classes: Sequence[str]) -> DiscretizationModel:
    """Learn cut points for every feature column against the class labels.

    A single distinct class yields a model with no cuts anywhere (every
    feature collapses to one bin).
    """
    data = np.asarray(matrix, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2:
        raise EngageError("discretization needs a 2-D matrix with >= 2 rows")
    if data.shape[0] != len(classes):
        raise EngageError("one class label per row required")
    if np.isnan(data).any():
        raise EngageError("discretization input must not contain missing values")
    labels = _encode_labels(classes)
    all_cuts = []
    for j in range(data.shape[1]):
        cuts: list[float] = []
        _recurse(data[:, j], labels, cuts)
        all_cuts.append(tuple(sorted(cuts)))
    return DiscretizationModel(cut_points=tuple(all_cuts))


def discretize_apply(model: DiscretizationModel, matrix: np.ndarray) -> np.ndarray:
    """Map each value to its bin index (0-based) under the fitted cuts."""
    data = np.asarray(matrix, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != model.n_features:
        raise EngageError(
            f"matrix has {data.shape[-1] if data.ndim else 0} features, "
            f"model expects {model.n_features}"
        )
    if np.isnan(data).any():
        raise EngageError("discretization input must not contain missing values")
    out = np.empty(data.shape, np.int64)
    for j, cuts in enumerate(model.cut_points):
        # values equal to a cut fall in the lower bin, matching the
        # fit-time convention that the left half is `value <= cut`
        out[:, j] = np.searchsorted(np.asarray(cuts), data[:, j], side="left")
    return out
