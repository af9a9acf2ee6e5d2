"""Grouping pages by reaction-profile similarity: PAM k-medoid + elbow.

Clustering operates on a pairwise similarity matrix (symmetric, unit
diagonal) and works index-based; callers keep the index -> page-id
mapping.  Dissimilarity is 1 - similarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EngageError
from ..evaluate import correlation
from ..ingest import EventStore
from ..profiles import cumulative_profile

_MATRIX_TOL = 1e-9
_IMPROVEMENT_TOL = 1e-12


@dataclass(frozen=True, eq=False, slots=True)
class KMedoidResult:
    """Clustering outcome over n points.

    ``medoids`` are sorted point indices; ``assignment[i]`` is the
    category id in [1, k] of point i, category j+1 belonging to the
    j-th sorted medoid.
    """

    medoids: tuple[int, ...]
    assignment: np.ndarray
    objective: float
    swaps: int


def profile_similarity_matrix(
    store: EventStore,
    page_ids: tuple[str, ...] | list[str] | None = None,
    attribution: str = "own",
) -> tuple[list[str], np.ndarray]:
    """Pairwise Pearson similarity of cumulative reaction profiles.

    Pairs where either profile is constant (e.g. a page without
    reactions) get similarity 0.0; the diagonal is 1 by definition.
    """
    ids = list(store.page_ids if page_ids is None else page_ids)
    vectors = np.stack(
        [
            cumulative_profile(store, pid, kind="reaction", attribution=attribution)
            .counts.astype(np.float64)
            for pid in ids
        ]
    )
    n = len(ids)
    varying = np.ptp(vectors, axis=1) > 0.0
    sim = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if varying[i] and varying[j]:
                value = correlation(vectors[i], vectors[j])
                sim[i, j] = sim[j, i] = value
    np.fill_diagonal(sim, 1.0)
    return ids, sim


def _check_similarity(sim: np.ndarray) -> None:
    if sim.ndim != 2 or sim.shape[0] != sim.shape[1] or sim.shape[0] == 0:
        raise EngageError("similarity must be a non-empty square matrix")
    if not np.allclose(sim, sim.T, atol=_MATRIX_TOL):
        raise EngageError("similarity matrix must be symmetric")
    if not np.allclose(np.diag(sim), 1.0, atol=_MATRIX_TOL):
        raise EngageError("similarity matrix must have a unit diagonal")


def _objective(D: np.ndarray, medoids: list[int]) -> float:
    return float(D[:, medoids].min(axis=1).sum())


def _greedy_init(D: np.ndarray, k: int) -> list[int]:
    """PAM build phase: most central point first, then best reductions."""
    n = D.shape[0]
    medoids = [int(np.argmin(D.sum(axis=1)))]
    nearest = D[:, medoids[0]].copy()
    while len(medoids) < k:
        best_c, best_obj = -1, np.inf
        for c in range(n):
            if c in medoids:
                continue
            obj = float(np.minimum(nearest, D[:, c]).sum())
            if obj < best_obj - _IMPROVEMENT_TOL:
                best_c, best_obj = c, obj
        medoids.append(best_c)
        nearest = np.minimum(nearest, D[:, best_c])
    return sorted(medoids)


def _swap_phase(D: np.ndarray, medoids: list[int]) -> tuple[list[int], float, int]:
    """Apply best strictly-improving (medoid, non-medoid) exchanges."""
    n = D.shape[0]
    medoids = sorted(medoids)
    obj = _objective(D, medoids)
    swaps = 0
    while True:
        best_swap, best_obj = None, obj
        for mi in range(len(medoids)):
            rest = medoids[:mi] + medoids[mi + 1 :]
            for h in range(n):
                if h in medoids:
                    continue
                cand = _objective(D, rest + [h])
                if cand < best_obj - _IMPROVEMENT_TOL:
                    best_swap, best_obj = (mi, h), cand
        if best_swap is None:
            return medoids, obj, swaps
        mi, h = best_swap
        medoids = sorted(medoids[:mi] + medoids[mi + 1 :] + [h])
        assert best_obj <= obj + _MATRIX_TOL, "swap increased the clustering objective"
        obj = best_obj
        swaps += 1


def _assign(D: np.ndarray, medoids: list[int]) -> np.ndarray:
    assignment = np.argmin(D[:, medoids], axis=1) + 1
    # distance ties go to the earliest sorted medoid, except that a
    # medoid always belongs to its own category
    for category, m in enumerate(medoids, start=1):
        assignment[m] = category
    return assignment


def kmedoid(
    similarity: np.ndarray,
    k: int,
    restarts: int = 0,
    seed: int | None = None,
) -> KMedoidResult:
    """PAM-style k-medoid clustering of a similarity matrix.

    Deterministic: greedy build phase plus best-improving swaps, ties
    broken by lowest index.  ``restarts`` adds that many random
    initializations (seeded) and keeps the best objective, preferring
    the deterministic solution on ties.
    """
    sim = np.asarray(similarity, np.float64)
    _check_similarity(sim)
    n = sim.shape[0]
    if not 1 <= k <= n:
        raise EngageError(f"cluster count {k} must be in [1, {n}]")
    D = np.clip(1.0 - sim, 0.0, None)
    np.fill_diagonal(D, 0.0)
    best = _swap_phase(D, _greedy_init(D, k))
    if restarts > 0:
        rng = np.random.default_rng(seed)
        for _ in range(restarts):
            init = sorted(int(i) for i in rng.choice(n, size=k, replace=False))
            cand = _swap_phase(D, init)
            if cand[1] < best[1] - _IMPROVEMENT_TOL:
                best = cand
    medoids, objective, swaps = best
    return KMedoidResult(
        medoids=tuple(medoids),
        assignment=_assign(D, medoids),
        objective=objective,
        swaps=swaps,
    )


def dissimilarity_curve(
    similarity: np.ndarray,
    k_range: tuple[int, int],
    restarts: int = 0,
    seed: int | None = None,
) -> np.ndarray:
    """Total clustering objective for each k in the inclusive range."""
    sim = np.asarray(similarity, np.float64)
    lo, hi = k_range
    if not 1 <= lo <= hi <= sim.shape[0]:
        raise EngageError(f"k range [{lo}, {hi}] outside [1, {sim.shape[0]}]")
    return np.array(
        [kmedoid(sim, k, restarts=restarts, seed=seed).objective for k in range(lo, hi + 1)]
    )


def elbow_k(objectives: np.ndarray, k_start: int) -> int:
    """k of greatest curvature on an objective-vs-k curve.

    Curvature at an interior k is obj[k-1] - 2*obj[k] + obj[k+1]; a
    flat curve falls back to the smallest k, as do curvature ties.
    """
    obj = np.asarray(objectives, np.float64)
    if obj.ndim != 1 or obj.size < 3:
        raise EngageError("elbow selection needs at least 3 curve points")
    if float(obj.max() - obj.min()) < 1e-12:
        return k_start
    curvature = obj[:-2] - 2.0 * obj[1:-1] + obj[2:]
    return k_start + 1 + int(np.argmax(curvature))


def choose_k(
    similarity: np.ndarray,
    k_range: tuple[int, int],
    restarts: int = 0,
    seed: int | None = None,
) -> int:
    """Pick the category count by the elbow of the objective curve."""
    curve = dissimilarity_curve(similarity, k_range, restarts=restarts, seed=seed)
    return elbow_k(curve, k_range[0])
