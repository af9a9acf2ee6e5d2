"""k-medoid clustering, elbow selection, profile similarity."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import adjusted_rand_score

from engagesched.categorize.cluster import (
    KMedoidResult,
    choose_k,
    dissimilarity_curve,
    elbow_k,
    kmedoid,
    profile_similarity_matrix,
)
from engagesched.errors import EngageError

from conftest import store_with_reactions


def random_similarity(rng, n, dim=6):
    """Valid similarity matrix from random feature vectors."""
    vectors = rng.random((n, dim))
    return np.corrcoef(vectors)


def banded_profiles(rng, n_groups, per_group, width=19, noise=0.5):
    """Each group concentrates its reactions on a disjoint bucket band.

    Across-group dissimilarity is then roughly equal for every pair, so
    the objective curve drops linearly until k reaches the group count
    and the elbow is sharp.
    """
    rows, labels = [], []
    for g in range(n_groups):
        base = np.zeros(96)
        start = g * width
        base[start : start + width] = 100.0
        for _ in range(per_group):
            rows.append(base + rng.normal(0.0, noise, 96))
            labels.append(g)
    return np.array(rows), np.array(labels)


class TestKMedoid:
    def test_k1_matches_exhaustive_search(self):
        rng = np.random.default_rng(411)
        for trial in range(10):
            n = int(rng.integers(8, 31))
            sim = random_similarity(rng, n)
            D = np.clip(1.0 - sim, 0.0, None)
            np.fill_diagonal(D, 0.0)
            totals = D.sum(axis=0)
            result = kmedoid(sim, k=1)
            assert result.medoids == (int(np.argmin(totals)),), f"trial {trial}"
            assert result.objective == pytest.approx(float(totals.min()), abs=1e-12)

    def test_identical_points_any_k_zero_objective(self):
        sim = np.ones((6, 6))
        for k in (1, 2, 3):
            result = kmedoid(sim, k=k)
            assert result.objective == 0.0
            assert result.medoids == tuple(range(k))

    def test_single_point(self):
        result = kmedoid(np.array([[1.0]]), k=1)
        assert result.medoids == (0,)
        assert list(result.assignment) == [1]
        assert result.objective == 0.0

    def test_planted_opposite_peaks_recovered_exactly(self):
        x = np.arange(96)
        rng = np.random.default_rng(92)
        rows, truth = [], []
        for g, peak in enumerate((20, 68)):
            base = 100.0 * (1.0 + np.sin(2.0 * np.pi * (x - peak) / 96.0))
            for _ in range(10):
                rows.append(base + rng.normal(0.0, 1.0, 96))
                truth.append(g)
        sim = np.corrcoef(np.array(rows))
        result = kmedoid(sim, k=2)
        assert adjusted_rand_score(truth, result.assignment) == 1.0

    def test_medoids_belong_to_their_own_categories(self):
        rng = np.random.default_rng(5)
        sim = random_similarity(rng, 20)
        result = kmedoid(sim, k=4)
        assert result.medoids == tuple(sorted(set(result.medoids)))
        for category, m in enumerate(result.medoids, start=1):
            assert result.assignment[m] == category
        assert set(result.assignment) <= {1, 2, 3, 4}

    def test_assignment_is_nearest_medoid(self):
        rng = np.random.default_rng(17)
        sim = random_similarity(rng, 15)
        D = np.clip(1.0 - sim, 0.0, None)
        np.fill_diagonal(D, 0.0)
        result = kmedoid(sim, k=3)
        for i in range(15):
            if i in result.medoids:
                continue
            assigned = result.medoids[result.assignment[i] - 1]
            best = min(D[i, m] for m in result.medoids)
            assert D[i, assigned] == pytest.approx(best, abs=1e-15)

    def test_objective_equals_sum_of_nearest_distances(self):
        rng = np.random.default_rng(23)
        sim = random_similarity(rng, 18)
        D = np.clip(1.0 - sim, 0.0, None)
        np.fill_diagonal(D, 0.0)
        result = kmedoid(sim, k=3)
        expected = D[:, list(result.medoids)].min(axis=1).sum()
        assert result.objective == pytest.approx(float(expected), abs=1e-12)

    def test_deterministic_across_runs(self):
        rng = np.random.default_rng(31)
        sim = random_similarity(rng, 16)
        first = kmedoid(sim, k=3)
        second = kmedoid(sim, k=3)
        assert first.medoids == second.medoids
        assert np.array_equal(first.assignment, second.assignment)
        assert first.objective == second.objective
        with_restarts = [kmedoid(sim, k=3, restarts=4, seed=9) for _ in range(2)]
        assert with_restarts[0].medoids == with_restarts[1].medoids
        assert with_restarts[0].objective == with_restarts[1].objective

    def test_restarts_never_hurt(self):
        rng = np.random.default_rng(47)
        for _ in range(5):
            sim = random_similarity(rng, 14)
            plain = kmedoid(sim, k=3).objective
            retried = kmedoid(sim, k=3, restarts=6, seed=2).objective
            assert retried <= plain + 1e-12

    def test_input_validation(self):
        sim = np.ones((4, 4))
        with pytest.raises(EngageError):
            kmedoid(sim, k=0)
        with pytest.raises(EngageError):
            kmedoid(sim, k=5)
        with pytest.raises(EngageError):
            kmedoid(np.ones((3, 4)), k=1)
        lopsided = np.eye(4)
        lopsided[0, 1] = 0.9
        with pytest.raises(EngageError):
            kmedoid(lopsided, k=1)
        bad_diag = np.ones((4, 4)) * 0.5
        with pytest.raises(EngageError):
            kmedoid(bad_diag, k=1)


class TestElbow:
    def test_three_planted_groups(self):
        rng = np.random.default_rng(61)
        rows, _ = banded_profiles(rng, n_groups=3, per_group=8)
        sim = np.corrcoef(rows)
        assert choose_k(sim, (1, 8)) == 3

    def test_five_planted_groups(self):
        rng = np.random.default_rng(62)
        rows, _ = banded_profiles(rng, n_groups=5, per_group=6)
        sim = np.corrcoef(rows)
        assert choose_k(sim, (1, 10)) == 5

    def test_flat_curve_falls_back_to_smallest_k(self):
        sim = np.ones((8, 8))
        assert choose_k(sim, (1, 5)) == 1

    def test_range_too_narrow(self):
        sim = np.eye(5)
        with pytest.raises(EngageError):
            choose_k(sim, (1, 2))

    def test_range_outside_point_count(self):
        sim = np.eye(4)
        with pytest.raises(EngageError):
            dissimilarity_curve(sim, (1, 5))
        with pytest.raises(EngageError):
            dissimilarity_curve(sim, (0, 3))

    def test_curve_is_objective_per_k(self):
        rng = np.random.default_rng(71)
        sim = random_similarity(rng, 10)
        curve = dissimilarity_curve(sim, (1, 4))
        expected = [kmedoid(sim, k).objective for k in (1, 2, 3, 4)]
        assert np.allclose(curve, expected)

    def test_elbow_curvature_and_tiebreak(self):
        # curvature 2 at both k=2 and k=3; tie -> smallest
        assert elbow_k(np.array([5.0, 2.0, 1.0, 2.0]), 1) == 2
        assert elbow_k(np.array([9.0, 5.0, 3.0, 1.0]), 2) == 3
        assert elbow_k(np.array([4.0, 4.0, 4.0]), 3) == 3
        with pytest.raises(EngageError):
            elbow_k(np.array([1.0, 2.0]), 1)


class TestProfileSimilarity:
    def test_matches_corrcoef_oracle(self):
        store = store_with_reactions(
            {
                "pa": {1: 5, 10: 2, 40: 1},
                "pb": {1: 4, 10: 3, 80: 2},
                "pc": {40: 6, 50: 1, 96: 3},
            }
        )
        ids, sim = profile_similarity_matrix(store)
        assert ids == ["pa", "pb", "pc"]
        vectors = np.zeros((3, 96))
        for row, spec in enumerate(
            ({1: 5, 10: 2, 40: 1}, {1: 4, 10: 3, 80: 2}, {40: 6, 50: 1, 96: 3})
        ):
            for bucket, count in spec.items():
                vectors[row, bucket - 1] = count
        expected = np.corrcoef(vectors)
        assert np.allclose(sim, expected, atol=1e-12)
        assert np.allclose(sim, sim.T)
        assert np.allclose(np.diag(sim), 1.0)

    def test_constant_profile_pairs_get_zero(self):
        store = store_with_reactions({"pa": {1: 5, 2: 3}, "pb": {}, "pc": {7: 4, 9: 1}})
        ids, sim = profile_similarity_matrix(store)
        row = ids.index("pb")
        for j in range(3):
            if j != row:
                assert sim[row, j] == 0.0
                assert sim[j, row] == 0.0
        assert sim[row, row] == 1.0

    def test_explicit_page_order_is_kept(self):
        store = store_with_reactions({"pa": {1: 5, 3: 1}, "pb": {9: 2, 20: 4}})
        ids, _ = profile_similarity_matrix(store, page_ids=("pb", "pa"))
        assert ids == ["pb", "pa"]

    def test_feeds_kmedoid_directly(self):
        store = store_with_reactions(
            {
                "a1": {10: 50, 11: 40},
                "a2": {10: 45, 11: 42},
                "b1": {70: 50, 71: 40},
                "b2": {70: 44, 71: 41},
            }
        )
        ids, sim = profile_similarity_matrix(store)
        result = kmedoid(sim, k=2)
        groups = {}
        for pid, category in zip(ids, result.assignment):
            groups.setdefault(category, set()).add(pid)
        assert sorted(groups.values(), key=min) == [{"a1", "a2"}, {"b1", "b2"}]


class TestProperties:
    @settings(max_examples=25, deadline=None)
    @given(
        n=st.integers(min_value=2, max_value=12),
        k=st.integers(min_value=1, max_value=4),
        seed=st.integers(min_value=0, max_value=10_000),
    )
    def test_result_shape_invariants(self, n, k, seed):
        k = min(k, n)
        sim = random_similarity(np.random.default_rng(seed), n)
        result = kmedoid(sim, k=k)
        assert len(result.medoids) == k
        assert len(set(result.medoids)) == k
        assert all(0 <= m < n for m in result.medoids)
        assert result.medoids == tuple(sorted(result.medoids))
        assert result.assignment.shape == (n,)
        assert set(result.assignment) <= set(range(1, k + 1))
        for category, m in enumerate(result.medoids, start=1):
            assert result.assignment[m] == category
        assert result.objective >= 0.0
        assert result.swaps >= 0
