"""Full categorization pipeline and model serialization."""

from __future__ import annotations

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from engagesched.categorize.features import DEFAULT_FEATURE_PRIORITY, FEATURE_NAMES
from engagesched.categorize.model import (
    MODEL_FORMAT_VERSION,
    build_category_model,
    model_from_json,
    model_to_json,
)
from engagesched.errors import EngageError
from engagesched.synth import CategorySpec, SynthConfig, generate, peaked_intensity

from conftest import store_from_synth, store_with_mixed

YEAR = (2012, 2012)


def two_group_config(seed=3, noise=0.0):
    return SynthConfig(
        seed=seed,
        categories=(
            CategorySpec(
                name="shop",
                n_pages=6,
                posts_per_page=25,
                reactions_per_page=60,
                reaction_intensity=peaked_intensity(20, peak_weight=80.0),
                label="Retail",
            ),
            CategorySpec(
                name="news",
                n_pages=6,
                posts_per_page=25,
                reactions_per_page=60,
                reaction_intensity=peaked_intensity(68, peak_weight=80.0),
                label="Media",
            ),
        ),
        year_range=YEAR,
        label_noise_rate=noise,
    )


@pytest.fixture(scope="module")
def two_group_store():
    result = generate(two_group_config())
    return store_from_synth(result, YEAR), result


class TestPipeline:
    def test_recovers_planted_categories(self, two_group_store):
        store, result = two_group_store
        model = build_category_model(store, k=2)
        truth = [result.manifest["pages"][pid]["category"] for pid in model.page_ids]
        predicted = [model.assignment[pid] for pid in model.page_ids]
        assert adjusted_rand_score(truth, predicted) == 1.0

    def test_elbow_finds_two_categories(self, two_group_store):
        store, _ = two_group_store
        model = build_category_model(store, k_range=(1, 6))
        assert model.k == 2

    def test_category_labels_are_majorities(self, two_group_store):
        store, result = two_group_store
        model = build_category_model(store, k=2)
        by_category = {}
        for pid in model.page_ids:
            true_label = result.manifest["pages"][pid]["true_label"]
            by_category.setdefault(model.assignment[pid], set()).add(true_label)
        for cat, labels in by_category.items():
            assert model.category_labels[cat] in labels
        assert set(model.category_labels.values()) == {"Retail", "Media"}

    def test_model_invariants(self, two_group_store):
        store, _ = two_group_store
        model = build_category_model(store, k=2)
        assert set(model.assignment.values()) == {1, 2}
        for j, medoid in enumerate(model.medoid_pages, start=1):
            assert model.assignment[medoid] == j
            assert medoid in model.members(j)
        assert len(model.selected_features) >= 1
        assert set(model.selected_features) <= set(FEATURE_NAMES)
        assert len(model.feature_accuracies) == len(model.selected_features)

    def test_label_noise_is_corrected(self):
        result = generate(two_group_config(seed=9, noise=2 / 12))
        noised = [
            pid
            for pid, info in result.manifest["pages"].items()
            if info["observed_label"] != info["true_label"]
        ]
        assert len(noised) == 2
        store = store_from_synth(result, YEAR)
        model = build_category_model(store, k=2)
        for pid in model.page_ids:
            assert (
                model.corrected_labels[pid]
                == result.manifest["pages"][pid]["true_label"]
            )

    def test_relabel_disabled_keeps_observed(self):
        result = generate(two_group_config(seed=9, noise=2 / 12))
        store = store_from_synth(result, YEAR)
        model = build_category_model(store, k=2, relabel=False)
        for pid in model.page_ids:
            assert (
                model.corrected_labels[pid]
                == result.manifest["pages"][pid]["observed_label"]
            )

    def test_single_category_uses_priority_features(self):
        store = store_with_mixed(
            {"a": {1: 2}, "b": {5: 3}, "c": {9: 1}},
            {"a": {2: 4}, "b": {6: 2}},
        )
        model = build_category_model(store, k=1)
        assert model.k == 1
        assert model.selected_features == DEFAULT_FEATURE_PRIORITY
        assert model.feature_accuracies == ()
        assert set(model.assignment.values()) == {1}
        assert model.classifier.classes == (1,)

    def test_k_and_k_range_both_rejected(self, two_group_store):
        store, _ = two_group_store
        with pytest.raises(EngageError):
            build_category_model(store, k=2, k_range=(1, 4))

    def test_deterministic(self, two_group_store):
        store, _ = two_group_store
        first = model_to_json(build_category_model(store, k=2))
        second = model_to_json(build_category_model(store, k=2))
        assert first == second


class TestSerialization:
    def test_round_trip_is_stable(self, two_group_store):
        store, _ = two_group_store
        model = build_category_model(store, k=2)
        text = model_to_json(model)
        rebuilt = model_from_json(text)
        assert model_to_json(rebuilt) == text
        assert rebuilt.k == model.k
        assert rebuilt.assignment == model.assignment
        assert rebuilt.selected_features == model.selected_features
        assert rebuilt.discretization.cut_points == model.discretization.cut_points
        assert np.array_equal(
            rebuilt.classifier.class_counts, model.classifier.class_counts
        )
        for a, b in zip(rebuilt.classifier.bin_counts, model.classifier.bin_counts):
            assert np.array_equal(a, b)

    def test_version_is_checked(self, two_group_store):
        store, _ = two_group_store
        text = model_to_json(build_category_model(store, k=2))
        tampered = text.replace(
            f'"version": {MODEL_FORMAT_VERSION}', '"version": 999'
        )
        assert tampered != text
        with pytest.raises(EngageError):
            model_from_json(tampered)

    def test_malformed_documents_rejected(self):
        with pytest.raises(EngageError):
            model_from_json("not json at all {")
        with pytest.raises(EngageError):
            model_from_json('{"version": 1, "k": 2}')
