"""End-to-end page categorization: features, relabeling, clustering,
discretization, feature selection, classifier training.

The result is a :class:`CategoryModel` that records every learned
artifact and serializes to a versioned JSON document, so a run is fully
reproducible and inspectable.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..errors import EngageError
from ..ingest import EventStore
from .cluster import choose_k, kmedoid, profile_similarity_matrix
from .discretize import DiscretizationModel, discretize_apply, discretize_fit
from .features import DEFAULT_FEATURE_PRIORITY, FEATURE_NAMES, build_feature_matrix
from .labels import DEFAULT_NEIGHBORS, correct_labels
from .nb import NBClassifier, nb_train
from .wrapper import DEFAULT_EPSILON, wrapper_select

MODEL_FORMAT_VERSION = 1

DEFAULT_K_RANGE_CAP = 10


@dataclass(frozen=True, eq=False, slots=True)
class CategoryModel:
    """Learned categorization of a store's pages.

    ``assignment`` maps every included page to a category id in [1, k];
    category j belongs to ``medoid_pages[j-1]``.  ``classifier`` is a
    multinomial NB over the discretized ``selected_features`` columns,
    trained against the category ids.
    """

    k: int
    page_ids: tuple[str, ...]
    medoid_pages: tuple[str, ...]
    assignment: dict[str, int]
    corrected_labels: dict[str, str]
    selected_features: tuple[str, ...]
    feature_accuracies: tuple[float, ...]
    discretization: DiscretizationModel
    classifier: NBClassifier
    category_labels: dict[int, str]
    objective: float

    def members(self, category: int) -> tuple[str, ...]:
        return tuple(p for p in self.page_ids if self.assignment[p] == category)


def _majority_label(labels: list[str]) -> str:
    counts = Counter(labels)
    top = max(counts.values())
    return min(label for label, count in counts.items() if count == top)


def build_category_model(
    store: EventStore,
    k: int | None = None,
    k_range: tuple[int, int] | None = None,
    neighbor_k: int = DEFAULT_NEIGHBORS,
    attribution: str = "own",
    epsilon: float = DEFAULT_EPSILON,
    max_features: int | None = None,
    restarts: int = 0,
    seed: int | None = None,
    stopwords: frozenset[str] | None = None,
    relabel: bool = True,
) -> CategoryModel:
    """Run the full categorization pipeline over pages with posts.

    ``k`` fixes the category count; otherwise it is chosen by the elbow
    rule over ``k_range`` (default [1, min(10, n)]).  With a single
    category there is nothing to select features against, so the
    default priority list is used and the classifier degenerates to one
    class.
    """
    if k is not None and k_range is not None:
        raise EngageError("pass either k or k_range, not both")
    if relabel:
        corrected = correct_labels(store, k=neighbor_k, stopwords=stopwords)
    else:
        corrected = {pid: store.pages[pid].label for pid in store.page_ids}
    ids, matrix = build_feature_matrix(store, labels=corrected)

    sim_ids, sim = profile_similarity_matrix(store, page_ids=ids, attribution=attribution)
    assert sim_ids == ids
    if k is None:
        if k_range is None:
            k_range = (1, min(DEFAULT_K_RANGE_CAP, len(ids)))
        k = choose_k(sim, k_range, restarts=restarts, seed=seed)
    clustering = kmedoid(sim, k, restarts=restarts, seed=seed)
    assignment = {pid: int(cat) for pid, cat in zip(ids, clustering.assignment)}
    medoid_pages = tuple(ids[m] for m in clustering.medoids)

    discretization = discretize_fit(matrix, [corrected[pid] for pid in ids])
    binned = discretize_apply(discretization, matrix)
    category_ids = [assignment[pid] for pid in ids]
    if k == 1:
        selected_names = DEFAULT_FEATURE_PRIORITY
        accuracies: tuple[float, ...] = ()
    else:
        picked = wrapper_select(
            binned, category_ids, max_features=max_features, epsilon=epsilon
        )
        selected_names = tuple(FEATURE_NAMES[j] for j in picked.selected)
        accuracies = picked.accuracies
    columns = [FEATURE_NAMES.index(name) for name in selected_names]
    classifier = nb_train(
        binned[:, columns],
        category_ids,
        n_bins=[discretization.n_bins()[j] for j in columns],
    )

    category_labels = {
        cat: _majority_label([corrected[pid] for pid in ids if assignment[pid] == cat])
        for cat in range(1, k + 1)
    }
    return CategoryModel(
        k=k,
        page_ids=tuple(ids),
        medoid_pages=medoid_pages,
        assignment=assignment,
        corrected_labels={pid: corrected[pid] for pid in ids},
        selected_features=selected_names,
        feature_accuracies=accuracies,
        discretization=discretization,
        classifier=classifier,
        category_labels=category_labels,
        objective=clustering.objective,
    )


def model_to_json(model: CategoryModel) -> str:
    """Serialize the model as a stable, versioned JSON document."""
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "k": model.k,
        "page_ids": list(model.page_ids),
        "medoid_pages": list(model.medoid_pages),
        "assignment": model.assignment,
        "corrected_labels": model.corrected_labels,
        "selected_features": list(model.selected_features),
        "feature_accuracies": list(model.feature_accuracies),
        "cut_points": [list(cuts) for cuts in model.discretization.cut_points],
        "classifier": {
            "classes": list(model.classifier.classes),
            "class_counts": model.classifier.class_counts.tolist(),
            "n_bins": list(model.classifier.n_bins),
            "bin_counts": [table.tolist() for table in model.classifier.bin_counts],
        },
        "category_labels": {str(cat): lab for cat, lab in model.category_labels.items()},
        "objective": model.objective,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def model_from_json(text: str) -> CategoryModel:
    """Rebuild a CategoryModel from its JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise EngageError(f"invalid model document: {exc}") from None
    version = doc.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise EngageError(f"unsupported model version {version!r}")
    try:
        classifier = NBClassifier(
            classes=tuple(doc["classifier"]["classes"]),
            class_counts=np.asarray(doc["classifier"]["class_counts"], np.int64),
            bin_counts=tuple(
                np.asarray(table, np.int64) for table in doc["classifier"]["bin_counts"]
            ),
            n_bins=tuple(doc["classifier"]["n_bins"]),
        )
        return CategoryModel(
            k=int(doc["k"]),
            page_ids=tuple(doc["page_ids"]),
            medoid_pages=tuple(doc["medoid_pages"]),
            assignment={pid: int(cat) for pid, cat in doc["assignment"].items()},
            corrected_labels=dict(doc["corrected_labels"]),
            selected_features=tuple(doc["selected_features"]),
            feature_accuracies=tuple(float(a) for a in doc["feature_accuracies"]),
            discretization=DiscretizationModel(
                cut_points=tuple(
                    tuple(float(c) for c in cuts) for cuts in doc["cut_points"]
                )
            ),
            classifier=classifier,
            category_labels={int(cat): lab for cat, lab in doc["category_labels"].items()},
            objective=float(doc["objective"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise EngageError(f"malformed model document: {exc}") from None
