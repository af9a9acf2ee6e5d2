"""Page categorization: features, label correction, clustering, selection."""

from .cluster import (
    KMedoidResult,
    choose_k,
    dissimilarity_curve,
    elbow_k,
    kmedoid,
    profile_similarity_matrix,
)
from .discretize import DiscretizationModel, discretize_apply, discretize_fit
from .features import (
    DEFAULT_FEATURE_PRIORITY,
    FEATURE_CATALOG,
    FEATURE_NAMES,
    FeatureDef,
    FeatureVector,
    build_feature_matrix,
    extract_features,
)
from .labels import (
    DEFAULT_NEIGHBORS,
    correct_labels,
    cosine_similarity_matrix,
    text_similarity,
    tfidf_vectors,
)
from .model import (
    MODEL_FORMAT_VERSION,
    CategoryModel,
    build_category_model,
    model_from_json,
    model_to_json,
)
from .nb import NBClassifier, nb_classify, nb_classify_many, nb_train
from .wrapper import DEFAULT_EPSILON, WrapperResult, loo_accuracy, wrapper_select

__all__ = [
    "KMedoidResult",
    "choose_k",
    "dissimilarity_curve",
    "elbow_k",
    "kmedoid",
    "profile_similarity_matrix",
    "DiscretizationModel",
    "discretize_apply",
    "discretize_fit",
    "DEFAULT_FEATURE_PRIORITY",
    "FEATURE_CATALOG",
    "FEATURE_NAMES",
    "FeatureDef",
    "FeatureVector",
    "build_feature_matrix",
    "extract_features",
    "DEFAULT_NEIGHBORS",
    "correct_labels",
    "cosine_similarity_matrix",
    "text_similarity",
    "tfidf_vectors",
    "MODEL_FORMAT_VERSION",
    "CategoryModel",
    "build_category_model",
    "model_from_json",
    "model_to_json",
    "NBClassifier",
    "nb_classify",
    "nb_classify_many",
    "nb_train",
    "DEFAULT_EPSILON",
    "WrapperResult",
    "loo_accuracy",
    "wrapper_select",
]
