"""Posting-schedule derivation and audience analysis for content channels."""

from .categorize import (
    CategoryModel,
    build_category_model,
    choose_k,
    correct_labels,
    kmedoid,
    model_from_json,
    model_to_json,
    profile_similarity_matrix,
)
from .errors import EngageError
from .evaluate import (
    ContentTypeReport,
    CorrelationMatrix,
    ReactionGainReport,
    avg_reaction_gain,
    category_correlations,
    content_type_report,
    correlation,
    reaction_gain,
)
from .ingest import (
    CONTENT_TYPES,
    REACTION_KINDS,
    EventStore,
    PageMeta,
    PostEvent,
    ReactionEvent,
    ValidationReport,
    build_store,
    load_page_metadata,
    normalize_timestamp,
    parse_event_log,
    preprocess_text,
)
from .profiles import (
    BUCKETS_PER_DAY,
    CumulativeProfile,
    DelayHistogram,
    PeriodicProfile,
    YearProfile,
    bucket_of,
    cumulative_profile,
    delay_distribution,
    periodic_profile,
    year_profile,
)
from .schedules import (
    SCHEDULE_KINDS,
    PageWeight,
    Schedule,
    aggregated_schedule,
    categorized_schedule,
    page_weights,
    rank_buckets,
    weighted_categorized_schedule,
)
from .synth import CategorySpec, SynthConfig, SynthResult, brute_force_counts, generate

__version__ = "0.1.0"

__all__ = [
    "BUCKETS_PER_DAY",
    "CONTENT_TYPES",
    "CategoryModel",
    "CategorySpec",
    "ContentTypeReport",
    "CorrelationMatrix",
    "CumulativeProfile",
    "DelayHistogram",
    "EngageError",
    "EventStore",
    "PageMeta",
    "PageWeight",
    "PeriodicProfile",
    "PostEvent",
    "REACTION_KINDS",
    "ReactionEvent",
    "ReactionGainReport",
    "SCHEDULE_KINDS",
    "Schedule",
    "SynthConfig",
    "SynthResult",
    "ValidationReport",
    "YearProfile",
    "aggregated_schedule",
    "avg_reaction_gain",
    "brute_force_counts",
    "bucket_of",
    "build_category_model",
    "build_store",
    "categorized_schedule",
    "category_correlations",
    "choose_k",
    "content_type_report",
    "correct_labels",
    "correlation",
    "cumulative_profile",
    "delay_distribution",
    "generate",
    "kmedoid",
    "load_page_metadata",
    "model_from_json",
    "model_to_json",
    "normalize_timestamp",
    "page_weights",
    "parse_event_log",
    "periodic_profile",
    "preprocess_text",
    "profile_similarity_matrix",
    "rank_buckets",
    "weighted_categorized_schedule",
    "year_profile",
]
