"""The 35-feature page description catalog.

Three groups: page-centric (4), content-centric (14), reaction-centric
(17).  Only the three metadata-backed features may be missing (NaN);
:func:`build_feature_matrix` imputes those with the dataset median.
All other features are finite by construction: per-type and per-window
averages are 0.0 when the denominator set is empty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EngageError
from ..ingest import CONTENT_TYPES, REACTION_KINDS, SECONDS_PER_DAY, EventStore

_HOUR = 3600
_DELAY_WINDOW_EDGES_H = (0, 1, 2, 4, 8, 16, 32)
_DAY_INTERVAL_SECONDS = 4 * _HOUR
_WEEKEND_DOWS = (5, 6)  # Saturday, Sunday with Monday = 0

_LIKE = REACTION_KINDS.index("like")
_COMMENT = REACTION_KINDS.index("comment")
_SHARE = REACTION_KINDS.index("share")


@dataclass(frozen=True, slots=True)
class FeatureDef:
    name: str
    group: str  # "page" | "content" | "reaction"
    description: str
    metadata_optional: bool = False


def _catalog() -> tuple[FeatureDef, ...]:
    defs = [
        FeatureDef("fan_count", "page", "audience size from page metadata", True),
        FeatureDef("fan_growth_rate", "page", "audience growth per day from metadata", True),
        FeatureDef("talking_about_count", "page", "recent-buzz count from metadata", True),
        FeatureDef("posts_per_day", "page", "posts over the inclusive local-day span"),
        FeatureDef("page_type_code", "content", "page label encoded by sorted-unique index"),
        FeatureDef("avg_likes_per_post", "content", "likes (orphans included) per post"),
        FeatureDef("avg_comments_per_post", "content", "comments (orphans included) per post"),
        FeatureDef("avg_shares_per_post", "content", "shares (orphans included) per post"),
        FeatureDef("avg_post_length", "content", "mean post text length in characters"),
    ]
    for ctype in ("photo", "link", "video"):
        for kind in ("likes", "comments", "shares"):
            defs.append(
                FeatureDef(
                    f"avg_{kind}_per_{ctype}",
                    "content",
                    f"{kind} attributed to {ctype} posts per {ctype} post",
                )
            )
    edges = _DELAY_WINDOW_EDGES_H
    for lo, hi in zip(edges, edges[1:]):
        defs.append(
            FeatureDef(
                f"avg_reactions_{lo}_{hi}h",
                "reaction",
                f"reactions arriving {lo}-{hi}h after their post, per post",
            )
        )
    for start in range(0, 24, 4):
        defs.append(
            FeatureDef(
                f"avg_reactions_h{start:02d}_{start + 4:02d}",
                "reaction",
                f"reactions in local interval {start:02d}:00-{start + 4:02d}:00, per post",
            )
        )
    defs.append(
        FeatureDef("weekend_reaction_share", "reaction", "share of reactions on local weekends")
    )
    for q in range(1, 5):
        defs.append(
            FeatureDef(
                f"mean_monthly_reactions_q{q}",
                "reaction",
                f"quarter-{q} reactions per month over the year range",
            )
        )
    return tuple(defs)


FEATURE_CATALOG: tuple[FeatureDef, ...] = _catalog()
FEATURE_NAMES: tuple[str, ...] = tuple(d.name for d in FEATURE_CATALOG)

# Fallback priority when wrapper selection is skipped: first-hour
# reactions, posting frequency, page type.
DEFAULT_FEATURE_PRIORITY: tuple[str, ...] = (
    "avg_reactions_0_1h",
    "posts_per_day",
    "page_type_code",
)


@dataclass(frozen=True, eq=False, slots=True)
class FeatureVector:
    page_id: str
    values: np.ndarray  # float64, len(FEATURE_CATALOG)


def _label_codes(labels: dict[str, str]) -> dict[str, int]:
    return {label: code for code, label in enumerate(sorted(set(labels.values())))}


def extract_features(
    store: EventStore, page_id: str, labels: dict[str, str] | None = None
) -> FeatureVector:
    """All 35 features of one page; requires at least one post.

    ``labels`` supplies (possibly corrected) page labels for the
    page-type encoding; defaults to the metadata labels of every page
    in the store so codes stay consistent across calls.
    """
    posts = store.posts_of(page_id)
    n_posts = int(posts.local_ts.size)
    if n_posts == 0:
        raise EngageError(f"page {page_id!r} has no posts to featurize")
    if labels is None:
        labels = {pid: store.pages[pid].label for pid in store.page_ids}
    if page_id not in labels:
        raise EngageError(f"no label provided for page {page_id!r}")
    meta = store.pages[page_id]
    reactions = store.reactions_of(page_id)
    n_reactions = int(reactions.local_ts.size)

    values: list[float] = []
    values.append(np.nan if meta.fan_count is None else float(meta.fan_count))
    values.append(np.nan if meta.fan_growth_rate is None else float(meta.fan_growth_rate))
    values.append(
        np.nan if meta.talking_about_count is None else float(meta.talking_about_count)
    )
    days = posts.local_ts // SECONDS_PER_DAY
    span = int(days.max() - days.min()) + 1
    values.append(n_posts / span)

    values.append(float(_label_codes(labels)[labels[page_id]]))
    for kind in (_LIKE, _COMMENT, _SHARE):
        values.append(int((reactions.kind_code == kind).sum()) / n_posts)
    values.append(float(posts.text_len.mean()))
    for ctype in ("photo", "link", "video"):
        code = CONTENT_TYPES.index(ctype)
        n_of_type = int((posts.type_code == code).sum())
        for kind in (_LIKE, _COMMENT, _SHARE):
            if n_of_type == 0:
                values.append(0.0)
            else:
                hits = (reactions.parent_type == code) & (reactions.kind_code == kind)
                values.append(int(hits.sum()) / n_of_type)

    attributed = reactions.delay_s >= 0
    delays = reactions.delay_s[attributed]
    edges_s = np.array(_DELAY_WINDOW_EDGES_H, np.int64) * _HOUR
    window = np.searchsorted(edges_s[1:], delays, side="right")
    per_window = np.bincount(window, minlength=7)[:6]
    values.extend(per_window / n_posts)

    interval = (reactions.local_ts % SECONDS_PER_DAY) // _DAY_INTERVAL_SECONDS
    per_interval = np.bincount(interval, minlength=6)
    values.extend(per_interval / n_posts)

    if n_reactions == 0:
        values.append(0.0)
    else:
        dow = (reactions.local_ts // SECONDS_PER_DAY + 3) % 7
        values.append(int(np.isin(dow, _WEEKEND_DOWS).sum()) / n_reactions)

    months = reactions.local_ts.astype("datetime64[s]").astype("datetime64[M]")
    quarter = (months.astype(np.int64) % 12) // 3
    per_quarter = np.bincount(quarter, minlength=4)
    y_start, y_end = store.year_range
    n_years = y_end - y_start + 1
    values.extend(per_quarter / (3.0 * n_years))

    vector = np.array(values, np.float64)
    assert vector.shape == (len(FEATURE_CATALOG),)
    return FeatureVector(page_id=page_id, values=vector)


def build_feature_matrix(
    store: EventStore,
    page_ids: tuple[str, ...] | list[str] | None = None,
    labels: dict[str, str] | None = None,
) -> tuple[list[str], np.ndarray]:
    """Feature rows for the given pages, median-imputed per column.

    Defaults to every page with at least one post.  Columns left
    all-NaN (a metadata field absent everywhere) impute to 0.0.
    """
    if page_ids is None:
        ids = [pid for pid in store.page_ids if store.posts_of(pid).local_ts.size > 0]
    else:
        ids = list(page_ids)
    if not ids:
        raise EngageError("no pages with posts to featurize")
    matrix = np.stack([extract_features(store, pid, labels).values for pid in ids])
    for j in range(matrix.shape[1]):
        missing = np.isnan(matrix[:, j])
        if missing.any():
            median = np.nanmedian(matrix[:, j]) if not missing.all() else 0.0
            matrix[missing, j] = median
    return ids, matrix
