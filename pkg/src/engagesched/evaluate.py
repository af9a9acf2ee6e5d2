"""Reaction-gain metrics, category correlations, and content-type shares.

Reaction gain compares a bucket's reactions-per-post against the scope's
overall reactions-per-post: gain above 1 marks buckets where posts
outperform the average. Correlations quantify how similar reaction
profiles are within and across categories; the content-type report breaks
post and reaction volume down by content type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EngageError
from .ingest import CONTENT_TYPES, EventStore
from .profiles import BUCKETS_PER_DAY, cumulative_profile
from .schedules import Schedule, rank_buckets


@dataclass(frozen=True, eq=False)
class ReactionGainReport:
    """Per-bucket reaction gain for one scope.

    ``rate`` (reactions per post) and ``gain`` are NaN at buckets with no
    posts: the ratio is undefined there, never infinite.
    """

    scope: str
    attribution: str
    posts: np.ndarray
    reactions: np.ndarray
    rate: np.ndarray
    overall_rate: float
    gain: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return self.posts > 0


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Across-category correlation matrix plus within-category means.

    ``within`` holds, per category, the mean correlation over all page
    pairs inside it (NaN when fewer than two pages have usable profiles).
    """

    labels: tuple[str, ...]
    across: np.ndarray
    within: np.ndarray


@dataclass(frozen=True, eq=False)
class ContentTypeReport:
    """Post/reaction volume split by content type.

    Shares are percentages; reaction shares cover reactions with a
    resolvable parent post (orphans carry no type). ``rate`` is reactions
    per post of that type, NaN for types with no posts.
    """

    scope: str
    types: tuple[str, ...]
    post_counts: np.ndarray
    reaction_counts: np.ndarray
    post_share: np.ndarray
    reaction_share: np.ndarray
    rate: np.ndarray


def _scope_pages(store: EventStore, pages: Iterable[str] | None) -> tuple[str, ...]:
    if pages is None:
        return store.page_ids
    out = tuple(pages)
    if not out:
        raise EngageError("scope must contain at least one page")
    for p in out:
        store.require_page(p)
    return out


def reaction_gain(
    store: EventStore,
    pages: Iterable[str] | None = None,
    scope: str = "all",
    attribution: str = "own",
) -> ReactionGainReport:
    """Per-bucket reactions-per-post relative to the scope-wide average."""
    page_ids = _scope_pages(store, pages)
    posts = np.zeros(BUCKETS_PER_DAY, np.int64)
    reactions = np.zeros(BUCKETS_PER_DAY, np.int64)
    for p in page_ids:
        posts += cumulative_profile(store, p, "posting").counts
        reactions += cumulative_profile(store, p, "reaction", attribution).counts
    total_posts = int(posts.sum())
    total_reactions = int(reactions.sum())
    if total_posts == 0:
        raise EngageError(f"reaction gain undefined: no posts in scope {scope!r}")
    if total_reactions == 0:
        raise EngageError(f"reaction gain undefined: no reactions in scope {scope!r}")
    overall = total_reactions / total_posts
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(posts > 0, reactions / posts, np.nan)
    gain = rate / overall
    return ReactionGainReport(
        scope=scope,
        attribution=attribution,
        posts=posts,
        reactions=reactions,
        rate=rate,
        overall_rate=overall,
        gain=gain,
    )


def avg_reaction_gain(reports: Sequence[ReactionGainReport]) -> np.ndarray:
    """Per-bucket mean gain over the categories that define the bucket.

    A bucket no category defines stays NaN.
    """
    if not reports:
        raise EngageError("need at least one category report")
    stacked = np.stack([r.gain for r in reports])
    defined = ~np.isnan(stacked)
    n = defined.sum(axis=0)
    sums = np.where(defined, stacked, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore"):
        return np.where(n > 0, sums / np.maximum(n, 1), np.nan)


def correlation(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Pearson correlation of two equal-length vectors.

    Computed from the definition (centered cross- and self-products);
    constant input is an error rather than a silent 0 or NaN.
    """
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise EngageError("correlation needs two equal-length vectors (length >= 2)")
    da = a - a.mean()
    db = b - b.mean()
    var_a = float(da @ da)
    var_b = float(db @ db)
    if var_a == 0.0 or var_b == 0.0:
        raise EngageError("undefined correlation: constant vector")
    return float((da @ db) / math.sqrt(var_a * var_b))


def category_correlations(
    store: EventStore,
    categories: Mapping[str, Sequence[str]],
    attribution: str = "own",
) -> CorrelationMatrix:
    """Reaction-profile correlations across and within categories.

    Across entries correlate the categories' summed reaction vectors;
    within entries average the correlation over all page pairs inside a
    category, skipping pairs where a page's profile is constant.
    """
    if not categories:
        raise EngageError("need at least one category")
    labels = tuple(categories)
    page_vectors: dict[str, list[np.ndarray]] = {}
    cat_vectors = []
    for label in labels:
        pages = _scope_pages(store, categories[label])
        vecs = [
            cumulative_profile(store, p, "reaction", attribution).counts.astype(np.float64)
            for p in pages
        ]
        page_vectors[label] = vecs
        cat_vectors.append(np.sum(vecs, axis=0))

    r = len(labels)
    across = np.empty((r, r), np.float64)
    for i in range(r):
        for j in range(i, r):
            across[i, j] = across[j, i] = correlation(cat_vectors[i], cat_vectors[j])

    within = np.full(r, np.nan)
    for i, label in enumerate(labels):
        vecs = page_vectors[label]
        pair_values = []
        for a in range(len(vecs)):
            for b in range(a + 1, len(vecs)):
                if np.ptp(vecs[a]) == 0 or np.ptp(vecs[b]) == 0:
                    continue
                pair_values.append(correlation(vecs[a], vecs[b]))
        if pair_values:
            within[i] = float(np.mean(pair_values))
    return CorrelationMatrix(labels=labels, across=across, within=within)


def content_type_report(
    store: EventStore,
    pages: Iterable[str] | None = None,
    scope: str = "all",
) -> ContentTypeReport:
    """Post and reaction shares per content type over the scope."""
    page_ids = _scope_pages(store, pages)
    n_types = len(CONTENT_TYPES)
    post_counts = np.zeros(n_types, np.int64)
    reaction_counts = np.zeros(n_types, np.int64)
    for p in page_ids:
        post_counts += np.bincount(store.posts_of(p).type_code, minlength=n_types)
        parent_types = store.reactions_of(p).parent_type
        reaction_counts += np.bincount(
            parent_types[parent_types >= 0], minlength=n_types
        )
    total_posts = int(post_counts.sum())
    if total_posts == 0:
        raise EngageError(f"content-type report undefined: no posts in scope {scope!r}")
    total_reactions = int(reaction_counts.sum())
    post_share = 100.0 * post_counts / total_posts
    if total_reactions > 0:
        reaction_share = 100.0 * reaction_counts / total_reactions
    else:
        reaction_share = np.full(n_types, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(post_counts > 0, reaction_counts / post_counts, np.nan)
    return ContentTypeReport(
        scope=scope,
        types=CONTENT_TYPES,
        post_counts=post_counts,
        reaction_counts=reaction_counts,
        post_share=post_share,
        reaction_share=reaction_share,
        rate=rate,
    )


def _cell(value: float) -> str:
    """Format one TSV number; undefined values render blank."""
    return "" if math.isnan(value) else f"{value:.6f}"


def gain_tsv(report: ReactionGainReport) -> str:
    lines = ["bucket\tposts\treactions\trate\tgain"]
    for k in range(BUCKETS_PER_DAY):
        lines.append(
            f"{k + 1}\t{int(report.posts[k])}\t{int(report.reactions[k])}"
            f"\t{_cell(report.rate[k])}\t{_cell(report.gain[k])}"
        )
    return "\n".join(lines) + "\n"


def avg_gain_tsv(gain_avg: np.ndarray) -> str:
    lines = ["bucket\tgain_avg"]
    for k in range(BUCKETS_PER_DAY):
        lines.append(f"{k + 1}\t{_cell(float(gain_avg[k]))}")
    return "\n".join(lines) + "\n"


def schedule_gain_table(
    report: ReactionGainReport, schedules: Sequence[Schedule], top_n: int
) -> str:
    """Top buckets of each schedule with their gains, as one TSV."""
    lines = ["kind\trank\tbucket\tscore\tgain"]
    for sched in schedules:
        for rank, (bucket, score) in enumerate(rank_buckets(sched, top_n), start=1):
            gain = float(report.gain[bucket - 1])
            lines.append(f"{sched.kind}\t{rank}\t{bucket}\t{score:.6f}\t{_cell(gain)}")
    return "\n".join(lines) + "\n"


def correlation_tsv(matrix: CorrelationMatrix) -> str:
    """Square across-category matrix, then a within-category block."""
    lines = ["\t".join(("category", *matrix.labels))]
    for i, label in enumerate(matrix.labels):
        cells = (_cell(float(v)) for v in matrix.across[i])
        lines.append("\t".join((label, *cells)))
    lines.append("")
    lines.append("category\twithin_mean")
    for label, value in zip(matrix.labels, matrix.within):
        lines.append(f"{label}\t{_cell(float(value))}")
    return "\n".join(lines) + "\n"


def content_type_tsv(report: ContentTypeReport) -> str:
    lines = ["type\tposts\treactions\tpost_share\treaction_share\trate"]
    for i, name in enumerate(report.types):
        lines.append(
            f"{name}\t{int(report.post_counts[i])}\t{int(report.reaction_counts[i])}"
            f"\t{_cell(report.post_share[i])}\t{_cell(report.reaction_share[i])}"
            f"\t{_cell(report.rate[i])}"
        )
    return "\n".join(lines) + "\n"


def format_gain_text(report: ReactionGainReport, top_n: int = 10) -> str:
    """Aligned human-readable summary of the best defined buckets."""
    defined = [k for k in range(BUCKETS_PER_DAY) if report.posts[k] > 0]
    ranked = sorted(defined, key=lambda k: (-report.gain[k], k))[:top_n]
    header = f"{'bucket':>6}  {'window':<11}  {'posts':>7}  {'reactions':>9}  {'gain':>8}"
    lines = [
        f"scope: {report.scope} (attribution: {report.attribution})",
        f"overall reactions per post: {report.overall_rate:.6f}",
        header,
    ]
    for k in ranked:
        start = k * 15
        window = f"{start // 60:02d}:{start % 60:02d}-{(start + 15) // 60:02d}:{(start + 15) % 60:02d}"
        lines.append(
            f"{k + 1:>6}  {window:<11}  {int(report.posts[k]):>7}"
            f"  {int(report.reactions[k]):>9}  {report.gain[k]:>8.3f}"
        )
    return "\n".join(lines) + "\n"
