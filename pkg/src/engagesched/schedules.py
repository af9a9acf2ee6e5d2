"""Posting-schedule derivation from cumulative bucket profiles.

Six schedule kinds: aggregated over all pages (afp/afr), per category
(cfp/cfr), and per category with page-importance weighting (wcfp/wcfr);
the trailing letter says whether posting or reaction counts drive the
scores. Scores order the 96 daily buckets from best to worst posting slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EngageError
from .ingest import EventStore
from .profiles import BUCKETS_PER_DAY, cumulative_profile

SCHEDULE_KINDS = ("afp", "afr", "cfp", "cfr", "wcfp", "wcfr")

_CODE = {
    ("aggregated", "posting"): "afp",
    ("aggregated", "reaction"): "afr",
    ("categorized", "posting"): "cfp",
    ("categorized", "reaction"): "cfr",
    ("weighted", "posting"): "wcfp",
    ("weighted", "reaction"): "wcfr",
}


@dataclass(frozen=True, eq=False)
class Schedule:
    """Scored, ranked daily buckets for one scope.

    ``ranking`` is a permutation of bucket ids 1..96, scores descending,
    ties broken by ascending bucket id. afp/afr/cfp/cfr scores sum to 1;
    wcfp/wcfr keep their natural (unnormalized) scale.
    """

    kind: str
    scope: str
    scores: np.ndarray
    ranking: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class PageWeight:
    """Share of its category's events contributed by one page."""

    page_id: str
    kind: str
    page_total: int
    category_total: int

    @property
    def weight(self) -> float:
        return self.page_total / self.category_total


def _rank(scores: np.ndarray) -> tuple[int, ...]:
    order = np.lexsort((np.arange(scores.size), -scores))
    return tuple(int(i) + 1 for i in order)


def _make(kind_code: str, scope: str, scores: np.ndarray) -> Schedule:
    scores = scores.astype(np.float64)
    scores.flags.writeable = False
    return Schedule(kind=kind_code, scope=scope, scores=scores, ranking=_rank(scores))


def _counts_matrix(
    store: EventStore, pages: Sequence[str], kind: str, attribution: str
) -> np.ndarray:
    return np.stack(
        [cumulative_profile(store, p, kind, attribution).counts for p in pages]
    )


def _check_pages(pages: Iterable[str]) -> tuple[str, ...]:
    out = tuple(pages)
    if not out:
        raise EngageError("schedule scope must contain at least one page")
    if len(set(out)) != len(out):
        raise EngageError("schedule scope lists a page twice")
    return out


def aggregated_schedule(
    store: EventStore, kind: str = "posting", attribution: str = "own"
) -> Schedule:
    """Bucket scores from all pages' pooled counts (sums to 1)."""
    return _fraction_schedule(
        store, store.page_ids, kind, attribution, "aggregated", "all"
    )


def categorized_schedule(
    store: EventStore,
    category_pages: Iterable[str],
    kind: str = "posting",
    scope: str = "category",
    attribution: str = "own",
) -> Schedule:
    """Bucket scores from one category's pooled counts (sums to 1)."""
    pages = _check_pages(category_pages)
    return _fraction_schedule(store, pages, kind, attribution, "categorized", scope)


def _fraction_schedule(
    store: EventStore,
    pages: Sequence[str],
    kind: str,
    attribution: str,
    family: str,
    scope: str,
) -> Schedule:
    if not pages:
        raise EngageError("schedule scope must contain at least one page")
    counts = _counts_matrix(store, pages, kind, attribution).sum(axis=0)
    total = counts.sum()
    if total == 0:
        raise EngageError(f"undefined schedule: no {kind} events in scope {scope!r}")
    return _make(_CODE[(family, kind)], scope, counts / total)


def page_weights(
    store: EventStore,
    category_pages: Iterable[str],
    kind: str = "posting",
    attribution: str = "own",
) -> tuple[PageWeight, ...]:
    """Each page's event total and its share of the category total."""
    pages = _check_pages(category_pages)
    counts = _counts_matrix(store, pages, kind, attribution)
    totals = counts.sum(axis=1)
    category_total = int(totals.sum())
    if category_total == 0:
        raise EngageError(f"undefined weights: no {kind} events in category")
    return tuple(
        PageWeight(page_id=p, kind=kind, page_total=int(t), category_total=category_total)
        for p, t in zip(pages, totals)
    )


def weighted_categorized_schedule(
    store: EventStore,
    category_pages: Iterable[str],
    kind: str = "posting",
    scope: str = "category",
    attribution: str = "own",
) -> Schedule:
    """Bucket scores with each page's profile weighted by its share.

    scores[k] = Σ_pages weight(page) · counts_page[k] / category_total,
    where weight = page_total / category_total. The vector is not
    renormalized; its total equals Σ_pages weight².
    """
    pages = _check_pages(category_pages)
    counts = _counts_matrix(store, pages, kind, attribution).astype(np.float64)
    totals = counts.sum(axis=1)
    category_total = totals.sum()
    if category_total == 0:
        raise EngageError(f"undefined weights: no {kind} events in category")
    scores = (totals / category_total) @ (counts / category_total)
    return _make(_CODE[("weighted", kind)], scope, scores)


def normalized(schedule: Schedule) -> Schedule:
    """Same ranking, scores rescaled to sum to 1 (display helper)."""
    total = schedule.scores.sum()
    if total <= 0:
        raise EngageError("cannot normalize an all-zero schedule")
    return _make(schedule.kind, schedule.scope, schedule.scores / total)


def rank_buckets(schedule: Schedule, top_n: int) -> list[tuple[int, float]]:
    """The best top_n buckets as (bucket id, score), best first."""
    if not 1 <= top_n <= BUCKETS_PER_DAY:
        raise EngageError(f"top_n must be in [1, {BUCKETS_PER_DAY}], got {top_n}")
    return [
        (bucket, float(schedule.scores[bucket - 1]))
        for bucket in schedule.ranking[:top_n]
    ]


def _hhmm(minutes: int) -> str:
    return f"{minutes // 60:02d}{minutes % 60:02d}"


def schedule_tsv(schedule: Schedule, top_n: int = BUCKETS_PER_DAY) -> str:
    """Render the ranked schedule as TSV (scores at 6 decimals)."""
    lines = ["rank\tbucket\tstart_hhmm\tend_hhmm\tscore"]
    for rank, (bucket, score) in enumerate(rank_buckets(schedule, top_n), start=1):
        start = (bucket - 1) * 15
        lines.append(
            f"{rank}\t{bucket}\t{_hhmm(start)}\t{_hhmm(start + 15)}\t{score:.6f}"
        )
    return "\n".join(lines) + "\n"
