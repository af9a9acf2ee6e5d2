"""Per-bucket activity profiles, delay histograms, and periodic trends.

The day is cut into 96 quarter-hour buckets on each page's local clock.
Profiles count posting or reaction events per bucket, per year or summed
over the store's year range; delay histograms describe how long after a
post its reactions arrive; periodic profiles aggregate by day-of-week or
calendar month.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Sequence

import numpy as np

from .errors import EngageError
from .ingest import SECONDS_PER_DAY, EventStore

BUCKETS_PER_DAY = 96
BUCKET_SECONDS = 900

PROFILE_KINDS = ("posting", "reaction")
ATTRIBUTION_MODES = ("own", "parent")
GRANULARITIES = {"day_of_week": 7, "month": 12}

# Delay bin edges in hours; the final edge doubles as the default horizon.
DEFAULT_DELAY_EDGES_HOURS = (0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 168.0)


@dataclass(frozen=True, slots=True)
class YearProfile:
    """Per-bucket event counts for one page and one local-calendar year."""

    page_id: str
    year: int
    kind: str
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, slots=True)
class CumulativeProfile:
    """Per-bucket event counts summed over the store's whole year range."""

    page_id: str
    kind: str
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, slots=True)
class DelayHistogram:
    """Post-to-reaction delay distribution over non-orphan reactions.

    ``mass`` and ``cdf`` cover reactions whose delay is within the horizon;
    ``beyond_horizon`` counts the rest.
    """

    edges_hours: tuple[float, ...]
    counts: np.ndarray
    mass: np.ndarray
    cdf: np.ndarray
    beyond_horizon: int

    @property
    def total_within(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, slots=True)
class PeriodicProfile:
    """Event counts by local day-of-week (Monday=index 1) or month (Jan=1)."""

    granularity: str
    kind: str
    page_ids: tuple[str, ...]
    counts: np.ndarray


def bucket_of(local_time: datetime) -> int:
    """Quarter-hour bucket index in [1, 96] for a local wall-clock time."""
    minutes = local_time.hour * 60 + local_time.minute
    return minutes // 15 + 1


def _bucket_counts(local_ts: np.ndarray) -> np.ndarray:
    buckets = (local_ts % SECONDS_PER_DAY) // BUCKET_SECONDS
    return np.bincount(buckets, minlength=BUCKETS_PER_DAY).astype(np.int64)


def _years_of(local_ts: np.ndarray) -> np.ndarray:
    return local_ts.astype("datetime64[s]").astype("datetime64[Y]").astype(np.int64) + 1970


def _months_of(local_ts: np.ndarray) -> np.ndarray:
    return local_ts.astype("datetime64[s]").astype("datetime64[M]").astype(np.int64) % 12 + 1


def _days_of_week(local_ts: np.ndarray) -> np.ndarray:
    # epoch day 0 (1970-01-01) was a Thursday; 0 = Monday
    days = np.floor_divide(local_ts, SECONDS_PER_DAY)
    return (days + 3) % 7


def _check_kind(kind: str) -> None:
    if kind not in PROFILE_KINDS:
        raise EngageError(f"profile kind must be one of {PROFILE_KINDS}, got {kind!r}")


def _check_attribution(attribution: str) -> None:
    if attribution not in ATTRIBUTION_MODES:
        raise EngageError(
            f"attribution must be one of {ATTRIBUTION_MODES}, got {attribution!r}"
        )


def _event_ts(store: EventStore, page_id: str, kind: str, attribution: str) -> np.ndarray:
    """Local timestamps of the page's events of the requested kind.

    Reaction events use their own timestamp by default; in ``parent`` mode
    they take the parent post's timestamp, and orphans drop out.
    """
    _check_kind(kind)
    _check_attribution(attribution)
    if kind == "posting":
        return store.posts_of(page_id).local_ts
    cols = store.reactions_of(page_id)
    if attribution == "own":
        return cols.local_ts
    return cols.parent_local_ts[cols.parent_local_ts >= 0]


def year_profile(
    store: EventStore,
    page_id: str,
    year: int,
    kind: str = "posting",
    attribution: str = "own",
) -> YearProfile:
    """Count the page's events per bucket within one local-calendar year."""
    store.require_page(page_id)
    y_start, y_end = store.year_range
    if not y_start <= year <= y_end:
        raise EngageError(f"year {year} outside store range [{y_start}, {y_end}]")
    ts = _event_ts(store, page_id, kind, attribution)
    ts = ts[_years_of(ts) == year]
    return YearProfile(page_id=page_id, year=year, kind=kind, counts=_bucket_counts(ts))


def cumulative_profile(
    store: EventStore,
    page_id: str,
    kind: str = "posting",
    attribution: str = "own",
) -> CumulativeProfile:
    """Count the page's events per bucket over the whole year range."""
    store.require_page(page_id)
    ts = _event_ts(store, page_id, kind, attribution)
    return CumulativeProfile(page_id=page_id, kind=kind, counts=_bucket_counts(ts))


def delay_distribution(
    store: EventStore,
    horizon_hours: float = DEFAULT_DELAY_EDGES_HOURS[-1],
    edges_hours: Sequence[float] | None = None,
) -> DelayHistogram:
    """Histogram of post-to-reaction delays over all non-orphan reactions.

    Bins follow ``edges_hours`` (defaults to the standard delay windows),
    truncated at the horizon; a delay of exactly the horizon counts as
    within. Orphan reactions never contribute.
    """
    if horizon_hours <= 0:
        raise EngageError("horizon must be positive")
    if edges_hours is None:
        edges_hours = [e for e in DEFAULT_DELAY_EDGES_HOURS if e < horizon_hours]
        edges_hours.append(horizon_hours)
    edges = tuple(float(e) for e in edges_hours)
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])) or edges[0] != 0.0:
        raise EngageError(f"bin edges must increase from 0, got {edges}")
    if edges[-1] != horizon_hours:
        raise EngageError("last bin edge must equal the horizon")

    delays = [
        cols.delay_s[cols.delay_s >= 0]
        for cols in (store.reactions_of(p) for p in store.page_ids)
    ]
    delay_s = np.concatenate(delays) if delays else np.empty(0, np.int64)
    if delay_s.size == 0:
        raise EngageError("no reactions with a resolvable parent post")

    edge_s = np.asarray(edges, dtype=np.float64) * 3600.0
    within = delay_s[delay_s <= edge_s[-1]]
    beyond = int(delay_s.size - within.size)
    # right-open bins except the last, which includes the horizon itself
    idx = np.searchsorted(edge_s[1:-1], within, side="right")
    counts = np.bincount(idx, minlength=len(edges) - 1).astype(np.int64)
    total = counts.sum()
    if total == 0:
        raise EngageError("no reactions within the horizon")
    mass = counts / total
    cdf = np.cumsum(counts) / total
    return DelayHistogram(
        edges_hours=edges,
        counts=counts,
        mass=mass,
        cdf=cdf,
        beyond_horizon=beyond,
    )


def periodic_profile(
    store: EventStore,
    page_ids: Iterable[str],
    granularity: str,
    kind: str = "posting",
    attribution: str = "own",
) -> PeriodicProfile:
    """Aggregate event counts by local day-of-week or calendar month."""
    pages = tuple(page_ids)
    if not pages:
        raise EngageError("periodic profile needs at least one page")
    if granularity not in GRANULARITIES:
        raise EngageError(
            f"granularity must be one of {tuple(GRANULARITIES)}, got {granularity!r}"
        )
    size = GRANULARITIES[granularity]
    counts = np.zeros(size, np.int64)
    for page_id in pages:
        store.require_page(page_id)
        ts = _event_ts(store, page_id, kind, attribution)
        if ts.size == 0:
            continue
        if granularity == "day_of_week":
            counts += np.bincount(_days_of_week(ts), minlength=7)
        else:
            counts += np.bincount(_months_of(ts) - 1, minlength=12)
    return PeriodicProfile(
        granularity=granularity, kind=kind, page_ids=pages, counts=counts
    )


def counts_tsv(counts: Sequence[int] | np.ndarray, start_index: int = 1) -> str:
    """Render an indexed count vector as plot-ready TSV (`index<TAB>count`)."""
    lines = ["index\tcount"]
    for i, value in enumerate(counts, start=start_index):
        lines.append(f"{i}\t{int(value)}")
    return "\n".join(lines) + "\n"
