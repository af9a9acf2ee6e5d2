"""Event-log ingestion: parse, validate, and normalize raw post/reaction logs.

Input format is line-delimited JSON (one record per line, ``type`` field
``"post"`` or ``"reaction"``) plus a CSV page-metadata table. Output is an
immutable :class:`EventStore` keyed by page, with all timestamps shifted to
each page's local clock, and a :class:`ValidationReport` accounting for
every input line.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from importlib import resources
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import EngageError

CONTENT_TYPES = ("link", "photo", "status", "video")
REACTION_KINDS = ("comment", "like", "share")

TZ_OFFSET_MIN = -720
TZ_OFFSET_MAX = 840

SECONDS_PER_DAY = 86400

_EPOCH = datetime(1970, 1, 1)
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_VOWELS = frozenset("aeiou")

META_COLUMNS = (
    "page_id",
    "label",
    "tz_offset_minutes",
    "fan_count",
    "talking_about_count",
    "fan_growth_rate",
)

# Reaction records may carry text upstream, but only post text is retained:
# page similarity is computed from what the page itself publishes.

TokenList = tuple[str, ...]


@dataclass(frozen=True, slots=True)
class PageMeta:
    """Metadata row for one content channel ("page")."""

    page_id: str
    label: str
    tz_offset_minutes: int
    fan_count: int | None = None
    talking_about_count: int | None = None
    fan_growth_rate: float | None = None

    def __post_init__(self) -> None:
        if not self.page_id:
            raise EngageError("page_id must be non-empty")
        if not TZ_OFFSET_MIN <= self.tz_offset_minutes <= TZ_OFFSET_MAX:
            raise EngageError(
                f"tz_offset_minutes {self.tz_offset_minutes} outside "
                f"[{TZ_OFFSET_MIN}, {TZ_OFFSET_MAX}] for page {self.page_id!r}"
            )


@dataclass(frozen=True, slots=True)
class PostEvent:
    post_id: str
    page_id: str
    timestamp_utc: int
    content_type: str
    text: str | None = None


@dataclass(frozen=True, slots=True)
class ReactionEvent:
    reaction_id: str
    page_id: str
    kind: str
    timestamp_utc: int
    post_id: str | None = None


@dataclass(frozen=True, slots=True)
class _PostColumns:
    """Per-page arrays over posts, in accepted order (read-only)."""

    local_ts: np.ndarray  # int64 shifted epoch seconds (page-local clock)
    type_code: np.ndarray  # int8 index into CONTENT_TYPES
    text_len: np.ndarray  # int32 characters, 0 when text missing


@dataclass(frozen=True, slots=True)
class _ReactionColumns:
    """Per-page arrays over reactions.

    ``delay_s``, ``parent_local_ts`` and ``parent_type`` are -1 for orphan
    reactions (no resolvable parent post).
    """

    local_ts: np.ndarray
    kind_code: np.ndarray
    delay_s: np.ndarray
    parent_local_ts: np.ndarray
    parent_type: np.ndarray


_EMPTY_POSTS = _PostColumns(
    np.empty(0, np.int64), np.empty(0, np.int8), np.empty(0, np.int32)
)
_EMPTY_REACTIONS = _ReactionColumns(
    np.empty(0, np.int64),
    np.empty(0, np.int8),
    np.empty(0, np.int64),
    np.empty(0, np.int64),
    np.empty(0, np.int8),
)


@dataclass(frozen=True)
class EventStore:
    """Validated, immutable collection of pages, posts, and reactions.

    Timestamps in the columnar views are page-local (UTC shifted by the
    page's fixed offset); the raw events keep their UTC values. Safe for
    concurrent reads.
    """

    pages: Mapping[str, PageMeta]
    posts: tuple[PostEvent, ...]
    reactions: tuple[ReactionEvent, ...]
    year_range: tuple[int, int]
    _post_cols: Mapping[str, _PostColumns] = field(repr=False, default_factory=dict)
    _reaction_cols: Mapping[str, _ReactionColumns] = field(repr=False, default_factory=dict)

    @property
    def page_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.pages))

    def require_page(self, page_id: str) -> PageMeta:
        try:
            return self.pages[page_id]
        except KeyError:
            raise EngageError(f"unknown page {page_id!r}") from None

    def posts_of(self, page_id: str) -> _PostColumns:
        self.require_page(page_id)
        return self._post_cols.get(page_id, _EMPTY_POSTS)

    def reactions_of(self, page_id: str) -> _ReactionColumns:
        self.require_page(page_id)
        return self._reaction_cols.get(page_id, _EMPTY_REACTIONS)

    def post_texts_of(self, page_id: str) -> list[str]:
        self.require_page(page_id)
        return [p.text for p in self.posts if p.page_id == page_id and p.text]


@dataclass
class ValidationReport:
    """Per-line accounting for one ingestion run.

    ``total_lines == accepted_posts + accepted_reactions + sum(rejected)``
    always holds; orphan reactions are accepted but flagged.
    """

    total_lines: int = 0
    accepted_posts: int = 0
    accepted_reactions: int = 0
    orphan_reactions: int = 0
    rejected: dict[str, int] = field(default_factory=dict)
    line_errors: list[tuple[int, str]] = field(default_factory=list)

    MAX_DETAILED_ERRORS = 100

    @property
    def rejected_total(self) -> int:
        return sum(self.rejected.values())

    def reject(self, line_no: int, reason: str, detail: str = "") -> None:
        self.rejected[reason] = self.rejected.get(reason, 0) + 1
        if len(self.line_errors) < self.MAX_DETAILED_ERRORS:
            msg = f"{reason}: {detail}" if detail else reason
            self.line_errors.append((line_no, msg))

    def summary(self) -> str:
        lines = [
            f"lines read: {self.total_lines}",
            f"accepted: {self.accepted_posts} posts, {self.accepted_reactions} reactions",
            f"orphan reactions (kept): {self.orphan_reactions}",
            f"rejected: {self.rejected_total}",
        ]
        for reason in sorted(self.rejected):
            lines.append(f"  {reason}: {self.rejected[reason]}")
        for line_no, msg in self.line_errors[:20]:
            lines.append(f"  line {line_no}: {msg}")
        return "\n".join(lines)


def normalize_timestamp(timestamp_utc: int, tz_offset_minutes: int) -> datetime:
    """Shift a UTC epoch instant to a fixed-offset local wall clock.

    Pure and total over valid offsets; no daylight-saving rules.
    """
    if not TZ_OFFSET_MIN <= tz_offset_minutes <= TZ_OFFSET_MAX:
        raise EngageError(f"tz offset {tz_offset_minutes} outside valid range")
    return _EPOCH + timedelta(seconds=timestamp_utc, minutes=tz_offset_minutes)


def _default_stopwords() -> frozenset[str]:
    text = resources.files("engagesched").joinpath("data/stopwords.txt").read_text("utf-8")
    return _parse_stopwords(text)


def _parse_stopwords(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def load_stopwords(path: str) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return _parse_stopwords(fh.read())


_DEFAULT_STOPWORDS: frozenset[str] | None = None


def default_stopwords() -> frozenset[str]:
    global _DEFAULT_STOPWORDS
    if _DEFAULT_STOPWORDS is None:
        _DEFAULT_STOPWORDS = _default_stopwords()
    return _DEFAULT_STOPWORDS


def stem(token: str) -> str:
    """Suffix-stripping stemmer (idempotent).

    Rules, applied in order to a lowercase token:
      1. ``-sses`` -> ``-ss``; ``-ies`` -> ``-i`` (length > 4); a final
         ``-s`` is dropped when the remainder is longer than 2 and contains
         a vowel (``-ss`` is kept).
      2. ``-ing`` or ``-ed`` is dropped when the remainder has >= 3 chars
         and a vowel; a resulting doubled final consonant (except l/s/z)
         is undoubled.
    """
    t = token
    if t.endswith("sses"):
        t = t[:-2]
    elif t.endswith("ies") and len(t) > 4:
        t = t[:-3] + "i"
    elif t.endswith("ss"):
        pass
    elif t.endswith("s") and len(t) > 3 and _VOWELS.intersection(t[:-1]):
        t = t[:-1]
    for suffix in ("ing", "ed"):
        if t.endswith(suffix):
            rest = t[: -len(suffix)]
            if len(rest) >= 3 and _VOWELS.intersection(rest):
                t = rest
                if t[-1] == t[-2] and t[-1] not in "lsz":
                    t = t[:-1]
            break
    return t


def preprocess_text(raw: str, stopwords: frozenset[str] | None = None) -> TokenList:
    """Lowercase, tokenize on non-alphanumeric boundaries, drop stop words, stem.

    Stop words are filtered both before and after stemming so the output
    never contains a configured stop word, and re-running the function on
    its own (joined) output is a no-op.
    """
    if stopwords is None:
        stopwords = default_stopwords()
    tokens = _TOKEN_RE.findall(raw.lower())
    out = []
    for tok in tokens:
        if tok in stopwords:
            continue
        stemmed = stem(tok)
        if stemmed and stemmed not in stopwords:
            out.append(stemmed)
    return tuple(out)


def _parse_optional_int(value: str, column: str, row_no: int) -> int | None:
    if value == "":
        return None
    try:
        n = int(value)
    except ValueError:
        raise EngageError(f"metadata row {row_no}: {column} must be an integer, got {value!r}") from None
    if n < 0:
        raise EngageError(f"metadata row {row_no}: {column} must be nonnegative")
    return n


def load_page_metadata(source: str | Iterable[str]) -> dict[str, PageMeta]:
    """Parse the page-metadata CSV into a page_id -> PageMeta mapping.

    The header must contain exactly the documented columns; the last three
    may be blank. Malformed rows and duplicate page ids raise.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.DictReader(source)
    if reader.fieldnames is None or tuple(reader.fieldnames) != META_COLUMNS:
        raise EngageError(
            f"metadata header must be {','.join(META_COLUMNS)}, "
            f"got {reader.fieldnames}"
        )
    pages: dict[str, PageMeta] = {}
    for row_no, row in enumerate(reader, start=2):
        page_id = (row["page_id"] or "").strip()
        if not page_id:
            raise EngageError(f"metadata row {row_no}: empty page_id")
        if page_id in pages:
            raise EngageError(f"metadata row {row_no}: duplicate page_id {page_id!r}")
        try:
            tz = int(row["tz_offset_minutes"])
        except (TypeError, ValueError):
            raise EngageError(
                f"metadata row {row_no}: tz_offset_minutes must be an integer"
            ) from None
        growth_raw = (row["fan_growth_rate"] or "").strip()
        try:
            growth = float(growth_raw) if growth_raw else None
        except ValueError:
            raise EngageError(f"metadata row {row_no}: bad fan_growth_rate {growth_raw!r}") from None
        pages[page_id] = PageMeta(
            page_id=page_id,
            label=(row["label"] or "").strip(),
            tz_offset_minutes=tz,
            fan_count=_parse_optional_int((row["fan_count"] or "").strip(), "fan_count", row_no),
            talking_about_count=_parse_optional_int(
                (row["talking_about_count"] or "").strip(), "talking_about_count", row_no
            ),
            fan_growth_rate=growth,
        )
    return pages


def _iter_lines(stream: str | bytes | Iterable[str]) -> Iterator[str]:
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    if isinstance(stream, str):
        return iter(stream.splitlines())
    return (line.rstrip("\n") for line in stream)


def _local_year(local_ts: int) -> int:
    return (_EPOCH + timedelta(seconds=local_ts)).year


def _require_str(record: dict, key: str) -> str:
    value = record.get(key)
    if not isinstance(value, str) or not value:
        raise ValueError(f"field {key!r} must be a non-empty string")
    return value


def _require_int(record: dict, key: str) -> int:
    value = record.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"field {key!r} must be an integer")
    return value


def parse_event_log(
    stream: str | bytes | Iterable[str],
    pages: Mapping[str, PageMeta],
    year_range: tuple[int, int],
) -> tuple[EventStore, ValidationReport]:
    """Parse a JSON-lines event log into a validated EventStore.

    Every input line is either accepted or rejected with a counted reason;
    malformed lines are recorded with their 1-based line number. Reactions
    are resolved against posts after the whole stream is read, so record
    order does not matter. Deterministic: same bytes, same store.
    """
    y_start, y_end = year_range
    if y_end < y_start:
        raise EngageError(f"year range {year_range} is empty")
    report = ValidationReport()
    posts: list[PostEvent] = []
    post_ts: dict[tuple[str, str], int] = {}
    post_type: dict[tuple[str, str], str] = {}
    pending: list[tuple[int, ReactionEvent]] = []

    for line_no, line in enumerate(_iter_lines(stream), start=1):
        report.total_lines += 1
        try:
            record = json.loads(line)
            if not isinstance(record, dict):
                raise ValueError("record must be a JSON object")
            rtype = record.get("type")
            if rtype == "post":
                event = PostEvent(
                    post_id=_require_str(record, "post_id"),
                    page_id=_require_str(record, "page_id"),
                    timestamp_utc=_require_int(record, "timestamp_utc"),
                    content_type=_require_str(record, "content_type"),
                    text=record.get("text") if isinstance(record.get("text"), str) else None,
                )
                if event.content_type not in CONTENT_TYPES:
                    raise ValueError(f"unknown content_type {event.content_type!r}")
            elif rtype == "reaction":
                raw_post = record.get("post_id")
                if raw_post is not None and (not isinstance(raw_post, str) or not raw_post):
                    raise ValueError("field 'post_id' must be a non-empty string or omitted")
                event = ReactionEvent(
                    reaction_id=_require_str(record, "reaction_id"),
                    page_id=_require_str(record, "page_id"),
                    kind=_require_str(record, "kind"),
                    timestamp_utc=_require_int(record, "timestamp_utc"),
                    post_id=raw_post,
                )
                if event.kind not in REACTION_KINDS:
                    raise ValueError(f"unknown reaction kind {event.kind!r}")
            else:
                raise ValueError(f"unknown record type {rtype!r}")
        except (json.JSONDecodeError, ValueError) as exc:
            report.reject(line_no, "malformed", str(exc))
            continue

        meta = pages.get(event.page_id)
        if meta is None:
            report.reject(line_no, "unknown_page", event.page_id)
            continue
        local_year = _local_year(event.timestamp_utc + meta.tz_offset_minutes * 60)
        if not y_start <= local_year <= y_end:
            report.reject(line_no, "year_out_of_range", f"local year {local_year}")
            continue

        if isinstance(event, PostEvent):
            key = (event.page_id, event.post_id)
            if key in post_ts:
                report.reject(line_no, "duplicate_post", event.post_id)
                continue
            post_ts[key] = event.timestamp_utc
            post_type[key] = event.content_type
            posts.append(event)
            report.accepted_posts += 1
        else:
            pending.append((line_no, event))

    reactions: list[ReactionEvent] = []
    for line_no, event in pending:
        if event.post_id is not None:
            parent = post_ts.get((event.page_id, event.post_id))
            if parent is not None and event.timestamp_utc < parent:
                report.reject(line_no, "reaction_before_parent", event.reaction_id)
                continue
            if parent is None:
                report.orphan_reactions += 1
        else:
            report.orphan_reactions += 1
        reactions.append(event)
        report.accepted_reactions += 1

    store = _assemble(pages, posts, reactions, (y_start, y_end), post_ts, post_type)
    return store, report


def build_store(
    pages: Mapping[str, PageMeta],
    posts: Sequence[PostEvent],
    reactions: Sequence[ReactionEvent],
    year_range: tuple[int, int],
) -> EventStore:
    """Construct a store from in-memory records, enforcing all invariants.

    Unlike :func:`parse_event_log`, which counts and skips bad records,
    this raises on the first violation (meant for programmatic callers).
    """
    y_start, y_end = year_range
    if y_end < y_start:
        raise EngageError(f"year range {year_range} is empty")
    post_ts: dict[tuple[str, str], int] = {}
    post_type: dict[tuple[str, str], str] = {}
    for post in posts:
        meta = pages.get(post.page_id)
        if meta is None:
            raise EngageError(f"post {post.post_id!r} references unknown page {post.page_id!r}")
        if post.content_type not in CONTENT_TYPES:
            raise EngageError(f"post {post.post_id!r} has unknown content_type")
        key = (post.page_id, post.post_id)
        if key in post_ts:
            raise EngageError(f"duplicate post_id {post.post_id!r} for page {post.page_id!r}")
        year = _local_year(post.timestamp_utc + meta.tz_offset_minutes * 60)
        if not y_start <= year <= y_end:
            raise EngageError(f"post {post.post_id!r} local year {year} outside range")
        post_ts[key] = post.timestamp_utc
        post_type[key] = post.content_type
    for reaction in reactions:
        meta = pages.get(reaction.page_id)
        if meta is None:
            raise EngageError(
                f"reaction {reaction.reaction_id!r} references unknown page {reaction.page_id!r}"
            )
        if reaction.kind not in REACTION_KINDS:
            raise EngageError(f"reaction {reaction.reaction_id!r} has unknown kind")
        year = _local_year(reaction.timestamp_utc + meta.tz_offset_minutes * 60)
        if not y_start <= year <= y_end:
            raise EngageError(f"reaction {reaction.reaction_id!r} local year {year} outside range")
        if reaction.post_id is not None:
            parent = post_ts.get((reaction.page_id, reaction.post_id))
            if parent is not None and reaction.timestamp_utc < parent:
                raise EngageError(
                    f"reaction {reaction.reaction_id!r} precedes its parent post"
                )
    return _assemble(pages, list(posts), list(reactions), (y_start, y_end), post_ts, post_type)


def _assemble(
    pages: Mapping[str, PageMeta],
    posts: list[PostEvent],
    reactions: list[ReactionEvent],
    year_range: tuple[int, int],
    post_ts: dict[tuple[str, str], int],
    post_type: dict[tuple[str, str], str],
) -> EventStore:
    type_code = {name: i for i, name in enumerate(CONTENT_TYPES)}
    kind_code = {name: i for i, name in enumerate(REACTION_KINDS)}

    post_cols: dict[str, _PostColumns] = {}
    by_page_posts: dict[str, list[PostEvent]] = {}
    for post in posts:
        by_page_posts.setdefault(post.page_id, []).append(post)
    for page_id, events in by_page_posts.items():
        offset = pages[page_id].tz_offset_minutes * 60
        post_cols[page_id] = _PostColumns(
            local_ts=_readonly(
                np.fromiter((e.timestamp_utc + offset for e in events), np.int64, len(events))
            ),
            type_code=_readonly(
                np.fromiter((type_code[e.content_type] for e in events), np.int8, len(events))
            ),
            text_len=_readonly(
                np.fromiter((len(e.text) if e.text else 0 for e in events), np.int32, len(events))
            ),
        )

    reaction_cols: dict[str, _ReactionColumns] = {}
    by_page_reactions: dict[str, list[ReactionEvent]] = {}
    for reaction in reactions:
        by_page_reactions.setdefault(reaction.page_id, []).append(reaction)
    for page_id, events in by_page_reactions.items():
        offset = pages[page_id].tz_offset_minutes * 60
        n = len(events)
        local = np.empty(n, np.int64)
        kinds = np.empty(n, np.int8)
        delays = np.full(n, -1, np.int64)
        parent_local = np.full(n, -1, np.int64)
        parent_types = np.full(n, -1, np.int8)
        for i, e in enumerate(events):
            local[i] = e.timestamp_utc + offset
            kinds[i] = kind_code[e.kind]
            if e.post_id is not None:
                parent = post_ts.get((page_id, e.post_id))
                if parent is not None:
                    delays[i] = e.timestamp_utc - parent
                    parent_local[i] = parent + offset
                    parent_types[i] = type_code[post_type[(page_id, e.post_id)]]
        reaction_cols[page_id] = _ReactionColumns(
            local_ts=_readonly(local),
            kind_code=_readonly(kinds),
            delay_s=_readonly(delays),
            parent_local_ts=_readonly(parent_local),
            parent_type=_readonly(parent_types),
        )

    return EventStore(
        pages=dict(pages),
        posts=tuple(posts),
        reactions=tuple(reactions),
        year_range=year_range,
        _post_cols=post_cols,
        _reaction_cols=reaction_cols,
    )


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr
