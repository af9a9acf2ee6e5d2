"""Shared helpers for building tiny in-memory event logs."""

from __future__ import annotations

import json
from datetime import datetime, timedelta

import pytest

from engagesched.ingest import PageMeta, build_store, parse_event_log

EPOCH = datetime(1970, 1, 1)


def utc_ts(year: int, month: int, day: int, hour: int = 0, minute: int = 0, second: int = 0) -> int:
    """Epoch seconds for a UTC wall-clock instant."""
    return int((datetime(year, month, day, hour, minute, second) - EPOCH).total_seconds())


def local_ts(
    tz_offset_minutes: int,
    year: int,
    month: int,
    day: int,
    hour: int = 0,
    minute: int = 0,
    second: int = 0,
) -> int:
    """Epoch seconds (UTC) such that the page-local clock reads the given wall time."""
    return utc_ts(year, month, day, hour, minute, second) - tz_offset_minutes * 60


def post_line(
    post_id: str,
    page_id: str,
    timestamp_utc: int,
    content_type: str = "status",
    text: str | None = None,
) -> str:
    record = {
        "type": "post",
        "post_id": post_id,
        "page_id": page_id,
        "timestamp_utc": timestamp_utc,
        "content_type": content_type,
    }
    if text is not None:
        record["text"] = text
    return json.dumps(record)


def reaction_line(
    reaction_id: str,
    page_id: str,
    timestamp_utc: int,
    kind: str = "like",
    post_id: str | None = None,
) -> str:
    record = {
        "type": "reaction",
        "reaction_id": reaction_id,
        "page_id": page_id,
        "kind": kind,
        "timestamp_utc": timestamp_utc,
    }
    if post_id is not None:
        record["post_id"] = post_id
    return json.dumps(record)


def make_pages(*specs: tuple[str, int]) -> dict[str, PageMeta]:
    """Pages from (page_id, tz_offset_minutes) pairs; label defaults to 'misc'."""
    return {
        pid: PageMeta(page_id=pid, label="misc", tz_offset_minutes=off)
        for pid, off in specs
    }


def parse_lines(lines: list[str], pages: dict[str, PageMeta], year_range=(1970, 1970)):
    return parse_event_log("\n".join(lines), pages, year_range)


def bucket_post_lines(page_id, bucket, n, tag):
    """n posts for the page, all inside the given bucket, on distinct days."""
    return [
        post_line(f"{tag}{i}", page_id, i * 86400 + (bucket - 1) * 900)
        for i in range(n)
    ]


def bucket_reaction_lines(page_id, bucket, n, tag):
    return [
        reaction_line(f"{tag}{i}", page_id, i * 86400 + (bucket - 1) * 900 + 5)
        for i in range(n)
    ]


def store_with_posts(spec):
    """spec: {page_id: {bucket: n_posts}} on zero-offset pages."""
    pages = make_pages(*((pid, 0) for pid in spec))
    lines = []
    for pid, buckets in spec.items():
        for bucket, n in buckets.items():
            lines.extend(bucket_post_lines(pid, bucket, n, f"{pid}b{bucket}_"))
    store, report = parse_lines(lines, pages)
    assert report.rejected_total == 0
    return store


def store_with_reactions(spec):
    pages = make_pages(*((pid, 0) for pid in spec))
    lines = []
    for pid, buckets in spec.items():
        for bucket, n in buckets.items():
            lines.extend(bucket_reaction_lines(pid, bucket, n, f"{pid}b{bucket}_"))
    store, report = parse_lines(lines, pages)
    assert report.rejected_total == 0
    return store


def store_with_mixed(post_spec, reaction_spec):
    """Both kinds on zero-offset pages; specs as {page: {bucket: n}}."""
    page_ids = sorted(set(post_spec) | set(reaction_spec))
    pages = make_pages(*((pid, 0) for pid in page_ids))
    lines = []
    for pid, buckets in post_spec.items():
        for bucket, n in buckets.items():
            lines.extend(bucket_post_lines(pid, bucket, n, f"{pid}pb{bucket}_"))
    for pid, buckets in reaction_spec.items():
        for bucket, n in buckets.items():
            lines.extend(bucket_reaction_lines(pid, bucket, n, f"{pid}rb{bucket}_"))
    store, report = parse_lines(lines, pages)
    assert report.rejected_total == 0
    return store


def store_from_synth(result, year_range):
    """Parse a generated log + metadata into a store, asserting zero rejects."""
    from engagesched.ingest import load_page_metadata

    pages = load_page_metadata(result.pages_csv)
    store, report = parse_event_log(result.log_bytes, pages, year_range)
    assert report.rejected_total == 0, report.summary()
    return store


@pytest.fixture
def single_page():
    return make_pages(("p1", 0))
