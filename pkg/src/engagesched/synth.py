"""Deterministic synthetic event-log generator and naive counting oracle.

The generator plants known structure (peaked bucket intensities, category
memberships, text vocabularies, label noise) and records it in a manifest,
so tests can check that the analysis pipeline recovers it.
:func:`brute_force_counts` is an intentionally naive re-implementation of
per-bucket counting that shares no aggregation code with the profiles
module; it exists purely as a cross-check oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Mapping

import numpy as np

from .errors import EngageError
from .ingest import CONTENT_TYPES, REACTION_KINDS, TZ_OFFSET_MAX, TZ_OFFSET_MIN

BUCKETS = 96
DELAY_TRUNCATION_HOURS = 168.0

MANIFEST_VERSION = 1

# delay-mode posts stay this many days clear of the range end so that
# truncated delays cannot push reactions into the next year
_DELAY_MARGIN_DAYS = 8


def peaked_intensity(
    peak_bucket: int | None,
    peak_weight: float = 5.0,
    background: float = 1.0,
) -> np.ndarray:
    """A 96-bucket weight vector: flat background with one elevated bucket."""
    if background < 0 or peak_weight < 0:
        raise EngageError("intensity weights must be nonnegative")
    vec = np.full(BUCKETS, float(background))
    if peak_bucket is not None:
        if not 1 <= peak_bucket <= BUCKETS:
            raise EngageError(f"peak bucket {peak_bucket} outside [1, {BUCKETS}]")
        vec[peak_bucket - 1] = float(peak_weight)
    return vec


def _check_intensity(vec: np.ndarray, what: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64)
    if arr.shape != (BUCKETS,):
        raise EngageError(f"{what} must have exactly {BUCKETS} entries")
    if np.any(arr < 0):
        raise EngageError(f"{what} must be nonnegative")
    if arr.sum() <= 0:
        raise EngageError(f"{what} must have positive total weight")
    return arr


@dataclass(frozen=True)
class CategorySpec:
    """Ground-truth description of one planted page category."""

    name: str
    n_pages: int
    posts_per_page: int
    reactions_per_page: int
    posting_intensity: np.ndarray = field(default_factory=lambda: peaked_intensity(None))
    reaction_intensity: np.ndarray = field(default_factory=lambda: peaked_intensity(None))
    reaction_mode: str = "intensity"
    delay_rate_per_hour: float = 0.5
    tz_offset_minutes: int = 0
    peak_bucket: int | None = None
    label: str | None = None
    vocabulary: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise EngageError("category name must be non-empty")
        if self.n_pages < 0 or self.posts_per_page < 0 or self.reactions_per_page < 0:
            raise EngageError("volumes must be nonnegative")
        object.__setattr__(
            self, "posting_intensity", _check_intensity(self.posting_intensity, "posting intensity")
        )
        object.__setattr__(
            self, "reaction_intensity", _check_intensity(self.reaction_intensity, "reaction intensity")
        )
        if self.reaction_mode not in ("intensity", "delay"):
            raise EngageError(f"unknown reaction mode {self.reaction_mode!r}")
        if self.delay_rate_per_hour <= 0:
            raise EngageError("delay rate must be positive")
        if not TZ_OFFSET_MIN <= self.tz_offset_minutes <= TZ_OFFSET_MAX:
            raise EngageError("tz offset outside valid range")

    @property
    def true_label(self) -> str:
        return self.label if self.label is not None else self.name

    def vocab(self) -> tuple[str, ...]:
        if self.vocabulary:
            return self.vocabulary
        return tuple(f"{self.name}term{i:02d}" for i in range(12))


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    categories: tuple[CategorySpec, ...]
    year_range: tuple[int, int] = (2012, 2012)
    content_type_mix: tuple[float, ...] = (0.25, 0.25, 0.25, 0.25)
    reaction_kind_mix: tuple[float, ...] = (0.25, 0.6, 0.15)
    label_noise_rate: float = 0.0

    def __post_init__(self) -> None:
        if not self.categories:
            raise EngageError("config needs at least one category")
        if self.year_range[1] < self.year_range[0]:
            raise EngageError(f"year range {self.year_range} is empty")
        for mix, size, what in (
            (self.content_type_mix, len(CONTENT_TYPES), "content type mix"),
            (self.reaction_kind_mix, len(REACTION_KINDS), "reaction kind mix"),
        ):
            if len(mix) != size or any(w < 0 for w in mix) or sum(mix) <= 0:
                raise EngageError(f"{what} must be {size} nonnegative weights with positive sum")
        if not 0.0 <= self.label_noise_rate <= 1.0:
            raise EngageError("label noise rate must be in [0, 1]")
        names = [c.name for c in self.categories]
        if len(set(names)) != len(names):
            raise EngageError("category names must be unique")


@dataclass(frozen=True)
class SynthResult:
    log_bytes: bytes
    pages_csv: str
    manifest: dict

    def manifest_json(self) -> str:
        return json.dumps(self.manifest, indent=2, sort_keys=True) + "\n"


def _epoch_day(d: date) -> int:
    return (d - date(1970, 1, 1)).days


def _draw_bucket_times(
    rng: np.random.Generator,
    intensity: np.ndarray,
    n: int,
    day0_s: int,
    n_days: int,
) -> np.ndarray:
    """Local epoch seconds: day uniform, bucket by weight, second uniform."""
    if n == 0:
        return np.empty(0, np.int64)
    p = intensity / intensity.sum()
    buckets = rng.choice(BUCKETS, size=n, p=p).astype(np.int64)
    days = rng.integers(0, n_days, size=n, dtype=np.int64)
    secs = rng.integers(0, 900, size=n, dtype=np.int64)
    return day0_s + days * 86400 + buckets * 900 + secs


def _truncated_exp_delays(
    rng: np.random.Generator, rate_per_hour: float, n: int
) -> np.ndarray:
    """Delays in seconds from an exponential truncated at one week (inversion)."""
    u = rng.random(n)
    cap = 1.0 - math.exp(-rate_per_hour * DELAY_TRUNCATION_HOURS)
    hours = -np.log1p(-u * cap) / rate_per_hour
    return np.minimum(np.round(hours * 3600.0), DELAY_TRUNCATION_HOURS * 3600.0).astype(np.int64)


def generate(config: SynthConfig) -> SynthResult:
    """Produce a deterministic event log, metadata CSV, and truth manifest."""
    rng = np.random.default_rng(config.seed)
    y_start, y_end = config.year_range
    day0_s = _epoch_day(date(y_start, 1, 1)) * 86400
    n_days = _epoch_day(date(y_end + 1, 1, 1)) - _epoch_day(date(y_start, 1, 1))

    page_rows = []  # (page_id, spec, fan, talking, growth)
    for spec in config.categories:
        for i in range(spec.n_pages):
            page_id = f"{spec.name}_pg{i:03d}"
            fan = int(rng.integers(10_000, 1_000_000))
            talking = int(rng.integers(100, 10_000))
            growth = round(float(rng.uniform(0.0, 0.1)), 6)
            page_rows.append((page_id, spec, fan, talking, growth))

    observed = {pid: spec.true_label for pid, spec, *_ in page_rows}
    n_noisy = round(config.label_noise_rate * len(page_rows))
    if n_noisy > 0:
        labels = sorted({spec.true_label for spec in config.categories})
        if len(labels) < 2:
            raise EngageError("label noise needs at least two distinct labels")
        chosen = rng.choice(len(page_rows), size=n_noisy, replace=False)
        for idx in sorted(int(i) for i in chosen):
            pid, spec, *_ = page_rows[idx]
            others = [lab for lab in labels if lab != spec.true_label]
            observed[pid] = others[int(rng.integers(0, len(others)))]

    type_p = np.asarray(config.content_type_mix, np.float64)
    type_p = type_p / type_p.sum()
    kind_p = np.asarray(config.reaction_kind_mix, np.float64)
    kind_p = kind_p / kind_p.sum()

    lines: list[str] = []
    total_posts = total_reactions = total_orphans = 0
    for page_id, spec, *_ in page_rows:
        off_s = spec.tz_offset_minutes * 60
        vocab = np.asarray(spec.vocab())

        post_days = n_days
        if spec.reaction_mode == "delay":
            post_days = n_days - _DELAY_MARGIN_DAYS
            if post_days <= 0 and spec.posts_per_page > 0:
                raise EngageError("year range too short for delay-mode generation")
        post_local = np.sort(
            _draw_bucket_times(rng, spec.posting_intensity, spec.posts_per_page, day0_s, post_days)
        )
        post_utc = post_local - off_s
        post_ids = [f"{page_id}_post{j:05d}" for j in range(post_utc.size)]
        type_codes = (
            rng.choice(len(CONTENT_TYPES), size=post_utc.size, p=type_p)
            if post_utc.size
            else np.empty(0, np.int64)
        )
        for j in range(post_utc.size):
            tokens = vocab[rng.integers(0, vocab.size, size=8)]
            record = {
                "type": "post",
                "post_id": post_ids[j],
                "page_id": page_id,
                "timestamp_utc": int(post_utc[j]),
                "content_type": CONTENT_TYPES[int(type_codes[j])],
                "text": " ".join(tokens.tolist()),
            }
            lines.append(json.dumps(record))
        total_posts += post_utc.size

        n_re = spec.reactions_per_page
        if n_re > 0:
            kinds = rng.choice(len(REACTION_KINDS), size=n_re, p=kind_p)
            if spec.reaction_mode == "intensity":
                re_local = np.sort(
                    _draw_bucket_times(rng, spec.reaction_intensity, n_re, day0_s, n_days)
                )
                re_utc = re_local - off_s
                parent_idx = np.searchsorted(post_utc, re_utc, side="right") - 1
            else:
                if post_utc.size == 0:
                    raise EngageError(
                        f"category {spec.name!r}: delay mode needs at least one post"
                    )
                parent_idx = rng.integers(0, post_utc.size, size=n_re)
                delays = _truncated_exp_delays(rng, spec.delay_rate_per_hour, n_re)
                re_utc = post_utc[parent_idx] + delays
                order = np.argsort(re_utc, kind="stable")
                re_utc = re_utc[order]
                parent_idx = parent_idx[order]
                kinds = kinds[order]
            for j in range(n_re):
                record = {
                    "type": "reaction",
                    "reaction_id": f"{page_id}_re{j:06d}",
                    "page_id": page_id,
                    "kind": REACTION_KINDS[int(kinds[j])],
                    "timestamp_utc": int(re_utc[j]),
                }
                pi = int(parent_idx[j])
                if pi >= 0:
                    record["post_id"] = post_ids[pi]
                else:
                    total_orphans += 1
                lines.append(json.dumps(record))
            total_reactions += n_re

    csv_lines = ["page_id,label,tz_offset_minutes,fan_count,talking_about_count,fan_growth_rate"]
    for page_id, spec, fan, talking, growth in page_rows:
        csv_lines.append(
            f"{page_id},{observed[page_id]},{spec.tz_offset_minutes},{fan},{talking},{growth}"
        )

    manifest = {
        "version": MANIFEST_VERSION,
        "seed": config.seed,
        "year_range": list(config.year_range),
        "label_noise_rate": config.label_noise_rate,
        "content_type_mix": list(config.content_type_mix),
        "reaction_kind_mix": list(config.reaction_kind_mix),
        "categories": [
            {
                "name": spec.name,
                "label": spec.true_label,
                "n_pages": spec.n_pages,
                "posts_per_page": spec.posts_per_page,
                "reactions_per_page": spec.reactions_per_page,
                "reaction_mode": spec.reaction_mode,
                "delay_rate_per_hour": spec.delay_rate_per_hour,
                "peak_bucket": spec.peak_bucket,
                "tz_offset_minutes": spec.tz_offset_minutes,
            }
            for spec in config.categories
        ],
        "pages": {
            page_id: {
                "category": spec.name,
                "true_label": spec.true_label,
                "observed_label": observed[page_id],
                "tz_offset_minutes": spec.tz_offset_minutes,
            }
            for page_id, spec, *_ in page_rows
        },
        "counts": {
            "posts": total_posts,
            "reactions": total_reactions,
            "orphan_reactions": total_orphans,
        },
    }
    log_text = "\n".join(lines)
    if lines:
        log_text += "\n"
    return SynthResult(
        log_bytes=log_text.encode("utf-8"),
        pages_csv="\n".join(csv_lines) + "\n",
        manifest=manifest,
    )


def brute_force_counts(
    log_bytes: bytes | str, tz_offsets: Mapping[str, int]
) -> dict[str, dict[str, list[int]]]:
    """Naive per-page per-bucket tally, independent of the profiles module.

    Pure-Python single pass: no numpy, no shared helpers. Raises on any
    malformed line. Pages without events are absent from the result.
    """
    if isinstance(log_bytes, bytes):
        text = log_bytes.decode("utf-8")
    else:
        text = log_bytes
    counts: dict[str, dict[str, list[int]]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EngageError(f"line {line_no}: bad JSON ({exc})") from None
        if not isinstance(record, dict):
            raise EngageError(f"line {line_no}: record must be an object")
        rtype = record.get("type")
        if rtype == "post":
            kind = "posting"
        elif rtype == "reaction":
            kind = "reaction"
        else:
            raise EngageError(f"line {line_no}: unknown type {rtype!r}")
        page_id = record.get("page_id")
        ts = record.get("timestamp_utc")
        if not isinstance(page_id, str) or isinstance(ts, bool) or not isinstance(ts, int):
            raise EngageError(f"line {line_no}: bad page_id or timestamp")
        if page_id not in tz_offsets:
            raise EngageError(f"line {line_no}: unknown page {page_id!r}")
        local = ts + tz_offsets[page_id] * 60
        bucket = (local % 86400) // 900
        page_counts = counts.setdefault(
            page_id, {"posting": [0] * BUCKETS, "reaction": [0] * BUCKETS}
        )
        page_counts[kind][bucket] += 1
    return counts


_TOP_KEYS = {
    "seed": int,
    "year_start": int,
    "year_end": int,
    "label_noise_rate": float,
}
_CAT_INT_KEYS = {
    "n_pages",
    "posts_per_page",
    "reactions_per_page",
    "tz_offset_minutes",
    "posting_peak_bucket",
    "reaction_peak_bucket",
}
_CAT_FLOAT_KEYS = {
    "delay_rate_per_hour",
    "posting_peak_weight",
    "posting_background",
    "reaction_peak_weight",
    "reaction_background",
}
_CAT_STR_KEYS = {"mode", "label", "vocabulary"}


def load_config(text: str) -> SynthConfig:
    """Parse the plain key-value generator config format.

    Lines are ``key = value``; ``#`` starts a comment. Category settings
    use ``category.<name>.<field>`` keys; categories appear in the order
    their first key appears.
    """
    top: dict[str, object] = {}
    cats: dict[str, dict[str, object]] = {}
    mixes: dict[str, tuple[float, ...]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise EngageError(f"config line {line_no}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key in _TOP_KEYS:
                top[key] = _TOP_KEYS[key](value)
            elif key in ("content_type_mix", "reaction_kind_mix"):
                mixes[key] = tuple(float(v) for v in value.split(","))
            elif key.startswith("category."):
                _, name, fieldname = key.split(".", 2)
                if not name:
                    raise ValueError("empty category name")
                bucket = cats.setdefault(name, {})
                if fieldname in _CAT_INT_KEYS:
                    bucket[fieldname] = int(value)
                elif fieldname in _CAT_FLOAT_KEYS:
                    bucket[fieldname] = float(value)
                elif fieldname in _CAT_STR_KEYS:
                    bucket[fieldname] = value
                else:
                    raise ValueError(f"unknown category field {fieldname!r}")
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise EngageError(f"config line {line_no}: {exc}") from None

    if "seed" not in top:
        raise EngageError("config must set seed")
    if not cats:
        raise EngageError("config must define at least one category")

    categories = []
    for name, fields in cats.items():
        posting = peaked_intensity(
            fields.get("posting_peak_bucket"),
            fields.get("posting_peak_weight", 5.0),
            fields.get("posting_background", 1.0),
        )
        reaction = peaked_intensity(
            fields.get("reaction_peak_bucket"),
            fields.get("reaction_peak_weight", 5.0),
            fields.get("reaction_background", 1.0),
        )
        vocab_raw = fields.get("vocabulary", "")
        vocabulary = tuple(tok for tok in str(vocab_raw).split(",") if tok) if vocab_raw else ()
        categories.append(
            CategorySpec(
                name=name,
                n_pages=int(fields.get("n_pages", 0)),
                posts_per_page=int(fields.get("posts_per_page", 0)),
                reactions_per_page=int(fields.get("reactions_per_page", 0)),
                posting_intensity=posting,
                reaction_intensity=reaction,
                reaction_mode=str(fields.get("mode", "intensity")),
                delay_rate_per_hour=float(fields.get("delay_rate_per_hour", 0.5)),
                tz_offset_minutes=int(fields.get("tz_offset_minutes", 0)),
                peak_bucket=fields.get("reaction_peak_bucket"),
                label=fields.get("label"),
                vocabulary=vocabulary,
            )
        )

    year_start = int(top.get("year_start", 2012))
    year_end = int(top.get("year_end", year_start))
    return SynthConfig(
        seed=int(top["seed"]),
        categories=tuple(categories),
        year_range=(year_start, year_end),
        content_type_mix=mixes.get("content_type_mix", (0.25, 0.25, 0.25, 0.25)),
        reaction_kind_mix=mixes.get("reaction_kind_mix", (0.25, 0.6, 0.15)),
        label_noise_rate=float(top.get("label_noise_rate", 0.0)),
    )
