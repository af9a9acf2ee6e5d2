"""Command-line interface for the engagement-schedule toolkit.

Each subcommand loads the event log into an :class:`~engagesched.ingest.EventStore`
(or, for ``synth``, a generator config) and writes plot-ready artifacts into an
output directory. Every text artifact starts with ``#`` header comments naming
the producing command and a 12-hex-digit hash of the resolved settings, so a
file can always be traced back to the run that made it; JSON artifacts carry
the same provenance as top-level keys. Outputs are deterministic: rerunning a
command on the same inputs reproduces every file byte for byte.

Exit codes: 0 on success, 1 on a diagnosed error (bad inputs, undefined
quantities) with a message on stderr, 2 on command-line usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .categorize import CategoryModel, build_category_model, model_to_json
from .errors import EngageError
from .evaluate import (
    ReactionGainReport,
    avg_gain_tsv,
    avg_reaction_gain,
    category_correlations,
    content_type_report,
    content_type_tsv,
    correlation_tsv,
    format_gain_text,
    gain_tsv,
    reaction_gain,
    schedule_gain_table,
)
from .ingest import (
    EventStore,
    ValidationReport,
    load_page_metadata,
    load_stopwords,
    parse_event_log,
)
from .profiles import (
    BUCKETS_PER_DAY,
    DelayHistogram,
    counts_tsv,
    cumulative_profile,
    delay_distribution,
    periodic_profile,
)
from .schedules import (
    SCHEDULE_KINDS,
    aggregated_schedule,
    categorized_schedule,
    normalized,
    schedule_tsv,
    weighted_categorized_schedule,
)
from .synth import generate, load_config

THREADS_ENV_VAR = "ENGAGE_SCHED_THREADS"

_BUCKET_NOTE = "index: 15-minute local-time bucket, 1..96 (1 = 00:00-00:15)"
_WEEKDAY_NOTE = "index: day of week, 1=Monday .. 7=Sunday"
_MONTH_NOTE = "index: calendar month, 1=January .. 12=December"

# which event stream each schedule kind pools
_SCHEDULE_SOURCE = {
    "afp": "posting",
    "afr": "reaction",
    "cfp": "posting",
    "cfr": "reaction",
    "wcfp": "posting",
    "wcfr": "reaction",
}


@dataclass(frozen=True, slots=True)
class Provenance:
    """What gets stamped into every output file's header."""

    command: str
    config_hash: str


# ---------------------------------------------------------------------------
# provenance and file writing


def _provenance(args: argparse.Namespace) -> Provenance:
    """Canonical command string + hash from the resolved settings.

    The output directory is deliberately excluded so that the same run
    written to two different directories produces identical file contents.
    """
    parts = [f"engagesched {args.command}"]
    for key in sorted(vars(args)):
        if key in ("command", "func", "out"):
            continue
        value = getattr(args, key)
        if value is None or value is False:
            continue
        flag = "--" + key.replace("_", "-")
        if value is True:
            parts.append(flag)
        elif isinstance(value, (list, tuple)):
            parts.extend(f"{flag}={item}" for item in value)
        else:
            parts.append(f"{flag}={value}")
    command = " ".join(parts)
    digest = hashlib.sha256(command.encode("utf-8")).hexdigest()[:12]
    return Provenance(command=command, config_hash=digest)


def _header(prov: Provenance, extra: Sequence[str] = ()) -> str:
    lines = [f"# command: {prov.command}", f"# config: {prov.config_hash}"]
    lines.extend(f"# {note}" for note in extra)
    return "\n".join(lines) + "\n"


def _write_text(
    path: Path, body: str, prov: Provenance, extra: Sequence[str] = ()
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_header(prov, extra) + body, encoding="utf-8")


def _write_json(path: Path, doc_text: str, prov: Provenance) -> None:
    # JSON cannot carry comment lines, so provenance rides as top-level keys;
    # readers that parse these documents ignore unknown keys.
    doc = json.loads(doc_text)
    doc["command"] = prov.command
    doc["config_hash"] = prov.config_hash
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _safe_name(name: str) -> str:
    cleaned = re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_.")
    return cleaned or "unnamed"


# ---------------------------------------------------------------------------
# shared loading / option plumbing


def _load_store(args: argparse.Namespace) -> tuple[EventStore, ValidationReport]:
    log_path = Path(args.log)
    pages_path = Path(args.pages)
    if not log_path.is_file():
        raise EngageError(f"event log not found: {log_path}")
    if not pages_path.is_file():
        raise EngageError(f"page metadata not found: {pages_path}")
    pages = load_page_metadata(pages_path.read_text(encoding="utf-8"))
    return parse_event_log(
        log_path.read_bytes(), pages, (args.year_start, args.year_end)
    )


def _warn_rejects(report: ValidationReport) -> None:
    if report.rejected_total:
        print(
            f"note: {report.rejected_total} of {report.total_lines} lines "
            "rejected during ingestion (run `engagesched validate` for details)",
            file=sys.stderr,
        )


def _check_top(top_n: int) -> None:
    if not 1 <= top_n <= BUCKETS_PER_DAY:
        raise EngageError(f"--top must be in [1, {BUCKETS_PER_DAY}], got {top_n}")


def _parse_k_range(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    match = re.fullmatch(r"(\d+):(\d+)", text)
    if match is None:
        raise EngageError(f"--k-range must look like LO:HI, got {text!r}")
    return int(match.group(1)), int(match.group(2))


def _thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise EngageError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}")
    return max(1, value)


def _build_model(store: EventStore, args: argparse.Namespace) -> CategoryModel:
    stopwords = None
    if args.stopwords is not None:
        stop_path = Path(args.stopwords)
        if not stop_path.is_file():
            raise EngageError(f"stopword file not found: {stop_path}")
        stopwords = load_stopwords(str(stop_path))
    return build_category_model(
        store,
        k=args.k,
        k_range=_parse_k_range(args.k_range),
        neighbor_k=args.neighbor_k,
        attribution=args.attribution if args.attribution != "both" else "own",
        max_features=args.max_features,
        restarts=args.restarts,
        seed=args.seed,
        stopwords=stopwords,
        relabel=not args.no_relabel,
    )


def _resolve_categories(
    store: EventStore, args: argparse.Namespace
) -> dict[str, tuple[str, ...]]:
    """Page groups to treat as categories, keyed by display name.

    ``labels`` groups pages by their metadata label; ``clustering`` runs the
    full categorization pipeline and names the discovered categories C1..Ck.
    """
    if args.category_source == "labels":
        groups: dict[str, list[str]] = {}
        for page_id in store.page_ids:
            label = store.pages[page_id].label or "unlabeled"
            groups.setdefault(label, []).append(page_id)
        if not groups:
            raise EngageError("no pages available to group into categories")
        return {label: tuple(members) for label, members in sorted(groups.items())}
    model = _build_model(store, args)
    return {f"C{cat}": model.members(cat) for cat in range(1, model.k + 1)}


def _category_gains(
    store: EventStore,
    categories: Mapping[str, Sequence[str]],
    attribution: str,
) -> list[ReactionGainReport]:
    """Per-category gain reports, in the mapping's order.

    Categories are independent, so the reports may be computed on a small
    thread pool; ``ENGAGE_SCHED_THREADS`` caps the worker count (default 1,
    i.e. serial). Order and values are identical either way.
    """
    items = list(categories.items())
    cap = min(_thread_cap(), len(items))
    if cap > 1:
        with ThreadPoolExecutor(max_workers=cap) as pool:
            return list(
                pool.map(
                    lambda item: reaction_gain(
                        store, item[1], scope=item[0], attribution=attribution
                    ),
                    items,
                )
            )
    return [
        reaction_gain(store, pages, scope=label, attribution=attribution)
        for label, pages in items
    ]


def _delay_tsv(hist: DelayHistogram) -> str:
    lines = ["window_start_h\twindow_end_h\tcount\tmass\tcdf"]
    for i in range(len(hist.counts)):
        lines.append(
            f"{hist.edges_hours[i]:.6f}\t{hist.edges_hours[i + 1]:.6f}"
            f"\t{int(hist.counts[i])}\t{hist.mass[i]:.6f}\t{hist.cdf[i]:.6f}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_validate(args: argparse.Namespace, prov: Provenance) -> int:
    _store, report = _load_store(args)
    print(report.summary(), file=sys.stderr)
    return 0


def _cmd_profile(args: argparse.Namespace, prov: Provenance) -> int:
    store, report = _load_store(args)
    _warn_rejects(report)
    out = Path(args.out)
    page_ids = list(args.page) if args.page else list(store.page_ids)
    for page_id in page_ids:
        posting = cumulative_profile(store, page_id, kind="posting")
        reacting = cumulative_profile(
            store, page_id, kind="reaction", attribution=args.attribution
        )
        tag = _safe_name(page_id)
        _write_text(
            out / f"profile_{tag}_posting.tsv",
            counts_tsv(posting.counts),
            prov,
            extra=(_BUCKET_NOTE,),
        )
        _write_text(
            out / f"profile_{tag}_reaction.tsv",
            counts_tsv(reacting.counts),
            prov,
            extra=(_BUCKET_NOTE,),
        )
    try:
        hist = delay_distribution(store)
    except EngageError as exc:
        print(f"note: delay histogram skipped ({exc})", file=sys.stderr)
    else:
        _write_text(
            out / "delays.tsv",
            _delay_tsv(hist),
            prov,
            extra=(f"reactions beyond horizon: {hist.beyond_horizon}",),
        )
    return 0


def _cmd_schedule(args: argparse.Namespace, prov: Provenance) -> int:
    _check_top(args.top)
    store, report = _load_store(args)
    _warn_rejects(report)
    out = Path(args.out)
    source = _SCHEDULE_SOURCE[args.kind]
    if args.kind in ("afp", "afr"):
        sched = aggregated_schedule(store, kind=source, attribution=args.attribution)
        if args.normalize:
            sched = normalized(sched)
        _write_text(
            out / f"schedule_{args.kind}.tsv", schedule_tsv(sched, args.top), prov
        )
        return 0
    for label, pages in _resolve_categories(store, args).items():
        if args.kind in ("cfp", "cfr"):
            sched = categorized_schedule(
                store, pages, kind=source, scope=label, attribution=args.attribution
            )
        else:
            sched = weighted_categorized_schedule(
                store, pages, kind=source, scope=label, attribution=args.attribution
            )
        if args.normalize:
            sched = normalized(sched)
        _write_text(
            out / f"schedule_{args.kind}_{_safe_name(label)}.tsv",
            schedule_tsv(sched, args.top),
            prov,
        )
    return 0


def _cmd_categorize(args: argparse.Namespace, prov: Provenance) -> int:
    store, report = _load_store(args)
    _warn_rejects(report)
    out = Path(args.out)
    model = _build_model(store, args)
    _write_json(out / "model.json", model_to_json(model), prov)
    lines = ["category\tlabel\tn_pages\tpages"]
    for cat in range(1, model.k + 1):
        members = model.members(cat)
        lines.append(
            f"C{cat}\t{model.category_labels[cat]}\t{len(members)}"
            f"\t{','.join(members)}"
        )
    _write_text(out / "categories.tsv", "\n".join(lines) + "\n", prov)
    return 0


def _cmd_evaluate(args: argparse.Namespace, prov: Provenance) -> int:
    _check_top(args.top)
    store, report = _load_store(args)
    _warn_rejects(report)
    out = Path(args.out)
    categories = _resolve_categories(store, args)
    modes = ("own", "parent") if args.attribution == "both" else (args.attribution,)
    primary = modes[0]  # drives correlations and schedule tables
    primary_all: ReactionGainReport | None = None
    primary_cats: list[ReactionGainReport] = []

    for mode in modes:
        suffix = f"_{mode}" if len(modes) > 1 else ""
        overall = reaction_gain(store, scope="all", attribution=mode)
        _write_text(out / f"gain_all{suffix}.tsv", gain_tsv(overall), prov)
        cat_reports = _category_gains(store, categories, mode)
        for label, cat_report in zip(categories, cat_reports):
            _write_text(
                out / f"gain_{_safe_name(label)}{suffix}.tsv",
                gain_tsv(cat_report),
                prov,
            )
        _write_text(
            out / f"gain_avg{suffix}.tsv",
            avg_gain_tsv(avg_reaction_gain(cat_reports)),
            prov,
        )
        if mode == primary:
            primary_all, primary_cats = overall, cat_reports

    assert primary_all is not None
    corr = category_correlations(store, categories, attribution=primary)
    _write_text(out / "correlations.tsv", correlation_tsv(corr), prov)
    _write_text(out / "content_types.tsv", content_type_tsv(content_type_report(store)), prov)

    all_schedules = [
        aggregated_schedule(store, kind="posting"),
        aggregated_schedule(store, kind="reaction", attribution=primary),
    ]
    _write_text(
        out / "schedule_gains_all.tsv",
        schedule_gain_table(primary_all, all_schedules, args.top),
        prov,
    )
    summary_parts = [format_gain_text(primary_all, args.top).rstrip("\n")]
    for (label, pages), cat_report in zip(categories.items(), primary_cats):
        cat_schedules = [
            categorized_schedule(
                store, pages, kind="posting", scope=label, attribution=primary
            ),
            categorized_schedule(
                store, pages, kind="reaction", scope=label, attribution=primary
            ),
            weighted_categorized_schedule(
                store, pages, kind="posting", scope=label, attribution=primary
            ),
            weighted_categorized_schedule(
                store, pages, kind="reaction", scope=label, attribution=primary
            ),
        ]
        _write_text(
            out / f"schedule_gains_{_safe_name(label)}.tsv",
            schedule_gain_table(cat_report, cat_schedules, args.top),
            prov,
        )
        summary_parts.append(format_gain_text(cat_report, args.top).rstrip("\n"))
    _write_text(out / "summary.txt", "\n\n".join(summary_parts) + "\n", prov)
    return 0


def _cmd_trend(args: argparse.Namespace, prov: Provenance) -> int:
    store, report = _load_store(args)
    _warn_rejects(report)
    page_ids = list(args.page) if args.page else list(store.page_ids)
    if not page_ids:
        raise EngageError("no pages available for the trend")
    if args.granularity == "daily":
        total = np.zeros(BUCKETS_PER_DAY, dtype=np.int64)
        for page_id in page_ids:
            profile = cumulative_profile(
                store, page_id, kind=args.kind, attribution=args.attribution
            )
            total += profile.counts
        body, note = counts_tsv(total), _BUCKET_NOTE
    elif args.granularity == "weekly":
        profile = periodic_profile(
            store, page_ids, "day_of_week", kind=args.kind, attribution=args.attribution
        )
        body, note = counts_tsv(profile.counts), _WEEKDAY_NOTE
    else:  # monthly
        profile = periodic_profile(
            store, page_ids, "month", kind=args.kind, attribution=args.attribution
        )
        body, note = counts_tsv(profile.counts), _MONTH_NOTE
    _write_text(
        Path(args.out) / f"trend_{args.granularity}_{args.kind}.tsv",
        body,
        prov,
        extra=(note,),
    )
    return 0


def _cmd_synth(args: argparse.Namespace, prov: Provenance) -> int:
    config_path = Path(args.config)
    if not config_path.is_file():
        raise EngageError(f"generator config not found: {config_path}")
    config = load_config(config_path.read_text(encoding="utf-8"))
    result = generate(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    # The log and metadata files must stay byte-exact valid inputs for the
    # ingestion commands, so they carry no header comments; provenance for
    # the whole bundle lives in the manifest.
    (out / "events.jsonl").write_bytes(result.log_bytes)
    (out / "pages.csv").write_text(result.pages_csv, encoding="utf-8")
    _write_json(out / "manifest.json", result.manifest_json(), prov)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="engagesched",
        description=(
            "Derive, categorize, and evaluate posting schedules from a "
            "timestamped post/reaction event log."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--log", required=True, help="event log in JSON-lines format")
    data.add_argument("--pages", required=True, help="page metadata CSV")
    data.add_argument(
        "--year-start", type=int, required=True, help="first calendar year to keep"
    )
    data.add_argument(
        "--year-end", type=int, required=True, help="last calendar year to keep"
    )

    outdir = argparse.ArgumentParser(add_help=False)
    outdir.add_argument(
        "--out", default=".", help="output directory (default: current directory)"
    )

    attribution = argparse.ArgumentParser(add_help=False)
    attribution.add_argument(
        "--attribution",
        choices=("own", "parent"),
        default="own",
        help=(
            "timestamp used for reaction events: the reaction's own time or "
            "its parent post's time (default: own)"
        ),
    )

    # --category-source lives in its own parent: `categorize` always runs the
    # clustering pipeline and must not expose (or perturb) the switch.
    source = argparse.ArgumentParser(add_help=False)
    source.add_argument(
        "--category-source",
        choices=("labels", "clustering"),
        default="labels",
        help=(
            "group pages by metadata label, or discover categories with the "
            "clustering pipeline (default: labels)"
        ),
    )
    cats = argparse.ArgumentParser(add_help=False)
    cats.add_argument("--k", type=int, help="fixed category count for clustering")
    cats.add_argument(
        "--k-range",
        metavar="LO:HI",
        help="candidate range for automatic category-count selection",
    )
    cats.add_argument(
        "--neighbor-k",
        type=int,
        default=5,
        help="neighbor count for text-based label correction (default: 5)",
    )
    cats.add_argument(
        "--restarts",
        type=int,
        default=0,
        help="extra random clustering restarts (default: 0, deterministic build)",
    )
    cats.add_argument("--seed", type=int, help="seed for clustering restarts")
    cats.add_argument(
        "--no-relabel",
        action="store_true",
        help="skip text-based label correction before feature extraction",
    )
    cats.add_argument("--stopwords", help="newline-delimited stopword file")
    cats.add_argument(
        "--max-features",
        type=int,
        help="cap on the number of selected features (default: no cap)",
    )

    p = sub.add_parser(
        "validate",
        parents=[data],
        help="ingest a log and print per-line accounting to stderr",
    )
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser(
        "profile",
        parents=[data, outdir, attribution],
        help="per-page daily posting/reaction profiles and the delay histogram",
    )
    p.add_argument(
        "--page",
        action="append",
        metavar="PAGE_ID",
        help="restrict to this page (repeatable; default: every page)",
    )
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser(
        "schedule",
        parents=[data, outdir, attribution, source, cats],
        help="ranked posting schedules (aggregated, per-category, or weighted)",
    )
    p.add_argument(
        "--kind",
        required=True,
        choices=SCHEDULE_KINDS,
        help=(
            "afp/afr: all pages pooled by posts/reactions; cfp/cfr: one "
            "schedule per category; wcfp/wcfr: per category with pages "
            "weighted by their event share"
        ),
    )
    p.add_argument(
        "--top",
        type=int,
        default=BUCKETS_PER_DAY,
        help=f"number of ranked buckets to write (default: {BUCKETS_PER_DAY})",
    )
    p.add_argument(
        "--normalize",
        action="store_true",
        help="rescale scores to sum to 1 before writing",
    )
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser(
        "categorize",
        parents=[data, outdir, attribution, cats],
        help="run the categorization pipeline and save the fitted model",
    )
    p.set_defaults(func=_cmd_categorize)

    p = sub.add_parser(
        "evaluate",
        parents=[data, outdir, source, cats],
        help="reaction-gain reports, correlations, and schedule quality tables",
    )
    p.add_argument(
        "--attribution",
        choices=("own", "parent", "both"),
        default="own",
        help=(
            "reaction timestamp mode; 'both' writes own- and parent-attributed "
            "gain files side by side (default: own)"
        ),
    )
    p.add_argument(
        "--top",
        type=int,
        default=10,
        help="ranked buckets per schedule in the gain tables (default: 10)",
    )
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser(
        "trend",
        parents=[data, outdir, attribution],
        help="activity trends: daily buckets, day-of-week, or calendar month",
    )
    p.add_argument(
        "--granularity",
        required=True,
        choices=("daily", "weekly", "monthly"),
        help=(
            "daily: counts per 15-minute bucket; weekly: per day of week; "
            "monthly: per calendar month"
        ),
    )
    p.add_argument(
        "--kind",
        choices=("posting", "reaction"),
        default="posting",
        help="which event stream to count (default: posting)",
    )
    p.add_argument(
        "--page",
        action="append",
        metavar="PAGE_ID",
        help="restrict to this page (repeatable; default: every page)",
    )
    p.set_defaults(func=_cmd_trend)

    p = sub.add_parser(
        "synth",
        parents=[outdir],
        help="generate a synthetic event log with a ground-truth manifest",
    )
    p.add_argument("--config", required=True, help="generator config file")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if isinstance(code, int):
            return code
        return 0 if code is None else 2
    prov = _provenance(args)
    try:
        return args.func(args, prov)
    except EngageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
