"""Metadata completeness, quality flags and tag timelines.

Inclusion and quality work on the parsed corpus (feeds and entries as they
came out of the XML), because the converted records no longer carry fields
such as ``content`` or raw date text.
"""

import csv
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from decimal import ROUND_HALF_UP, Decimal

from .converter import ParsedFeed, container_id, item_id
from .parser import EntryRecord, FeedRecord
from .text import strip_markup

PLACEHOLDER_TITLES = frozenset({"not available", "no title", "untitled"})
_MARKUP = re.compile(r"<[A-Za-z]")

FEED_FIELDS = {
    "title": lambda f: f.title,
    "subtitle": lambda f: f.subtitle,
    "blog url": lambda f: f.blog_url,
    "rss url": lambda f: f.rss_url,
    "last updated": lambda f: f.last_updated,
    "language": lambda f: f.language,
}

ENTRY_FIELDS = {
    "title": lambda e: e.title,
    "id": lambda e: e.entry_id,
    "link": lambda e: e.link,
    "publication date": lambda e: e.publication_date,
    "authors": lambda e: e.authors,
    "summary": lambda e: e.summary,
    "content": lambda e: e.content,
    "tags": lambda e: e.tags,
    "comments": lambda e: e.comments_url,
}

# date fields whose raw text may be present while the parsed value is not
_RAW_DATES = {
    "feed": {"last updated": lambda f: f.last_updated_raw},
    "entry": {"publication date": lambda e: e.publication_date_raw},
}


def _included(value):
    if value is None:
        return False
    if isinstance(value, str):
        return bool(value.strip())
    if isinstance(value, (list, tuple)):
        return any(_included(v) for v in value)
    return True


def percent(part, whole):
    """``part / whole`` as a percentage, rounded half-up to one decimal."""
    if not whole:
        return None
    value = Decimal(part) * 100 / Decimal(whole)
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass
class InclusionReport:
    level: str
    denominator: int
    rates: dict
    counts: dict
    unparseable: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "level": self.level,
            "denominator": self.denominator,
            "fields": dict(self.rates),
            "counts": dict(self.counts),
            "present_but_unparseable": dict(self.unparseable),
        }


def _split_levels(corpus):
    feeds, entries = [], []
    for item in corpus:
        if isinstance(item, ParsedFeed) or (isinstance(item, tuple) and len(item) == 2):
            feeds.append(item[0])
            entries.extend(item[1])
        elif isinstance(item, FeedRecord):
            feeds.append(item)
        elif isinstance(item, EntryRecord):
            entries.append(item)
        else:
            raise TypeError(f"unsupported record type {type(item).__name__}")
    return feeds, entries


def inclusion_rates(records_or_parsed, level):
    """Share of records carrying each field, per ``level`` (feed/entry).

    A field counts when present and non-empty after trimming. Dates count
    only when they parsed; present-but-unparseable dates are tallied
    separately.
    """
    if level not in ("feed", "entry"):
        raise ValueError(f"level must be 'feed' or 'entry', not {level!r}")
    feeds, entries = _split_levels(records_or_parsed)
    records = feeds if level == "feed" else entries
    getters = FEED_FIELDS if level == "feed" else ENTRY_FIELDS
    n = len(records)
    counts = {name: sum(_included(get(r)) for r in records) for name, get in getters.items()}
    rates = {name: percent(c, n) for name, c in counts.items()}
    unparseable = {}
    for name, raw in _RAW_DATES[level].items():
        get = getters[name]
        unparseable[name] = sum(
            1 for r in records if _included(raw(r)) and not _included(get(r))
        )
    return InclusionReport(level, n, rates, counts, unparseable)


@dataclass(frozen=True)
class QualityThresholds:
    max_subtitle_chars: int = 300
    max_title_chars: int = 200


@dataclass(frozen=True)
class QualityFlag:
    record_id: str
    flag: str
    detail: str

    def to_dict(self):
        return {"record_id": self.record_id, "flag": self.flag, "detail": self.detail}


def _title_flags(record_id, title, limits):
    flags = []
    if title is None:
        return flags
    stripped = title.strip()
    if len(stripped) > limits.max_title_chars:
        flags.append(QualityFlag(record_id, "overlong_title",
                                 f"{len(stripped)} chars > {limits.max_title_chars}"))
    if stripped.lower() in PLACEHOLDER_TITLES:
        flags.append(QualityFlag(record_id, "placeholder_title", stripped))
    return flags


def _date_flag(record_id, raw, parsed):
    if _included(raw) and parsed is None:
        return [QualityFlag(record_id, "unparseable_date", raw.strip())]
    return []


def quality_flags(parsed, thresholds=QualityThresholds()):
    """Flag anomalous feeds and entries of a parsed corpus.

    Flags use the ids the converter assigns, so they join against
    ``records.json``.
    """
    flags = []
    for feed, entries in parsed:
        cid = container_id(feed.rss_url)
        flags += _title_flags(cid, feed.title, thresholds)
        subtitle = (feed.subtitle or "").strip()
        if len(subtitle) > thresholds.max_subtitle_chars:
            flags.append(QualityFlag(cid, "overlong_subtitle",
                                     f"{len(subtitle)} chars > {thresholds.max_subtitle_chars}"))
        flags += _date_flag(cid, feed.last_updated_raw, feed.last_updated)
        for entry in entries:
            iid = item_id(entry, cid)
            flags += _title_flags(iid, entry.title, thresholds)
            if entry.content and _MARKUP.search(entry.content):
                flags.append(QualityFlag(iid, "markup_in_content", "content contains HTML tags"))
            flags += _date_flag(iid, entry.publication_date_raw, entry.publication_date)
    return flags


def bucket_start(day):
    """First day of the two-month bucket holding *day* (Jan, Mar, ... Nov)."""
    return date(day.year, day.month - (day.month - 1) % 2, 1)


def _next_bucket(start):
    month = start.month + 2
    return date(start.year + (month > 12), (month - 1) % 12 + 1, 1)


@dataclass(frozen=True)
class TimeBucketReport:
    key: str
    bucket_start: date
    count: int


@dataclass
class Timeline:
    rows: list
    undated: int = 0

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def _view(entry):
    """``(date, tags, searchable text)`` for entry or item records."""
    tags = getattr(entry, "tags", None)
    if tags is None:
        tags = getattr(entry, "keywords", [])
    abstract = getattr(entry, "abstract", None)
    if abstract is None and hasattr(entry, "summary"):
        abstract = strip_markup(entry.summary or "")
    text = f"{entry.title or ''} {abstract or ''}".lower()
    return entry.publication_date, list(tags), text


def tags_over_time(entries, keys=None):
    """Count entries per key and two-month bucket.

    Without *keys*, every tag is a key. With *keys*, an entry matches a key
    when one of its tags equals it (ignoring case) or its title or abstract
    contains it. Zero-count buckets are filled in across the corpus date
    span. Container records are ignored; undated entries are counted in
    ``Timeline.undated``.
    """
    views = []
    undated = 0
    for e in entries:
        if getattr(e, "kind", "item") != "item":
            continue
        when, tags, text = _view(e)
        if when is None:
            undated += 1
            continue
        views.append((bucket_start(when), tags, text))
    if not views:
        return Timeline([], undated)

    counts = Counter()
    if keys is None:
        for bucket, tags, _ in views:
            for tag in dict.fromkeys(tags):
                counts[tag, bucket] += 1
        selected = sorted({k for k, _ in counts})
    else:
        selected = list(dict.fromkeys(keys))
        for bucket, tags, text in views:
            lowered = {t.lower() for t in tags}
            for key in selected:
                k = key.lower()
                if k in lowered or k in text:
                    counts[key, bucket] += 1

    first = min(b for b, _, _ in views)
    last = max(b for b, _, _ in views)
    buckets = [first]
    while buckets[-1] < last:
        buckets.append(_next_bucket(buckets[-1]))
    rows = [TimeBucketReport(k, b, counts[k, b]) for k in selected for b in buckets]
    return Timeline(rows, undated)


def write_timeline_csv(timeline, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["key", "bucket_start", "count"])
        for row in timeline:
            writer.writerow([row.key, row.bucket_start.isoformat(), row.count])
