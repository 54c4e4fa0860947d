"""Conversion of parsed snapshots into bibliographic container/item records.

A feed becomes a ``container`` record (journal-like) and each of its
entries an ``item`` record (article-like) pointing back at it. Comment
feeds and comment entries are split off before conversion.

Record ids are the first 16 hex digits of SHA-256 over a seed string
(scheme ``RECORD_ID_SCHEME``):

* container: ``container:`` + normalized rss_url
* item: ``item:`` + parent id + ``:`` + (entry id, else link, else title)
"""

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime
from typing import NamedTuple
from urllib.parse import urlsplit

from .errors import FeedParseError, InputError, UnsupportedFormatError
from .fetcher import METADATA_FILE
from .languages import get_languages
from .parser import EntryRecord, FeedRecord, parse_feed_document
from .text import format_datetime, parse_datetime, strip_markup
from .urls import normalize_url

logger = logging.getLogger(__name__)

RECORD_ID_SCHEME = "sha256-16/v1"
SOURCE = "blog"
TITLE_FROM_ABSTRACT_CHARS = 80


class ParsedFeed(NamedTuple):
    feed: FeedRecord
    entries: list


@dataclass
class SplitSide:
    """Feeds and entries on one side of the blog/comment split.

    Entries keep their ``parent_rss_url``; a comment entry pulled out of a
    blog feed points at a feed listed on the blog side.
    """

    feeds: list = field(default_factory=list)
    entries: list = field(default_factory=list)


@dataclass
class NormalizedRecord:
    record_id: str
    kind: str
    title: str
    abstract: str | None = None
    authors: list = field(default_factory=list)
    languages: list = field(default_factory=list)
    urls: list = field(default_factory=list)
    publication_date: datetime | None = None
    keywords: list = field(default_factory=list)
    parent_record_id: str | None = None
    source: str = SOURCE

    def to_dict(self):
        return {
            "record_id": self.record_id,
            "kind": self.kind,
            "title": self.title,
            "abstract": self.abstract,
            "authors": list(self.authors),
            "languages": list(self.languages),
            "urls": list(self.urls),
            "publication_date": format_datetime(self.publication_date),
            "keywords": list(self.keywords),
            "parent_record_id": self.parent_record_id,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["publication_date"] = parse_datetime(d.get("publication_date"))
        return cls(**d)


def _hash_id(seed):
    return hashlib.sha256(seed.encode("utf-8")).hexdigest()[:16]


def container_id(rss_url):
    return _hash_id("container:" + normalize_url(rss_url))


def item_id(entry, parent_id):
    key = _clean(entry.entry_id) or _clean(entry.link) or _clean(entry.title) or ""
    return _hash_id(f"item:{parent_id}:{key}")


def _clean(value):
    if value is None:
        return None
    value = value.strip()
    return value or None


def parse_rss_dump(snapshot_dir, skipped=None):
    """Parse every snapshot listed in ``metadata.json``.

    Feeds get ``fetched_at`` from the download metadata. Unreadable or
    malformed snapshots are logged and skipped; when *skipped* is a list,
    ``(filename, reason)`` pairs are appended to it.
    """
    meta_path = os.path.join(snapshot_dir, METADATA_FILE)
    try:
        with open(meta_path, encoding="utf-8") as fh:
            metadata = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read {meta_path}: {exc}") from exc
    if not isinstance(metadata, list):
        raise InputError(f"{meta_path} must hold a JSON array")

    parsed = []
    for meta in metadata:
        filename = meta.get("filename", "")
        try:
            with open(os.path.join(snapshot_dir, filename), "rb") as fh:
                data = fh.read()
            feed, entries = parse_feed_document(data, meta["url"])
        except (OSError, KeyError, FeedParseError, UnsupportedFormatError) as exc:
            logger.warning("skipping snapshot %s: %s", filename, exc)
            if skipped is not None:
                skipped.append((filename, str(exc)))
            continue
        feed.fetched_at = meta.get("timestamp")
        if feed.replaced_bytes:
            logger.info("%s: %d undecodable bytes replaced", filename, feed.replaced_bytes)
        parsed.append(ParsedFeed(feed, entries))
    return parsed


def _segments(url):
    return [s for s in urlsplit(url or "").path.lower().split("/") if s]


def is_comment_feed(rss_url):
    path = urlsplit(rss_url).path.lower().rstrip("/")
    return (
        "comments" in _segments(rss_url)
        or path.endswith("/comments/feed")
        or path.endswith("/feed/comments")
    )


def is_comment_entry(entry):
    link = (entry.link or "").lower()
    return "#comment" in link or "comments" in _segments(link)


def split_comments(parsed):
    """Partition feeds and entries into ``(blog_side, comment_side)``.

    A feed whose URL marks it as a comment feed goes to the comment side
    with all its entries. Inside blog feeds, entries whose link points at a
    comment are moved to the comment side individually.
    """
    blog, comments = SplitSide(), SplitSide()
    for feed, entries in parsed:
        if is_comment_feed(feed.rss_url):
            comments.feeds.append(feed)
            comments.entries.extend(entries)
            continue
        blog.feeds.append(feed)
        for entry in entries:
            (comments if is_comment_entry(entry) else blog).entries.append(entry)
    return blog, comments


def convert_feed(feed):
    blog_url = _clean(feed.blog_url)
    title = strip_markup(feed.title or "")
    if not title:
        title = urlsplit(blog_url or feed.rss_url).hostname or feed.rss_url
    urls = [u for u in (blog_url, feed.rss_url) if u]
    return NormalizedRecord(
        record_id=container_id(feed.rss_url),
        kind="container",
        title=title,
        abstract=strip_markup(feed.subtitle or "") or None,
        languages=get_languages(feed.language),
        urls=list(dict.fromkeys(urls)),
        publication_date=feed.last_updated,
    )


def convert_entry(entry, parent):
    """Item record for *entry* under the container record *parent*.

    The abstract is always the markup-stripped summary; the content element
    is ignored even when the summary is missing.
    """
    if parent.kind != "container":
        raise ValueError("parent must be a container record")
    abstract = strip_markup(entry.summary or "") or None
    title = strip_markup(entry.title or "")
    if not title:
        title = (abstract or "")[:TITLE_FROM_ABSTRACT_CHARS].strip()
    if not title:
        title = _clean(entry.link) or _clean(entry.entry_id) or ""
    link = _clean(entry.link)
    return NormalizedRecord(
        record_id=item_id(entry, parent.record_id),
        kind="item",
        title=title,
        abstract=abstract,
        authors=list(entry.authors),
        languages=get_languages(entry.language) or list(parent.languages),
        urls=[link] if link else [],
        publication_date=entry.publication_date,
        keywords=list(entry.tags),
        parent_record_id=parent.record_id,
    )


def convert_side(side, containers):
    """Convert one split side.

    *containers* maps rss_url to container records and is extended with the
    side's own feeds; entries whose feed is unknown are dropped with a
    warning.
    """
    out = []
    for feed in side.feeds:
        record = convert_feed(feed)
        containers[feed.rss_url] = record
        out.append(record)
    for entry in side.entries:
        parent = containers.get(entry.parent_rss_url)
        if parent is None:
            logger.warning("entry of unknown feed %s dropped", entry.parent_rss_url)
            continue
        out.append(convert_entry(entry, parent))
    return sorted(out, key=lambda r: (r.record_id, r.kind))


@dataclass
class ConvertResult:
    records: list
    comments: list
    parsed: list
    skipped: list


def run_convert(snapshot_dir):
    """Parse, split and convert a snapshot directory."""
    skipped = []
    parsed = parse_rss_dump(snapshot_dir, skipped)
    blog, comment = split_comments(parsed)
    containers = {}
    records = convert_side(blog, containers)
    comments = convert_side(comment, containers)
    return ConvertResult(records, comments, parsed, skipped)


def dump_records(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([r.to_dict() for r in records], fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def dump_parsed(parsed, path):
    """Write the parsed corpus (feed + entry fields, raw dates included)."""
    data = [
        {"feed": feed.to_dict(), "entries": [e.to_dict() for e in entries]}
        for feed, entries in parsed
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def load_parsed(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return [
        ParsedFeed(FeedRecord.from_dict(d["feed"]), [EntryRecord.from_dict(e) for e in d["entries"]])
        for d in data
    ]
