"""Feed autodiscovery for a list of blog homepages.

Reads candidate URLs from CSV, collapses duplicates, fetches each page and
looks for advertised feeds, first via ``<link rel="alternate">`` elements
and then via looser "rss"/"feed" link heuristics.
"""

import csv
import enum
import html
import io
import json
import logging
import re
from dataclasses import dataclass, field
from urllib.parse import urljoin, urlsplit

import requests

from .errors import InputError
from .net import map_polite
from .text import strip_markup
from .urls import is_absolute_http, normalize_url, parse_source_url

logger = logging.getLogger(__name__)

FEED_TYPES = ("application/rss+xml", "application/atom+xml")

_LINK_TAG = re.compile(r"<link\b([^>]*)>", re.IGNORECASE)
_BASE_TAG = re.compile(r"<base\b([^>]*)>", re.IGNORECASE)
_ANCHOR = re.compile(r"<a\b([^>]*)>(.*?)</a\s*>", re.IGNORECASE | re.DOTALL)
_ATTR = re.compile(
    r"""([^\s=/>"']+)\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s"'=<>`]+))""",
)
_HEADER_CELL = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]{0,31}$")


class Liveness(enum.Enum):
    UNKNOWN = "unknown"
    ALIVE = "alive"
    DEAD = "dead"


class Method(str, enum.Enum):
    STRICT = "strict"
    FALLBACK = "fallback"
    MANUAL = "manual"


@dataclass
class SourceUrl:
    raw: str
    normalized: str
    alive: Liveness = Liveness.UNKNOWN

    @classmethod
    def from_text(cls, text):
        url = parse_source_url(text)
        if url is None:
            raise ValueError(f"not an http(s) URL: {text!r}")
        return cls(raw=text.strip(), normalized=normalize_url(url))

    @property
    def request_url(self):
        return parse_source_url(self.raw)


@dataclass
class DiscoveryRecord:
    url: str
    status: int | None = None
    content_type: str | None = None
    rss_links: list = field(default_factory=list)
    rss_link_methods: list = field(default_factory=list)

    def add(self, link, method):
        if link not in self.rss_links:
            self.rss_links.append(link)
            self.rss_link_methods.append(Method(method).value)

    def to_dict(self):
        return {
            "url": self.url,
            "status": self.status,
            "content_type": self.content_type,
            "rss_links": list(self.rss_links),
            "rss_link_methods": list(self.rss_link_methods),
        }


def _read_text(source):
    if hasattr(source, "read"):
        try:
            return source.read()
        except (OSError, UnicodeDecodeError) as exc:
            raise InputError(f"cannot read URL list: {exc}") from exc
    try:
        with open(source, encoding="utf-8-sig", newline="") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read URL list {source}: {exc}") from exc


def _looks_like_header(cell):
    # a single word like "url" or "source_url"; multi-word cells are data
    return bool(_HEADER_CELL.match(cell))


def load_url_list(csv_source):
    """Read candidate URLs from the first CSV column.

    Returns ``(urls, rejected)`` where *rejected* holds ``(row_number,
    cell)`` pairs (1-based physical rows) for cells that are not URLs.
    A first row consisting of a single header word such as ``url`` is
    skipped.
    """
    text = _read_text(csv_source)
    urls, rejected = [], []
    for rownum, row in enumerate(csv.reader(io.StringIO(text)), 1):
        cell = row[0].strip() if row else ""
        if not cell:
            continue
        try:
            urls.append(SourceUrl.from_text(cell))
        except ValueError:
            if rownum == 1 and _looks_like_header(cell):
                continue
            rejected.append((rownum, cell))
    return urls, rejected


def normalize_and_dedupe(urls):
    """Keep the first SourceUrl of every normalized form, order preserved."""
    seen = set()
    out = []
    for u in urls:
        key = normalize_url(u.normalized)
        if key in seen:
            continue
        seen.add(key)
        out.append(u)
    return out


def _attrs(tag_body):
    out = {}
    for m in _ATTR.finditer(tag_body):
        name = m.group(1).lower()
        value = next(g for g in m.groups()[1:] if g is not None)
        out.setdefault(name, html.unescape(value).strip())
    return out


def _base_for(page, base_url):
    m = _BASE_TAG.search(page)
    if m:
        href = _attrs(m.group(1)).get("href")
        if href:
            return urljoin(base_url, href)
    return base_url


def _resolve(base, href):
    if not href:
        return None
    url = urljoin(base, href)
    url = url.split("#", 1)[0]
    return url if is_absolute_http(url) else None


def discover_feeds_strict(page, base_url):
    """Feed URLs advertised by ``<link rel="alternate">`` elements.

    Accepts RSS and Atom types; attribute order, quoting and case do not
    matter. Relative hrefs are resolved against the page (or its
    ``<base href>``).
    """
    base = _base_for(page, base_url)
    found = []
    for m in _LINK_TAG.finditer(page):
        attrs = _attrs(m.group(1))
        rels = attrs.get("rel", "").lower().split()
        if "alternate" not in rels:
            continue
        ctype = attrs.get("type", "").lower().split(";")[0].strip()
        if ctype not in FEED_TYPES:
            continue
        url = _resolve(base, attrs.get("href"))
        if url and url not in found:
            found.append(url)
    return found


def _fallback_match(href, label, resolved):
    if "rss" in href.lower() or "rss" in label.lower():
        return True
    path = urlsplit(resolved).path.lower()
    return path.endswith("/feed") or path.endswith("/feed/")


def discover_feeds_fallback(page, base_url):
    """Looser heuristic: links mentioning "rss" or pointing at ``/feed``."""
    base = _base_for(page, base_url)
    candidates = []
    for m in _ANCHOR.finditer(page):
        candidates.append((_attrs(m.group(1)).get("href", ""), strip_markup(m.group(2))))
    for m in _LINK_TAG.finditer(page):
        attrs = _attrs(m.group(1))
        candidates.append((attrs.get("href", ""), attrs.get("title", "")))
    found = []
    for href, label in candidates:
        url = _resolve(base, href)
        if url and _fallback_match(href, label, url) and url not in found:
            found.append(url)
    return found


def _get_page(url, session, timeout):
    try:
        return session.get(url, timeout=timeout, allow_redirects=True)
    except requests.RequestException as exc:
        logger.info("probe failed for %s: %s", url, exc)
        return None


def probe_url(url, client, timeout=30.0):
    """GET *url* following redirects; ``(alive, status)``.

    Alive means a final status in 200-399. Transport failures give
    ``(False, None)``; this never raises.
    """
    if isinstance(url, SourceUrl):
        url = url.request_url
    resp = _get_page(url, client, timeout)
    if resp is None:
        return False, None
    return 200 <= resp.status_code < 400, resp.status_code


def load_manual_additions(csv_source):
    """Read ``(source_url, feed_url)`` pairs; a header row is skipped."""
    text = _read_text(csv_source)
    pairs = []
    for rownum, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if len(row) < 2 or not row[0].strip():
            continue
        src, feed = parse_source_url(row[0]), parse_source_url(row[1])
        if src is None or feed is None:
            if rownum != 1:
                logger.warning("manual additions row %d ignored: %r", rownum, row)
            continue
        pairs.append((src, feed))
    return pairs


def _discover_one(source, session, timeout, manual):
    record = DiscoveryRecord(url=source.raw)
    resp = _get_page(source.request_url, session, timeout)
    if resp is None:
        source.alive = Liveness.DEAD
        return record
    record.status = resp.status_code
    record.content_type = resp.headers.get("Content-Type")
    if not 200 <= resp.status_code < 400:
        source.alive = Liveness.DEAD
        return record
    source.alive = Liveness.ALIVE
    page = resp.text or ""
    base = resp.url or source.request_url
    links = discover_feeds_strict(page, base)
    method = Method.STRICT
    if not links:
        links = discover_feeds_fallback(page, base)
        method = Method.FALLBACK
    for link in links:
        record.add(link, method)
    for link in manual:
        record.add(link, Method.MANUAL)
    return record


def run_discovery(csv_source, client, manual_additions=(), *, timeout=30.0,
                  max_concurrency=1, rejected=None):
    """Probe every distinct URL in *csv_source* and collect its feeds.

    One DiscoveryRecord per deduplicated URL, in input order. Dead URLs get
    an empty link list. Rows that are not URLs are appended to *rejected*
    when a list is given.
    """
    urls, bad = load_url_list(csv_source)
    if rejected is not None:
        rejected.extend(bad)
    for rownum, cell in bad:
        logger.warning("row %d is not a URL: %r", rownum, cell)
    sources = normalize_and_dedupe(urls)

    manual = {}
    for src, feed in manual_additions:
        manual.setdefault(normalize_url(src), []).append(feed)
    known = {s.normalized for s in sources}
    for key in manual.keys() - known:
        logger.warning("manual addition for unlisted source %s ignored", key)

    def work(s):
        return _discover_one(s, client, timeout, manual.get(s.normalized, []))

    return map_polite(work, sources, max_concurrency, url_of=lambda s: s.request_url)


def write_discovery_json(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([r.to_dict() for r in records], fh, indent=2, ensure_ascii=False)
        fh.write("\n")
