"""Snapshot download of discovered feeds.

Every run downloads each feed once, in an order that avoids hitting the
same host back to back, and writes the raw XML plus a ``metadata.json``
describing each stored snapshot.
"""

import hashlib
import json
import logging
import os
import random
import tempfile
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import requests

from .errors import (
    ContentTypeError,
    FeedFormatError,
    FetchError,
    InputError,
    PermanentFetchError,
    RetriesExhaustedError,
    StorageError,
)
from .net import map_polite
from .urls import host_key

logger = logging.getLogger(__name__)

RETRY_WAITS = (5.0, 15.0)
METADATA_FILE = "metadata.json"
ERRORS_FILE = "errors.json"


@dataclass
class FetchMetadata:
    url: str
    timestamp: str
    filename: str
    status_code: int
    content_type: str

    def to_dict(self):
        return asdict(self)


@dataclass
class FetchRunResult:
    downloaded: int = 0
    errors: int = 0
    error_urls: list = field(default_factory=list)
    metadata: list = field(default_factory=list)

    def summary(self):
        return {
            "downloaded": self.downloaded,
            "errors": self.errors,
            "error_urls": [{"url": u, "reason": r} for u, r in self.error_urls],
        }


def _utcnow():
    return datetime.now(timezone.utc)


def extract_feed_urls(discovery_json):
    """Unique feed URLs across all discovery records, first-seen order.

    *discovery_json* may be a path, an open file or the decoded list.
    """
    if isinstance(discovery_json, (str, os.PathLike)):
        try:
            with open(discovery_json, encoding="utf-8") as fh:
                records = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read {discovery_json}: {exc}") from exc
        except ValueError as exc:
            raise FeedFormatError(f"{discovery_json} is not valid JSON: {exc}") from exc
    elif hasattr(discovery_json, "read"):
        try:
            records = json.load(discovery_json)
        except ValueError as exc:
            raise FeedFormatError(f"discovery input is not valid JSON: {exc}") from exc
    else:
        records = discovery_json

    if not isinstance(records, list):
        raise FeedFormatError("discovery JSON must be an array of objects")
    seen = {}
    for i, rec in enumerate(records):
        if not isinstance(rec, dict) or "rss_links" not in rec:
            raise FeedFormatError(f"record {i} has no 'rss_links' key")
        links = rec["rss_links"]
        if not isinstance(links, list) or not all(isinstance(u, str) for u in links):
            raise FeedFormatError(f"record {i}: 'rss_links' must be a list of strings")
        for url in links:
            seen.setdefault(url, None)
    return list(seen)


def _arrangeable(counts, n, avoid=None):
    """Can *counts* (n items) be laid out with no equal neighbours,
    the first item not being *avoid*?"""
    for host, c in counts.items():
        limit = n // 2 if host == avoid else (n + 1) // 2
        if c > limit:
            return False
    return True


def politeness_order(urls, seed):
    """Seeded shuffle, then repaired so no two neighbours share a host.

    The repair walks the shuffled list and, at each position, takes the
    earliest remaining URL whose host differs from the previous one and
    keeps the rest arrangeable. When no valid arrangement exists at all the
    plain shuffle is returned.
    """
    shuffled = list(urls)
    random.Random(seed).shuffle(shuffled)
    hosts = [host_key(u) for u in shuffled]
    counts = Counter(hosts)
    if not _arrangeable(counts, len(shuffled)):
        return shuffled

    remaining = list(zip(shuffled, hosts))
    out = []
    prev = None
    while remaining:
        for i, (url, host) in enumerate(remaining):
            if host == prev:
                continue
            counts[host] -= 1
            if _arrangeable(counts, len(remaining) - 1, avoid=host):
                break
            counts[host] += 1
        else:  # pragma: no cover - unreachable when the input is arrangeable
            raise AssertionError("politeness repair failed")
        out.append(url)
        prev = host
        del remaining[i]
    return out


def get(url, headers=None, params=None, *, session, timeout=30.0,
        waits=RETRY_WAITS, sleep=time.sleep):
    """GET with the download retry contract.

    2xx is returned immediately. 4xx raises PermanentFetchError without a
    retry. 5xx and transport failures are retried after ``waits[0]`` and
    then ``waits[1]`` seconds, so at most ``len(waits) + 1`` requests are
    sent before RetriesExhaustedError. Redirects are followed by the
    session (5 at most); any other final status is permanent.
    """
    attempts = len(waits) + 1
    last_status = last_error = None
    for attempt in range(attempts):
        if attempt:
            sleep(waits[attempt - 1])
        try:
            resp = session.get(url, headers=headers, params=params,
                               timeout=timeout, allow_redirects=True)
        except requests.RequestException as exc:
            last_status, last_error = None, exc
            logger.info("attempt %d for %s failed: %s", attempt + 1, url, exc)
            continue
        status = resp.status_code
        if 200 <= status < 300:
            return resp
        if 500 <= status < 600:
            last_status, last_error = status, None
            logger.info("attempt %d for %s got %d", attempt + 1, url, status)
            continue
        raise PermanentFetchError(url, status)
    raise RetriesExhaustedError(url, attempts, last_status, last_error)


def snapshot_filename(url, when):
    digest = hashlib.sha256(url.encode("utf-8")).hexdigest()[:16]
    return f"{digest}_{when.strftime('%Y%m%dT%H%M%S')}.xml"


def _write_atomic(path, data):
    directory = os.path.dirname(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".part-")
    except OSError as exc:
        raise StorageError(f"cannot write into {directory}: {exc}") from exc
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise StorageError(f"cannot write {path}: {exc}") from exc


def load_rss(url, snapshot_dir, client, *, headers=None, timeout=30.0,
             waits=RETRY_WAITS, sleep=time.sleep, now=_utcnow):
    """Download one feed into *snapshot_dir* and describe the snapshot."""
    resp = get(url, headers, session=client, timeout=timeout, waits=waits, sleep=sleep)
    content_type = resp.headers.get("Content-Type", "")
    if "xml" not in content_type.lower():
        raise ContentTypeError(url, content_type)
    body = resp.content
    if not body:
        raise FetchError(url, "empty response body")
    when = now().astimezone(timezone.utc).replace(microsecond=0)
    filename = snapshot_filename(url, when)
    _write_atomic(os.path.join(snapshot_dir, filename), body)
    return FetchMetadata(
        url=url,
        timestamp=when.isoformat().replace("+00:00", "Z"),
        filename=filename,
        status_code=resp.status_code,
        content_type=content_type,
    )


def _dump(obj, path):
    _write_atomic(path, (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8"))


def run_fetch(discovery_json, snapshot_dir, seed=0, *, client, headers=None,
              timeout=30.0, waits=RETRY_WAITS, max_concurrency=1,
              sleep=time.sleep, now=_utcnow):
    """Download every discovered feed once into *snapshot_dir*.

    Writes ``metadata.json`` (stored snapshots, in download order) and
    ``errors.json`` (``{url, reason}`` per failed feed). Per-feed failures
    never abort the run.
    """
    try:
        os.makedirs(snapshot_dir, exist_ok=True)
    except OSError as exc:
        raise StorageError(f"cannot create {snapshot_dir}: {exc}") from exc
    if not os.access(snapshot_dir, os.W_OK):
        raise StorageError(f"{snapshot_dir} is not writable")

    order = politeness_order(extract_feed_urls(discovery_json), seed)

    def fetch_one(url):
        try:
            return load_rss(url, snapshot_dir, client, headers=headers, timeout=timeout,
                            waits=waits, sleep=sleep, now=now)
        except FetchError as exc:
            logger.warning("feed failed: %s", exc)
            return exc

    outcomes = map_polite(fetch_one, order, max_concurrency)

    result = FetchRunResult()
    for url, outcome in zip(order, outcomes):
        if isinstance(outcome, FetchMetadata):
            result.metadata.append(outcome)
            result.downloaded += 1
        else:
            result.error_urls.append((url, outcome.reason))
            result.errors += 1

    _dump([m.to_dict() for m in result.metadata], os.path.join(snapshot_dir, METADATA_FILE))
    _dump(result.summary()["error_urls"], os.path.join(snapshot_dir, ERRORS_FILE))
    return result
