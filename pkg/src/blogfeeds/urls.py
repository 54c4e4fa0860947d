"""URL parsing and normalization shared by discovery and fetching."""

import re
from urllib.parse import urlsplit, urlunsplit

_DEFAULT_PORTS = {"http": 80, "https": 443}
_BARE_HOST = re.compile(r"^[A-Za-z0-9.-]+\.[A-Za-z]{2,}(:\d+)?(/\S*)?$")


def parse_source_url(text):
    """Return *text* as an absolute http(s) URL, or None if it is not one.

    Scheme-less values that look like ``host.tld/path`` get ``https://``.
    """
    text = (text or "").strip()
    if not text or any(c.isspace() for c in text):
        return None
    if "://" not in text:
        if not _BARE_HOST.match(text):
            return None
        text = "https://" + text
    try:
        parts = urlsplit(text)
        parts.port  # raises on garbage ports
    except ValueError:
        return None
    if parts.scheme.lower() not in _DEFAULT_PORTS or not parts.hostname:
        return None
    return text


def is_absolute_http(url):
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return parts.scheme in _DEFAULT_PORTS and bool(parts.netloc)


def normalize_url(url):
    """Canonical form used for deduplication.

    Lowercases scheme and host, strips a leading ``www.``, drops default
    ports, the fragment and trailing slashes. Path and query case are kept.
    """
    parts = urlsplit(url.strip())
    scheme = parts.scheme.lower()
    host = (parts.hostname or "").lower()
    if host.startswith("www."):
        host = host[4:]
    port = parts.port
    netloc = host
    if port is not None and port != _DEFAULT_PORTS.get(scheme):
        netloc = f"{host}:{port}"
    path = parts.path.rstrip("/")
    return urlunsplit((scheme, netloc, path, parts.query, ""))


def host_key(url):
    """Host used for politeness decisions (``www.`` folded, port kept)."""
    return urlsplit(normalize_url(url)).netloc
