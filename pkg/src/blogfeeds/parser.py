"""RSS 2.0 and Atom parsing into flat feed/entry records.

Missing elements become missing fields; only documents that are not XML at
all, or XML of another vocabulary, are rejected.
"""

import codecs
import copy
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime

from .errors import FeedParseError, UnsupportedFormatError
from .text import format_datetime, parse_datetime

ATOM = "http://www.w3.org/2005/Atom"
CONTENT = "http://purl.org/rss/1.0/modules/content/"
DC = "http://purl.org/dc/elements/1.1/"
XML_LANG = "{http://www.w3.org/XML/1998/namespace}lang"

_DECL_ENCODING = re.compile(rb"^\s*<\?xml[^>]*?encoding\s*=\s*[\"']([A-Za-z0-9._-]+)[\"']")
_DECL = re.compile(r"^\s*<\?xml[^>]*\?>")
_ESCAPED = re.compile("[\udc80-\udcff]")


@dataclass
class FeedRecord:
    rss_url: str
    title: str | None = None
    subtitle: str | None = None
    blog_url: str | None = None
    last_updated: datetime | None = None
    language: str | None = None
    # raw text of the date element, kept so analytics can tell
    # "missing" from "present but unparseable"
    last_updated_raw: str | None = None
    fetched_at: str | None = None
    replaced_bytes: int = 0

    def to_dict(self):
        return {
            "rss_url": self.rss_url,
            "title": self.title,
            "subtitle": self.subtitle,
            "blog_url": self.blog_url,
            "last_updated": format_datetime(self.last_updated),
            "last_updated_raw": self.last_updated_raw,
            "language": self.language,
            "fetched_at": self.fetched_at,
            "replaced_bytes": self.replaced_bytes,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["last_updated"] = parse_datetime(d.get("last_updated"))
        return cls(**d)


@dataclass
class EntryRecord:
    parent_rss_url: str
    title: str | None = None
    entry_id: str | None = None
    link: str | None = None
    publication_date: datetime | None = None
    authors: list = field(default_factory=list)
    summary: str | None = None
    content: str | None = None
    tags: list = field(default_factory=list)
    comments_url: str | None = None
    language: str | None = None
    publication_date_raw: str | None = None

    def to_dict(self):
        return {
            "parent_rss_url": self.parent_rss_url,
            "title": self.title,
            "entry_id": self.entry_id,
            "link": self.link,
            "publication_date": format_datetime(self.publication_date),
            "publication_date_raw": self.publication_date_raw,
            "authors": list(self.authors),
            "summary": self.summary,
            "content": self.content,
            "tags": list(self.tags),
            "comments_url": self.comments_url,
            "language": self.language,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["publication_date"] = parse_datetime(d.get("publication_date"))
        return cls(**d)


def _decode(xml_bytes):
    """Decode per the XML declaration (UTF-8 default).

    Undecodable bytes become U+FFFD; their count is returned alongside.
    """
    if xml_bytes.startswith(codecs.BOM_UTF8):
        xml_bytes = xml_bytes[len(codecs.BOM_UTF8):]
        encoding = "utf-8"
    else:
        m = _DECL_ENCODING.match(xml_bytes)
        encoding = m.group(1).decode("ascii") if m else "utf-8"
    try:
        codecs.lookup(encoding)
    except LookupError:
        encoding = "utf-8"
    text = xml_bytes.decode(encoding, errors="surrogateescape")
    bad = len(_ESCAPED.findall(text))
    if bad:
        text = _ESCAPED.sub("\ufffd", text)
    return text, bad


def _parse_tree(xml_bytes):
    text, bad = _decode(xml_bytes)
    # already decoded, so drop the declaration: a non-UTF-8 encoding
    # there would contradict the str handed to expat
    m = _DECL.match(text)
    decl = m.group(0) if m else ""
    body = text[len(decl):]
    try:
        root = ET.fromstring(body)
    except ET.ParseError as exc:
        line, col = exc.position
        lines = body.splitlines(keepends=True)[: line - 1]
        offset = len((decl + "".join(lines)).encode("utf-8")) + col
        raise FeedParseError(f"XML is not well-formed: {exc}", offset) from None
    return root, bad


def _local(tag):
    return tag.rsplit("}", 1)[-1] if isinstance(tag, str) else ""


def _ns(tag):
    return tag[1:].split("}", 1)[0] if isinstance(tag, str) and tag.startswith("{") else ""


def _text(el):
    if el is None:
        return None
    return "".join(el.itertext()).strip()


def _child(parent, name, ns=""):
    for el in parent:
        if _local(el.tag) == name and _ns(el.tag) == ns:
            return el
    return None


def _children(parent, name, ns=""):
    return [el for el in parent if _local(el.tag) == name and _ns(el.tag) == ns]


def _first_text(parent, *candidates):
    for name, ns in candidates:
        el = _child(parent, name, ns)
        if el is not None:
            return _text(el)
    return None


def _uniq(values):
    out = []
    for v in values:
        if v and v not in out:
            out.append(v)
    return out


def _date(raw):
    return parse_datetime(raw) if raw else None


def _parse_rss_item(item, rss_url):
    date_raw = _first_text(item, ("pubDate", ""))
    authors = [_text(el) for el in _children(item, "author")]
    authors += [_text(el) for el in _children(item, "creator", DC)]
    return EntryRecord(
        parent_rss_url=rss_url,
        title=_first_text(item, ("title", "")),
        entry_id=_first_text(item, ("guid", "")),
        link=_first_text(item, ("link", "")),
        publication_date=_date(date_raw),
        publication_date_raw=date_raw,
        authors=_uniq(authors),
        summary=_first_text(item, ("description", "")),
        content=_first_text(item, ("encoded", CONTENT)),
        tags=_uniq(_text(el) for el in _children(item, "category")),
        comments_url=_first_text(item, ("comments", "")),
    )


def _parse_rss(root, rss_url):
    channel = _child(root, "channel")
    if channel is None:
        raise UnsupportedFormatError("RSS document without a channel element")
    date_raw = _first_text(channel, ("lastBuildDate", ""))
    feed = FeedRecord(
        rss_url=rss_url,
        title=_first_text(channel, ("title", "")),
        subtitle=_first_text(channel, ("description", "")),
        blog_url=_first_text(channel, ("link", "")),
        last_updated=_date(date_raw),
        last_updated_raw=date_raw,
        language=_first_text(channel, ("language", "")),
    )
    entries = [_parse_rss_item(item, rss_url) for item in _children(channel, "item")]
    return feed, entries


def _atom_link(parent, rel):
    for el in _children(parent, "link", ATOM):
        if el.get("rel", "alternate") == rel and el.get("href") is not None:
            return el.get("href").strip()
    return None


def _atom_content(el):
    if el is None:
        return None
    if el.get("type") == "xhtml":
        parts = []
        for child in el:
            child = copy.deepcopy(child)
            for node in child.iter():
                node.tag = _local(node.tag)
            parts.append(ET.tostring(child, encoding="unicode"))
        return ((el.text or "") + "".join(parts)).strip()
    return _text(el)


def _parse_atom_entry(entry, rss_url, feed_lang):
    date_raw = _first_text(entry, ("published", ATOM))
    authors = [_first_text(a, ("name", ATOM)) for a in _children(entry, "author", ATOM)]
    lang = entry.get(XML_LANG)
    return EntryRecord(
        parent_rss_url=rss_url,
        title=_first_text(entry, ("title", ATOM)),
        entry_id=_first_text(entry, ("id", ATOM)),
        link=_atom_link(entry, "alternate"),
        publication_date=_date(date_raw),
        publication_date_raw=date_raw,
        authors=_uniq(authors),
        summary=_atom_content(_child(entry, "summary", ATOM)),
        content=_atom_content(_child(entry, "content", ATOM)),
        tags=_uniq((el.get("term") or "").strip() for el in _children(entry, "category", ATOM)),
        comments_url=_atom_link(entry, "replies"),
        language=lang if lang and lang != feed_lang else None,
    )


def _parse_atom(root, rss_url):
    date_raw = _first_text(root, ("updated", ATOM))
    lang = root.get(XML_LANG)
    feed = FeedRecord(
        rss_url=rss_url,
        title=_first_text(root, ("title", ATOM)),
        subtitle=_first_text(root, ("subtitle", ATOM)),
        blog_url=_atom_link(root, "alternate"),
        last_updated=_date(date_raw),
        last_updated_raw=date_raw,
        language=lang.strip() if lang else None,
    )
    entries = [_parse_atom_entry(e, rss_url, lang) for e in _children(root, "entry", ATOM)]
    return feed, entries


def parse_feed_document(xml_bytes, rss_url):
    """Parse a raw snapshot into ``(FeedRecord, [EntryRecord, ...])``.

    Raises FeedParseError for malformed XML and UnsupportedFormatError for
    roots other than ``<rss>`` and Atom ``<feed>``.
    """
    root, bad = _parse_tree(xml_bytes)
    name, ns = _local(root.tag), _ns(root.tag)
    if name == "rss" and ns == "":
        feed, entries = _parse_rss(root, rss_url)
    elif name == "feed" and ns == ATOM:
        feed, entries = _parse_atom(root, rss_url)
    else:
        raise UnsupportedFormatError(f"unsupported root element {root.tag!r}")
    feed.replaced_bytes = bad
    return feed, entries
