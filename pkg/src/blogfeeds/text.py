"""Display-text cleanup and tolerant date parsing."""

import re
from datetime import datetime, timezone
from email.utils import parsedate_to_datetime
from html.parser import HTMLParser

_WS = re.compile(r"\s+")
_TAGLIKE = re.compile(r"<+(?=[A-Za-z/!?])")
_QUOTES = str.maketrans({"\u2018": "'", "\u2019": "'", "\u201c": '"', "\u201d": '"'})
_SKIP_CONTENT = {"script", "style"}
_INLINE = {
    "a", "abbr", "b", "cite", "code", "em", "i", "mark", "q", "s", "small",
    "span", "strong", "sub", "sup", "u",
}


class _TextExtractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts = []
        self._skip = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_CONTENT:
            self._skip += 1
        if tag not in _INLINE:
            self.parts.append(" ")

    def handle_endtag(self, tag):
        if tag in _SKIP_CONTENT and self._skip:
            self._skip -= 1
        if tag not in _INLINE:
            self.parts.append(" ")

    def handle_data(self, data):
        if not self._skip:
            self.parts.append(data)


def _strip_once(text):
    parser = _TextExtractor()
    parser.feed(text)
    parser.close()
    return _WS.sub(" ", "".join(parser.parts)).strip()


def strip_markup(text):
    """Remove tags, decode entities and collapse whitespace.

    Entity-escaped markup (``&lt;b&gt;``) decodes to tags, so stripping is
    repeated until the text stops changing. Typographic single and double
    quotes are folded to their ASCII forms.
    """
    if not text:
        return ""
    out = _strip_once(text)
    for _ in range(10):
        again = _strip_once(out)
        if again == out:
            break
        out = again
    # HTMLParser passes an unterminated "<tag" through as data
    out = _WS.sub(" ", _TAGLIKE.sub("", out)).strip()
    return out.translate(_QUOTES)


def _as_utc(dt):
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def parse_datetime(text):
    """Parse RFC 822/1123 or ISO 8601 text into an aware UTC datetime.

    Zoneless values are taken as UTC. Returns None when nothing parses.
    """
    if not text:
        return None
    text = text.strip()
    if not text:
        return None
    try:
        return _as_utc(parsedate_to_datetime(text))
    except (TypeError, ValueError, IndexError, OverflowError):
        pass
    iso = text
    if iso[-1:] in "Zz":
        iso = iso[:-1] + "+00:00"
    try:
        return _as_utc(datetime.fromisoformat(iso))
    except ValueError:
        return None


def format_datetime(dt):
    """ISO 8601 with a ``Z`` suffix; None passes through."""
    if dt is None:
        return None
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")
