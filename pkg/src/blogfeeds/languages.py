"""BCP 47 language tags to ISO 639-3 codes, using the embedded tables."""

import re

from ._iso639 import ISO639_1_TO_3, ISO639_2B_TO_3, ISO639_3_CODES, TABLE_VERSION

__all__ = ["get_languages", "primary_subtag", "TABLE_VERSION", "ISO639_3_CODES"]

_SUBTAG_SEP = re.compile(r"[-_]")


def primary_subtag(tag):
    """Lowercased primary language subtag of *tag* ("" when absent)."""
    if not tag:
        return ""
    return _SUBTAG_SEP.split(tag.strip(), 1)[0].strip().lower()


def get_languages(tag):
    """``"en-US"`` -> ``["eng"]``; unknown or missing tags give ``[]``.

    Two-letter subtags go through the ISO 639-1 table, registered
    three-letter codes pass through and bibliographic variants (``ger``)
    map to their terminology form. Underscores are accepted as separators
    since feeds in the wild emit ``en_US``.
    """
    primary = primary_subtag(tag)
    if len(primary) == 2:
        code = ISO639_1_TO_3.get(primary)
    elif len(primary) == 3:
        code = primary if primary in ISO639_3_CODES else ISO639_2B_TO_3.get(primary)
    else:
        code = None
    return [code] if code else []
