import re
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from blogfeeds.text import format_datetime, parse_datetime, strip_markup

UTC = timezone.utc


@pytest.mark.parametrize("raw, expected", [
    ("In this year&#8217;s midterm elections", "In this year's midterm elections"),
    ("<p>hello <b>world</b></p>", "hello world"),
    ("", ""),
    (None, ""),
    ("&lt;p&gt;escaped&lt;/p&gt;", "escaped"),
    ("a &amp; b", "a & b"),
    ("<p>one</p><p>two</p>", "one two"),
    ("  lots\n\n of \t space ", "lots of space"),
    ("<script>var x = 1;</script>text", "text"),
    ("x < y and y > z", "x < y and y > z"),
    ("trailing <b", "trailing"),
])
def test_strip_markup(raw, expected):
    assert strip_markup(raw) == expected


_TAG_ADJACENT = re.compile(r"<[A-Za-z]|</[A-Za-z]")


@given(st.text(alphabet=st.sampled_from(list("ab <>/&;#x8217p lt gt amp\n\"'=")), max_size=60))
def test_strip_markup_idempotent_and_tag_free(raw):
    once = strip_markup(raw)
    assert strip_markup(once) == once
    assert not _TAG_ADJACENT.search(once)


@given(st.text(max_size=80))
def test_strip_markup_idempotent_any_text(raw):
    once = strip_markup(raw)
    assert strip_markup(once) == once


@pytest.mark.parametrize("raw, expected", [
    ("Wed, 17 Aug 2016 03:54:00 +0000", datetime(2016, 8, 17, 3, 54, tzinfo=UTC)),
    ("2022-11-16 09:57:58", datetime(2022, 11, 16, 9, 57, 58, tzinfo=UTC)),
    ("2022-11-16T09:57:58Z", datetime(2022, 11, 16, 9, 57, 58, tzinfo=UTC)),
    ("2022-11-16T11:57:58+02:00", datetime(2022, 11, 16, 9, 57, 58, tzinfo=UTC)),
    ("Wed, 16 Nov 2022 04:57:58 -0500", datetime(2022, 11, 16, 9, 57, 58, tzinfo=UTC)),
    ("Wed, 17 Aug 2016 03:54:00 GMT", datetime(2016, 8, 17, 3, 54, tzinfo=UTC)),
    ("  2022-11-16 09:57:58  ", datetime(2022, 11, 16, 9, 57, 58, tzinfo=UTC)),
])
def test_parse_datetime(raw, expected):
    assert parse_datetime(raw) == expected
    assert parse_datetime(raw).tzinfo is not None


@pytest.mark.parametrize("raw", ["not a date", "", None, "Wed, 32 Aug 2016 03:54:00 +0000", "2022-13-01"])
def test_parse_datetime_rejects(raw):
    assert parse_datetime(raw) is None


@given(st.datetimes(min_value=datetime(1970, 1, 2), max_value=datetime(2200, 1, 1),
                    timezones=st.sampled_from([UTC, timezone(timedelta(hours=5, minutes=30)),
                                               timezone(timedelta(hours=-8))])))
def test_parse_datetime_roundtrip(dt):
    parsed = parse_datetime(dt.isoformat())
    assert parsed == dt
    assert parse_datetime(format_datetime(parsed)) == parsed
