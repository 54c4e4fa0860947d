import csv
from datetime import date, datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from blogfeeds.analytics import (
    ENTRY_FIELDS,
    FEED_FIELDS,
    QualityThresholds,
    bucket_start,
    inclusion_rates,
    percent,
    quality_flags,
    tags_over_time,
    write_timeline_csv,
)
from blogfeeds.converter import NormalizedRecord, ParsedFeed, container_id, item_id
from blogfeeds.parser import EntryRecord, FeedRecord


def utc(*args):
    return datetime(*args, tzinfo=timezone.utc)


def test_field_names():
    assert list(FEED_FIELDS) == ["title", "subtitle", "blog url", "rss url", "last updated", "language"]
    assert list(ENTRY_FIELDS) == ["title", "id", "link", "publication date", "authors", "summary",
                                  "content", "tags", "comments"]


@pytest.mark.parametrize("part, whole, expected", [
    (2, 3, 66.7), (1, 3, 33.3), (1, 8, 12.5), (1, 16, 6.3), (3, 16, 18.8), (0, 5, 0.0), (5, 5, 100.0),
])
def test_percent_half_up(part, whole, expected):
    assert percent(part, whole) == expected


def test_language_two_of_three():
    feeds = [FeedRecord(rss_url=f"https://{h}.org/feed", title="t", language=lang)
             for h, lang in (("a", "en"), ("b", "de"), ("c", None))]
    report = inclusion_rates(feeds, "feed")
    assert report.denominator == 3
    assert report.rates["language"] == 66.7
    assert report.rates["rss url"] == 100.0
    assert report.counts["language"] == 2


def test_blank_values_do_not_count():
    feeds = [FeedRecord(rss_url="u", title="   "), FeedRecord(rss_url="v", title="x")]
    assert inclusion_rates(feeds, "feed").rates["title"] == 50.0
    entries = [EntryRecord(parent_rss_url="u", authors=[" "], tags=[]),
               EntryRecord(parent_rss_url="u", authors=["A"], tags=["t"])]
    rates = inclusion_rates(entries, "entry").rates
    assert rates["authors"] == 50.0 and rates["tags"] == 50.0


def test_unparseable_dates_reported_separately():
    entries = [EntryRecord(parent_rss_url="u", publication_date_raw="soon"),
               EntryRecord(parent_rss_url="u", publication_date=utc(2022, 1, 1),
                           publication_date_raw="2022-01-01")]
    report = inclusion_rates(entries, "entry")
    assert report.rates["publication date"] == 50.0
    assert report.unparseable["publication date"] == 1


def test_empty_corpus():
    report = inclusion_rates([], "entry")
    assert report.denominator == 0
    assert all(v is None for v in report.rates.values())
    assert report.to_dict()["fields"]["title"] is None


def test_levels_from_parsed_pairs():
    feed = FeedRecord(rss_url="u", title="t")
    parsed = [ParsedFeed(feed, [EntryRecord(parent_rss_url="u", title="a"),
                                EntryRecord(parent_rss_url="u")])]
    assert inclusion_rates(parsed, "feed").denominator == 1
    assert inclusion_rates(parsed, "entry").rates["title"] == 50.0
    with pytest.raises(ValueError):
        inclusion_rates(parsed, "item")


full_feed = FeedRecord(rss_url="r", title="t", subtitle="s", blog_url="b",
                       last_updated=utc(2020, 1, 1), language="en")
feed_st = st.builds(
    FeedRecord,
    rss_url=st.just("https://a.org/feed"),
    title=st.one_of(st.none(), st.sampled_from(["", " ", "t"])),
    subtitle=st.one_of(st.none(), st.just("s")),
    blog_url=st.one_of(st.none(), st.just("https://a.org")),
    language=st.one_of(st.none(), st.just("en")),
)


@given(st.lists(feed_st, min_size=1, max_size=10))
def test_full_record_never_lowers_rates(feeds):
    before = inclusion_rates(feeds, "feed").rates
    after = inclusion_rates(feeds + [full_feed], "feed").rates
    assert all(after[k] >= before[k] for k in before)
    assert after["rss url"] == 100.0
    assert all(0 <= v <= 100 for v in after.values())


# quality flags

def _flags(feed, entries=()):
    return [(f.record_id, f.flag) for f in quality_flags([ParsedFeed(feed, list(entries))])]


def test_overlong_subtitle():
    feed = FeedRecord(rss_url="u", title="t", subtitle="x" * 400)
    assert _flags(feed) == [(container_id("u"), "overlong_subtitle")]


def test_thresholds_configurable():
    feed = FeedRecord(rss_url="u", title="abcdef", subtitle="x" * 400)
    flags = quality_flags([ParsedFeed(feed, [])], QualityThresholds(500, 5))
    assert [f.flag for f in flags] == ["overlong_title"]


def test_placeholder_title():
    feed = FeedRecord(rss_url="u", title="t")
    entry = EntryRecord(parent_rss_url="u", title="Not Available", link="https://a.org/1")
    assert _flags(feed, [entry]) == [(item_id(entry, container_id("u")), "placeholder_title")]


def test_markup_and_dates():
    feed = FeedRecord(rss_url="u", title="t", last_updated_raw="yesterday")
    entry = EntryRecord(parent_rss_url="u", title="ok", content="<p>x</p>",
                        publication_date_raw="sometime")
    flags = {f for _, f in _flags(feed, [entry])}
    assert flags == {"unparseable_date", "markup_in_content"}
    assert _flags(FeedRecord(rss_url="u", title="t"),
                  [EntryRecord(parent_rss_url="u", title="ok", content="a < b")]) == []


def test_clean_record():
    assert _flags(full_feed, [EntryRecord(parent_rss_url="r", title="Fine", content="plain",
                                          publication_date=utc(2022, 1, 1),
                                          publication_date_raw="2022-01-01")]) == []


# buckets and timeline

@pytest.mark.parametrize("day, start", [
    (date(2022, 11, 16), date(2022, 11, 1)),
    (date(2022, 12, 30), date(2022, 11, 1)),
    (date(2023, 1, 1), date(2023, 1, 1)),
    (date(2023, 2, 28), date(2023, 1, 1)),
    (date(2023, 4, 30), date(2023, 3, 1)),
    (date(2024, 8, 1), date(2024, 7, 1)),
])
def test_bucket_start(day, start):
    assert bucket_start(day) == start


@given(st.dates())
def test_bucket_depends_on_month_only(day):
    start = bucket_start(day)
    assert start == bucket_start(day.replace(day=1))
    assert start.year == day.year and start.day == 1
    assert start.month % 2 == 1 and start.month in (day.month, day.month - 1)


def _entry(when, tags=(), title="t", summary=None):
    return EntryRecord(parent_rss_url="u", title=title, publication_date=when, tags=list(tags),
                       summary=summary)


def test_elections_tag_bucket():
    timeline = tags_over_time([_entry(utc(2022, 11, 16, 9, 57, 58), ["Elections and party politics"])])
    assert [(r.key, r.bucket_start, r.count) for r in timeline] == \
        [("Elections and party politics", date(2022, 11, 1), 1)]


def test_same_bucket_twice():
    timeline = tags_over_time([_entry(utc(2022, 11, 2), ["x"]), _entry(utc(2022, 12, 30), ["x"])])
    assert [(r.bucket_start, r.count) for r in timeline] == [(date(2022, 11, 1), 2)]


def test_no_entries():
    assert list(tags_over_time([])) == []


def test_zero_buckets_filled_and_undated_counted():
    timeline = tags_over_time([_entry(utc(2022, 1, 5), ["a"]), _entry(utc(2022, 6, 1), ["b"]),
                               _entry(None, ["a"])])
    rows = [(r.key, r.bucket_start.month, r.count) for r in timeline]
    assert rows == [("a", 1, 1), ("a", 3, 0), ("a", 5, 0),
                    ("b", 1, 0), ("b", 3, 0), ("b", 5, 1)]
    assert timeline.undated == 1


def test_keys_match_tags_and_text():
    entries = [_entry(utc(2022, 3, 1), ["Brexit"]),
               _entry(utc(2022, 3, 2), title="After BREXIT"),
               _entry(utc(2022, 3, 3), summary="<p>brexit talks</p>"),
               _entry(utc(2022, 3, 4), ["other"])]
    timeline = tags_over_time(entries, keys=["brexit"])
    assert [(r.key, r.count) for r in timeline] == [("brexit", 3)]


def test_items_and_containers():
    records = [NormalizedRecord("c", "container", "Blog", publication_date=utc(2022, 1, 1)),
               NormalizedRecord("i", "item", "x", keywords=["k"], publication_date=utc(2022, 2, 1),
                                parent_record_id="c")]
    assert [(r.key, r.count) for r in tags_over_time(records)] == [("k", 1)]


dated = st.lists(st.tuples(st.one_of(st.none(), st.datetimes(datetime(2000, 1, 1), datetime(2030, 1, 1))),
                           st.lists(st.sampled_from("abc"), max_size=3)), max_size=30)


@given(dated)
def test_bucket_sums(rows):
    entries = [_entry(w.replace(tzinfo=timezone.utc) if w else None, tags) for w, tags in rows]
    timeline = tags_over_time(entries)
    assert timeline.undated == sum(w is None for w, _ in rows)
    for key in "abc":
        expected = sum(1 for w, tags in rows if w is not None and key in tags)
        assert sum(r.count for r in timeline if r.key == key) == expected
    assert all(r.bucket_start.month % 2 == 1 for r in timeline)


def test_csv(tmp_path):
    timeline = tags_over_time([_entry(utc(2022, 11, 16), ["x"])])
    write_timeline_csv(timeline, tmp_path / "t.csv")
    with open(tmp_path / "t.csv", newline="") as fh:
        assert list(csv.reader(fh)) == [["key", "bucket_start", "count"], ["x", "2022-11-01", "1"]]
