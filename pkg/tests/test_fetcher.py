import hashlib
import io
import itertools
import json
import os
import re
from collections import Counter
from datetime import datetime, timezone

import pytest
import requests
from hypothesis import given, settings
from hypothesis import strategies as st

from blogfeeds.errors import (
    ContentTypeError,
    FeedFormatError,
    PermanentFetchError,
    RetriesExhaustedError,
    StorageError,
)
from blogfeeds.fetcher import (
    extract_feed_urls,
    get,
    load_rss,
    politeness_order,
    run_fetch,
    snapshot_filename,
)
from blogfeeds.urls import host_key
from conftest import XML, Reply, rss_doc


def adjacent_clash(urls):
    return any(host_key(a) == host_key(b) for a, b in zip(urls, urls[1:]))


def brute_force_arrangeable(urls):
    """Oracle: does any permutation avoid same-host neighbours?"""
    return any(not adjacent_clash(p) for p in itertools.permutations(urls))


# extract_feed_urls

def test_extract_dedupes_in_order():
    recs = [{"rss_links": ["https://a.org/feed", "https://b.org/rss"]},
            {"rss_links": ["https://a.org/feed", "https://c.org/atom"]}]
    assert extract_feed_urls(recs) == ["https://a.org/feed", "https://b.org/rss", "https://c.org/atom"]


def test_extract_empty():
    assert extract_feed_urls([]) == []


def test_extract_shared_feed_once():
    recs = [{"rss_links": ["https://x.org/f"]}, {"rss_links": ["https://x.org/f"]}]
    assert extract_feed_urls(recs) == ["https://x.org/f"]


def test_extract_from_file_and_path(tmp_path):
    data = [{"url": "u", "status": 200, "content_type": None, "rss_links": ["https://a.org/f"]}]
    p = tmp_path / "d.json"
    p.write_text(json.dumps(data))
    assert extract_feed_urls(str(p)) == ["https://a.org/f"]
    assert extract_feed_urls(io.StringIO(json.dumps(data))) == ["https://a.org/f"]


def test_extract_missing_key_names_index():
    with pytest.raises(FeedFormatError, match="record 1"):
        extract_feed_urls([{"rss_links": []}, {"url": "x"}])


@pytest.mark.parametrize("bad", [{"rss_links": "https://a.org"}, {"rss_links": [1]}])
def test_extract_non_list(bad):
    with pytest.raises(FeedFormatError):
        extract_feed_urls([bad])


def test_extract_not_an_array():
    with pytest.raises(FeedFormatError):
        extract_feed_urls({"rss_links": []})


# politeness_order

def test_brute_force_oracle_counts():
    urls = ["https://a.org/1", "https://a.org/2", "https://b.org/1"]
    valid = [p for p in itertools.permutations(urls) if not adjacent_clash(p)]
    # b.org must sit in the middle: a1 b a2 and a2 b a1
    assert len(valid) == 2


def test_politeness_separates_hosts():
    urls = ["https://a.org/1", "https://a.org/2", "https://b.org/1"]
    for seed in range(20):
        out = politeness_order(urls, seed)
        assert sorted(out) == sorted(urls)
        assert not adjacent_clash(out)


def test_politeness_single_host_is_plain_shuffle():
    urls = [f"https://a.org/{i}" for i in range(5)]
    out = politeness_order(urls, 3)
    assert sorted(out) == sorted(urls)


def test_politeness_single_and_empty():
    assert politeness_order(["https://a.org"], 1) == ["https://a.org"]
    assert politeness_order([], 1) == []


def test_politeness_deterministic_per_seed():
    urls = [f"https://h{i % 3}.org/{i}" for i in range(9)]
    assert politeness_order(urls, 42) == politeness_order(urls, 42)
    assert len({tuple(politeness_order(urls, s)) for s in range(10)}) > 1


def test_politeness_www_counts_as_same_host():
    out = politeness_order(["https://www.a.org/1", "https://a.org/2", "https://b.org"], 0)
    assert out[1] == "https://b.org"


@settings(max_examples=300)
@given(st.lists(st.sampled_from(["a.org", "b.org", "c.org", "d.org"]), min_size=1, max_size=7),
       st.integers(0, 2**32))
def test_politeness_matches_oracle(hosts, seed):
    urls = [f"https://{h}/{i}" for i, h in enumerate(hosts)]
    out = politeness_order(urls, seed)
    assert Counter(out) == Counter(urls)
    if brute_force_arrangeable(urls):
        assert not adjacent_clash(out)


# get: retry contract

@pytest.mark.parametrize("statuses, requests_sent, outcome", [
    ([200], 1, "ok"),
    ([404], 1, PermanentFetchError),
    ([503, 200], 2, "ok"),
    ([503, 503, 200], 3, "ok"),
    ([500, 500, 500], 3, RetriesExhaustedError),
    ([418], 1, PermanentFetchError),
    ([500, 404], 2, PermanentFetchError),
])
def test_get_retry_contract(server, session, clock, statuses, requests_sent, outcome):
    server.script("/f", *[Reply(s, b"<rss/>", XML) for s in statuses])
    if outcome == "ok":
        resp = get(server.url("/f"), session=session, sleep=clock)
        assert resp.status_code == 200
    else:
        with pytest.raises(outcome):
            get(server.url("/f"), session=session, sleep=clock)
    assert len(server.requests_for("/f")) == requests_sent
    assert clock.waits == [5.0, 15.0][: requests_sent - 1]


def test_get_client_error_carries_status(server, session, clock):
    server.script("/f", Reply(410))
    with pytest.raises(PermanentFetchError) as info:
        get(server.url("/f"), session=session, sleep=clock)
    assert info.value.status == 410
    assert isinstance(info.value, ValueError)
    assert clock.waits == []


def test_get_exhausted_carries_last_status(server, session, clock):
    server.script("/f", Reply(500), Reply(502), Reply(503))
    with pytest.raises(RetriesExhaustedError) as info:
        get(server.url("/f"), session=session, sleep=clock)
    assert info.value.last_status == 503
    assert "503" in info.value.reason


def test_get_transport_failure_is_retried(session, clock, dead_url):
    with pytest.raises(RetriesExhaustedError) as info:
        get(dead_url, session=session, sleep=clock, timeout=2)
    assert info.value.last_status is None
    assert clock.waits == [5.0, 15.0]


def test_get_passes_headers_and_params(server, session, clock):
    seen = {}

    class Spy(requests.Session):
        def get(self, url, **kw):
            seen.update(kw)
            return session.get(url, **kw)

    server.script("/f", Reply(200))
    get(server.url("/f"), {"X-Test": "1"}, {"page": "2"}, session=Spy(), sleep=clock)
    assert seen["headers"] == {"X-Test": "1"} and seen["params"] == {"page": "2"}
    assert server.log[-1][1] == "/f?page=2"


def test_get_follows_redirect(server, session, clock):
    server.script("/old", Reply(301, headers={"Location": "/new"}))
    server.script("/new", Reply(200, b"<rss/>", XML))
    assert get(server.url("/old"), session=session, sleep=clock).status_code == 200


# load_rss

FIXED_NOW = datetime(2023, 2, 6, 7, 30, 15, 123456, tzinfo=timezone.utc)


@pytest.mark.parametrize("ctype", [
    "application/rss+xml; charset=UTF-8", "application/atom+xml", "text/xml",
    "application/xml", "TEXT/XML; charset=utf-8"])
def test_load_rss_accepts_xml(server, session, clock, tmp_path, ctype):
    body = rss_doc()
    server.script("/feed", Reply(200, body, ctype))
    meta = load_rss(server.url("/feed"), str(tmp_path), session, sleep=clock, now=lambda: FIXED_NOW)
    assert meta.url == server.url("/feed")
    assert meta.status_code == 200
    assert meta.content_type == ctype
    assert meta.timestamp == "2023-02-06T07:30:15Z"
    digest = hashlib.sha256(server.url("/feed").encode()).hexdigest()[:16]
    assert meta.filename == f"{digest}_20230206T073015.xml"
    assert (tmp_path / meta.filename).read_bytes() == body


@pytest.mark.parametrize("ctype", ["text/html", "application/json", "text/plain", None])
def test_load_rss_rejects_non_xml(server, session, clock, tmp_path, ctype):
    server.script("/feed", Reply(200, b"<html></html>", ctype))
    with pytest.raises(ContentTypeError):
        load_rss(server.url("/feed"), str(tmp_path), session, sleep=clock)
    assert os.listdir(tmp_path) == []


def test_load_rss_propagates_get_errors(server, session, clock, tmp_path):
    with pytest.raises(PermanentFetchError):
        load_rss(server.url("/missing"), str(tmp_path), session, sleep=clock)
    assert os.listdir(tmp_path) == []


def test_load_rss_storage_error(server, session, clock, tmp_path):
    server.script("/feed", Reply(200, rss_doc(), XML))
    with pytest.raises(StorageError):
        load_rss(server.url("/feed"), str(tmp_path / "absent"), session, sleep=clock)


def test_snapshot_filename_format():
    name = snapshot_filename("https://a.org/feed", FIXED_NOW)
    assert re.fullmatch(r"[0-9a-f]{16}_20230206T073015\.xml", name)


# run_fetch

def _discovery(server, *paths, host="127.0.0.1"):
    return [{"url": "x", "status": 200, "content_type": "text/html",
             "rss_links": [server.url(p, host=host) for p in paths]}]


def test_run_fetch_all_healthy(server, session, clock, tmp_path):
    for p in ("/a", "/b", "/c"):
        server.script(p, Reply(200, rss_doc(title=p), XML))
    result = run_fetch(_discovery(server, "/a", "/b", "/c"), str(tmp_path), 1,
                       client=session, sleep=clock)
    assert (result.downloaded, result.errors, result.error_urls) == (3, 0, [])
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert len(meta) == 3
    assert set(meta[0]) == {"url", "timestamp", "filename", "status_code", "content_type"}
    assert len({m["filename"] for m in meta}) == 3
    for m in meta:
        assert (tmp_path / m["filename"]).stat().st_size > 0
    assert json.loads((tmp_path / "errors.json").read_text()) == []


def test_run_fetch_one_404(server, session, clock, tmp_path):
    server.script("/a", Reply(200, rss_doc(), XML))
    server.script("/b", Reply(200, rss_doc(), XML))
    result = run_fetch(_discovery(server, "/a", "/b", "/gone"), str(tmp_path), 0,
                       client=session, sleep=clock)
    assert (result.downloaded, result.errors) == (2, 1)
    assert result.error_urls[0][0] == server.url("/gone")
    assert "404" in result.error_urls[0][1]
    errors = json.loads((tmp_path / "errors.json").read_text())
    assert errors == [{"url": server.url("/gone"), "reason": result.error_urls[0][1]}]
    assert len(server.requests_for("/gone")) == 1


def test_run_fetch_no_feeds(session, clock, tmp_path):
    result = run_fetch([], str(tmp_path), 0, client=session, sleep=clock)
    assert (result.downloaded, result.errors) == (0, 0)
    assert json.loads((tmp_path / "metadata.json").read_text()) == []


def test_run_fetch_no_partial_files(server, session, clock, tmp_path):
    server.script("/html", Reply(200, b"<html/>", "text/html"))
    server.script("/err", Reply(500))
    result = run_fetch(_discovery(server, "/html", "/err"), str(tmp_path), 0,
                       client=session, sleep=clock)
    assert result.errors == 2
    assert sorted(os.listdir(tmp_path)) == ["errors.json", "metadata.json"]


def test_run_fetch_unusable_dir(session, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(StorageError):
        run_fetch([], str(blocker / "sub"), 0, client=session)


@settings(max_examples=25, deadline=None)
@given(statuses=st.lists(st.sampled_from([200, 404, 500, 503, 418]), min_size=1, max_size=3),
       ctype=st.sampled_from(["text/xml", "text/html"]))
def test_run_fetch_conservation_and_budget(tmp_path_factory, statuses, ctype):
    from conftest import FakeClock, MockServer
    from blogfeeds.net import make_session

    srv = MockServer()
    srv.start()
    try:
        paths = [f"/f{i}" for i in range(len(statuses))]
        for p, s in zip(paths, statuses):
            srv.script(p, Reply(s, rss_doc(), ctype))
        out = tmp_path_factory.mktemp("snap")
        result = run_fetch(_discovery(srv, *paths), str(out), 0,
                           client=make_session("t"), sleep=FakeClock())
        assert result.downloaded + result.errors == len(paths)
        assert len(result.error_urls) == result.errors
        for p, s in zip(paths, statuses):
            sent = len(srv.requests_for(p))
            assert sent <= 3
            if s < 500:
                assert sent == 1
    finally:
        srv.stop()


def test_run_fetch_concurrent_same_result(server, session, clock, tmp_path):
    paths = [f"/f{i}" for i in range(6)]
    for p in paths:
        server.script(p, Reply(200, rss_doc(title=p), XML))
    disc = [{"rss_links": [server.url(p, host=("127.0.0.1", "localhost")[i % 2])
                           for i, p in enumerate(paths)]}]
    seq = run_fetch(disc, str(tmp_path / "a"), 5, client=session, sleep=clock,
                    now=lambda: FIXED_NOW)
    par = run_fetch(disc, str(tmp_path / "b"), 5, client=session, sleep=clock,
                    now=lambda: FIXED_NOW, max_concurrency=3)
    assert [m.to_dict() for m in seq.metadata] == [m.to_dict() for m in par.metadata]
    order = [m.url for m in seq.metadata]
    assert not adjacent_clash(order)


def test_run_fetch_identical_layout_across_runs(server, session, clock, tmp_path):
    for p in ("/a", "/b"):
        server.script(p, Reply(200, rss_doc(title=p), XML))
    disc = _discovery(server, "/a", "/b")
    r1 = run_fetch(disc, str(tmp_path / "1"), 9, client=session, sleep=clock)
    r2 = run_fetch(disc, str(tmp_path / "2"), 9, client=session, sleep=clock)
    strip = lambda r: [(m.url, m.status_code, m.content_type) for m in r.metadata]  # noqa: E731
    assert strip(r1) == strip(r2)
