import os
import socket
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlsplit

import pytest

from blogfeeds.net import make_session

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@dataclass
class Reply:
    status: int = 200
    body: bytes = b""
    content_type: str | None = "text/html; charset=utf-8"
    headers: dict = field(default_factory=dict)


class MockServer:
    """Threaded HTTP server replaying scripted replies per path.

    Each request to a path consumes the next scripted reply; the last one
    repeats. Unscripted paths answer 404. Every request is logged.
    """

    def __init__(self):
        self.routes = {}
        self.log = []
        self._lock = threading.Lock()
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                path = urlsplit(self.path).path
                with server._lock:
                    server.log.append((self.headers.get("Host"), self.path))
                    replies = server.routes.get(path)
                    if not replies:
                        reply = Reply(404, b"not found")
                    elif len(replies) > 1:
                        reply = replies.pop(0)
                    else:
                        reply = replies[0]
                self.send_response(reply.status)
                if reply.content_type:
                    self.send_header("Content-Type", reply.content_type)
                for k, v in reply.headers.items():
                    self.send_header(k, v)
                self.send_header("Content-Length", str(len(reply.body)))
                self.end_headers()
                self.wfile.write(reply.body)

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.port = self.httpd.server_address[1]
        self.thread = threading.Thread(target=self.httpd.serve_forever, kwargs={"poll_interval": 0.02},
                                       daemon=True)

    def script(self, path, *replies):
        with self._lock:
            self.routes[path] = list(replies)

    def url(self, path, host="127.0.0.1"):
        return f"http://{host}:{self.port}{path}"

    def requests_for(self, path):
        return [p for _, p in self.log if urlsplit(p).path == path]

    def start(self):
        self.thread.start()

    def stop(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def server():
    srv = MockServer()
    srv.start()
    yield srv
    srv.stop()


@pytest.fixture
def session():
    s = make_session("blogfeeds-test/1.0")
    yield s
    s.close()


@pytest.fixture
def dead_url():
    """URL of a port nothing listens on."""
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    return f"http://127.0.0.1:{port}/"


class FakeClock:
    def __init__(self):
        self.waits = []

    def __call__(self, seconds):
        self.waits.append(seconds)


@pytest.fixture
def clock():
    return FakeClock()


def rss_doc(title="Blog", items=(), link="https://example.org", language="en-US",
            description="A blog", extra=""):
    """Small RSS 2.0 document; *items* are pre-rendered ``<item>`` strings."""
    parts = [f"<title>{title}</title>" if title is not None else "",
             f"<link>{link}</link>" if link is not None else "",
             f"<description>{description}</description>" if description is not None else "",
             f"<language>{language}</language>" if language is not None else "",
             extra]
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<rss version="2.0" xmlns:content="http://purl.org/rss/1.0/modules/content/" '
        'xmlns:dc="http://purl.org/dc/elements/1.1/">\n<channel>'
        + "".join(parts) + "".join(items) + "</channel></rss>\n"
    ).encode("utf-8")


XML = "application/rss+xml; charset=UTF-8"


def _page(*feed_hrefs):
    links = "".join(f'<link rel="alternate" type="application/rss+xml" href="{h}">'
                    for h in feed_hrefs)
    return f"<html><head>{links}</head><body><p>blog</p></body></html>".encode()


def build_blog_world(srv, broken_feed=False):
    """Script three blogs on *srv* and return the source CSV text.

    Blog one also links its comment feed. With *broken_feed* the third
    blog's feed answers 404.
    """
    item = ("<item><title>{t}</title><link>{base}/{slug}</link><guid>{base}/?p={slug}</guid>"
            "<pubDate>{d}</pubDate><category>{tag}</category>"
            "<description>Summary of {t}</description></item>")
    blogs = {
        "/one": ("Blog One", "en-US", [("Elections", "Wed, 16 Nov 2022 09:57:58 +0000", "politics"),
                                       ("Recount", "2022-12-30 10:00:00", "politics")]),
        "/two": ("Blog Two", "de", [("Wahlen", "2023-01-01 08:00:00", "politik")]),
        "/three": ("Blog Three", None, [("Untitled musings", "2023-03-05 12:00:00", "misc")]),
    }
    for path, (title, lang, posts) in blogs.items():
        base = srv.url(path)
        extra = ["/one/comments/feed/"] if path == "/one" else []
        srv.script(path + "/", Reply(body=_page(f"{path}/feed/", *extra)))
        items = [item.format(t=t, base=base, slug=i, d=d, tag=tag) for i, (t, d, tag) in enumerate(posts)]
        feed = rss_doc(title=title, link=base, language=lang, items=items)
        srv.script(path + "/feed/", Reply(404, b"gone") if broken_feed and path == "/three"
                   else Reply(body=feed, content_type=XML))
    comment = item.format(t="Re: Elections", base=srv.url("/one"), slug="0#comment-1",
                          d="2022-11-17 10:00:00", tag="politics")
    srv.script("/one/comments/feed/", Reply(body=rss_doc(title="Comments", items=[comment]),
                                            content_type=XML))
    return "url\n" + "\n".join(srv.url(p + "/") for p in blogs) + "\n"
