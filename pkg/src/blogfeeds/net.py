"""HTTP session setup and per-host politeness primitives."""

import threading
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import requests
from requests.adapters import HTTPAdapter

from .urls import host_key

MAX_REDIRECTS = 5


def make_session(user_agent, pool_size=10):
    session = requests.Session()
    session.headers["User-Agent"] = user_agent
    session.max_redirects = MAX_REDIRECTS
    # retries are handled by the caller, never by urllib3
    adapter = HTTPAdapter(max_retries=0, pool_maxsize=pool_size)
    session.mount("http://", adapter)
    session.mount("https://", adapter)
    return session


class HostGate:
    """Allows at most one in-flight request per host."""

    def __init__(self):
        self._locks = defaultdict(threading.Lock)
        self._guard = threading.Lock()

    @contextmanager
    def hold(self, url):
        key = host_key(url)
        with self._guard:
            lock = self._locks[key]
        with lock:
            yield


def map_polite(func, items, max_concurrency, url_of=None):
    """Apply *func* to every item, results in input order.

    Runs up to *max_concurrency* calls at once, never two for the same host.
    *url_of* extracts the URL from an item (items are URLs by default).
    """
    gate = HostGate()
    url_of = url_of or (lambda item: item)

    def call(item):
        with gate.hold(url_of(item)):
            return func(item)

    if max_concurrency <= 1 or len(items) <= 1:
        return [call(i) for i in items]
    with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
        return list(pool.map(call, items))
