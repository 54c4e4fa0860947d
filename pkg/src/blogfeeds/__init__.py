"""Feed discovery, snapshotting and conversion for blog collections."""

__version__ = "0.1.0"

from .analytics import inclusion_rates, quality_flags, tags_over_time  # noqa: E402
from .converter import (  # noqa: E402
    NormalizedRecord,
    convert_entry,
    convert_feed,
    parse_rss_dump,
    split_comments,
)
from .discovery import (  # noqa: E402
    DiscoveryRecord,
    SourceUrl,
    discover_feeds_fallback,
    discover_feeds_strict,
    load_url_list,
    normalize_and_dedupe,
    probe_url,
    run_discovery,
)
from .fetcher import (  # noqa: E402
    FetchMetadata,
    FetchRunResult,
    extract_feed_urls,
    get,
    load_rss,
    politeness_order,
    run_fetch,
)
from .languages import get_languages  # noqa: E402
from .parser import EntryRecord, FeedRecord, parse_feed_document  # noqa: E402
from .text import parse_datetime, strip_markup  # noqa: E402

__all__ = [
    "DiscoveryRecord", "EntryRecord", "FeedRecord", "FetchMetadata", "FetchRunResult",
    "NormalizedRecord", "SourceUrl", "__version__", "convert_entry", "convert_feed",
    "discover_feeds_fallback", "discover_feeds_strict", "extract_feed_urls", "get",
    "get_languages", "inclusion_rates", "load_rss", "load_url_list", "normalize_and_dedupe",
    "parse_datetime", "parse_feed_document", "parse_rss_dump", "politeness_order", "probe_url",
    "quality_flags", "run_discovery", "run_fetch", "split_comments", "strip_markup",
    "tags_over_time",
]
