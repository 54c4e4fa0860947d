"""Exception types raised by the pipeline stages.

Per-item failures subclass ``ValueError`` so callers that only care about
"this feed could not be processed" can catch a single builtin.
"""


class BlogFeedsError(Exception):
    """Base class for all errors raised by this package."""


class InputError(BlogFeedsError):
    """An input file or directory is missing or unreadable."""


class ConfigError(BlogFeedsError):
    """Invalid configuration value."""


class FeedFormatError(BlogFeedsError, ValueError):
    """Discovery JSON does not have the expected shape."""


class FetchError(BlogFeedsError, ValueError):
    """A feed could not be downloaded."""

    def __init__(self, url, reason):
        super().__init__(f"{url}: {reason}")
        self.url = url
        self.reason = reason


class PermanentFetchError(FetchError):
    """The server answered with a client error (4xx); never retried."""

    def __init__(self, url, status):
        super().__init__(url, f"client error {status}")
        self.status = status


class RetriesExhaustedError(FetchError):
    """Every allowed attempt failed with a server error or transport failure."""

    def __init__(self, url, attempts, last_status=None, last_error=None):
        if last_status is not None:
            last = f"status {last_status}"
        else:
            last = f"transport failure ({last_error})"
        super().__init__(url, f"gave up after {attempts} attempts, last: {last}")
        self.attempts = attempts
        self.last_status = last_status
        self.last_error = last_error


class ContentTypeError(FetchError):
    """The response was not an XML document."""

    def __init__(self, url, content_type):
        super().__init__(url, f"content type is not XML: {content_type!r}")
        self.content_type = content_type


class StorageError(BlogFeedsError):
    """A snapshot could not be written."""


class FeedParseError(BlogFeedsError, ValueError):
    """The snapshot is not well-formed XML."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(BlogFeedsError, ValueError):
    """Well-formed XML whose root is neither RSS 2.0 nor Atom."""
