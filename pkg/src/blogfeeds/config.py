"""Pipeline configuration and the flat ``key = value`` config file format.

Example file::

    # blogfeeds.conf
    timeout_secs = 20
    user_agent = my-crawler/1.0 (+mailto:ops@example.org)
    max_concurrency = 4
    retry_waits = 5, 15
    seed = 7
"""

from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError, InputError

DEFAULT_USER_AGENT = "blogfeeds/0.1 (+https://example.org/blogfeeds)"


@dataclass(frozen=True)
class PipelineConfig:
    timeout_secs: float = 30.0
    user_agent: str = DEFAULT_USER_AGENT
    max_concurrency: int = 4
    retry_waits: tuple = (5.0, 15.0)
    seed: int = 0
    max_subtitle_chars: int = 300
    max_title_chars: int = 200
    output_dir: str = field(default=".")

    def __post_init__(self):
        if self.timeout_secs <= 0:
            raise ConfigError("timeout_secs must be positive")
        if self.max_concurrency < 1:
            raise ConfigError("max_concurrency must be at least 1")
        if len(self.retry_waits) != 2 or any(w <= 0 for w in self.retry_waits):
            raise ConfigError("retry_waits must be two positive durations")
        if self.max_subtitle_chars < 1 or self.max_title_chars < 1:
            raise ConfigError("quality thresholds must be positive")

    def updated(self, **overrides):
        """Copy with the non-None *overrides* applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _convert(name, raw):
    try:
        if name in ("timeout_secs",):
            return float(raw)
        if name in ("max_concurrency", "seed", "max_subtitle_chars", "max_title_chars"):
            return int(raw)
        if name == "retry_waits":
            return tuple(float(p) for p in raw.split(","))
    except ValueError:
        raise ConfigError(f"invalid value for {name}: {raw!r}") from None
    return raw


def parse_config(text, base=None):
    """Parse config *text* on top of *base* (defaults when omitted)."""
    known = {f.name for f in fields(PipelineConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return replace(base or PipelineConfig(), **values)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
