"""Command line entry point: ``blogfeeds <stage> ...``.

Exit codes: 0 success, 1 partial failure (per-item errors, outputs
written), 2 fatal input/config error or bad usage.
"""

import argparse
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone

from . import __version__
from .analytics import (
    QualityThresholds,
    inclusion_rates,
    quality_flags,
    tags_over_time,
    write_timeline_csv,
)
from .config import PipelineConfig, load_config
from .converter import (
    RECORD_ID_SCHEME,
    NormalizedRecord,
    dump_parsed,
    dump_records,
    load_parsed,
    parse_rss_dump,
    run_convert,
)
from .discovery import load_manual_additions, run_discovery, write_discovery_json
from .errors import BlogFeedsError
from .fetcher import run_fetch
from .languages import TABLE_VERSION
from .net import make_session

logger = logging.getLogger("blogfeeds")

EXIT_OK, EXIT_PARTIAL, EXIT_FATAL = 0, 1, 2


class JsonLineFormatter(logging.Formatter):
    def format(self, record):
        entry = {
            "ts": datetime.fromtimestamp(record.created, timezone.utc).isoformat(timespec="seconds"),
            "level": record.levelname.lower(),
            "logger": record.name,
            "msg": record.getMessage(),
        }
        if record.exc_info:
            entry["exc"] = self.formatException(record.exc_info)
        return json.dumps(entry, ensure_ascii=False)


def _setup_logging(level):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLineFormatter())
    root = logging.getLogger("blogfeeds")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def _write_json(obj, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def _summary_path(output):
    if os.path.isdir(output):
        return os.path.join(output, "run_summary.json")
    stem, _ = os.path.splitext(output)
    return stem + ".summary.json"


# stages: each returns (exit code, summary dict)

def stage_discover(input_csv, output, config, manual=None, session=None):
    session = session or make_session(config.user_agent, config.max_concurrency)
    additions = load_manual_additions(manual) if manual else []
    rejected = []
    records = run_discovery(input_csv, session, additions, timeout=config.timeout_secs,
                            max_concurrency=config.max_concurrency, rejected=rejected)
    write_discovery_json(records, output)
    unreachable = [r.url for r in records if r.status is None]
    summary = {
        "sources": len(records),
        "with_feeds": sum(1 for r in records if r.rss_links),
        "feed_links": sum(len(r.rss_links) for r in records),
        "dead": sum(1 for r in records if r.status is None or not 200 <= r.status < 400),
        "rejected_rows": [{"row": n, "value": v} for n, v in rejected],
        "unreachable": unreachable,
    }
    code = EXIT_PARTIAL if rejected or unreachable else EXIT_OK
    return code, summary


def stage_fetch(discovery_json, out_dir, config, session=None, sleep=time.sleep):
    session = session or make_session(config.user_agent, config.max_concurrency)
    result = run_fetch(discovery_json, out_dir, config.seed, client=session,
                       timeout=config.timeout_secs, waits=config.retry_waits,
                       max_concurrency=config.max_concurrency, sleep=sleep)
    return (EXIT_PARTIAL if result.errors else EXIT_OK), result.summary()


def stage_convert(snapshot_dir, records_out, comments_out=None, parsed_out=None):
    result = run_convert(snapshot_dir)
    dump_records(result.records, records_out)
    base = os.path.dirname(os.path.abspath(records_out))
    dump_records(result.comments, comments_out or os.path.join(base, "comments.json"))
    dump_parsed(result.parsed, parsed_out or os.path.join(base, "parsed.json"))
    summary = {
        "feeds": len(result.parsed),
        "records": len(result.records),
        "comment_records": len(result.comments),
        "skipped": [{"filename": f, "reason": r} for f, r in result.skipped],
    }
    return (EXIT_PARTIAL if result.skipped else EXIT_OK), summary


def _load_corpus(path):
    """Parsed corpus or normalized records from a snapshot dir or JSON file.

    Returns ``("parsed", [...])`` or ``("records", [...])``.
    """
    if os.path.isdir(path):
        return "parsed", parse_rss_dump(path)
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise BlogFeedsError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, list):
        raise BlogFeedsError(f"{path}: expected a JSON array")
    if data and "kind" in data[0]:
        return "records", [NormalizedRecord.from_dict(d) for d in data]
    return "parsed", load_parsed(path)


def stage_analyze(what, records_path, out, config, keys=None):
    kind, corpus = _load_corpus(records_path)
    if what == "timeline":
        timeline = tags_over_time(corpus if kind == "records"
                                  else [e for _, entries in corpus for e in entries], keys)
        write_timeline_csv(timeline, out)
        return EXIT_OK, {"rows": len(timeline), "undated_entries": timeline.undated}
    if kind != "parsed":
        raise BlogFeedsError(
            f"'analyze {what}' needs the parsed corpus (parsed.json or a snapshot "
            f"directory), not converted records")
    if what == "inclusion":
        report = {level: inclusion_rates(corpus, level).to_dict() for level in ("feed", "entry")}
        _write_json(report, out)
        return EXIT_OK, {"feeds": report["feed"]["denominator"],
                         "entries": report["entry"]["denominator"]}
    limits = QualityThresholds(config.max_subtitle_chars, config.max_title_chars)
    flags = quality_flags(corpus, limits)
    _write_json([f.to_dict() for f in flags], out)
    return EXIT_OK, {"flags": len(flags)}


def stage_pipeline(input_csv, out_dir, config, manual=None, session=None, sleep=time.sleep):
    os.makedirs(out_dir, exist_ok=True)
    session = session or make_session(config.user_agent, config.max_concurrency)
    p = lambda name: os.path.join(out_dir, name)  # noqa: E731
    stages = {}
    code, stages["discover"] = stage_discover(input_csv, p("discovery.json"), config,
                                              manual, session)
    worst = code
    code, stages["fetch"] = stage_fetch(p("discovery.json"), p("snapshots"), config,
                                        session, sleep)
    worst = max(worst, code)
    code, stages["convert"] = stage_convert(p("snapshots"), p("records.json"),
                                            p("comments.json"), p("parsed.json"))
    worst = max(worst, code)
    for what, name in (("inclusion", "inclusion_report.json"),
                       ("quality", "quality_flags.json"),
                       ("timeline", "topics_over_time.csv")):
        source = p("records.json") if what == "timeline" else p("parsed.json")
        _, stages[f"analyze_{what}"] = stage_analyze(what, source, p(name), config)
    return worst, stages


def _add_net_flags(sp):
    sp.add_argument("--timeout-secs", type=float)
    sp.add_argument("--user-agent")
    sp.add_argument("--max-concurrency", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="blogfeeds", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version", action="version",
        version=f"blogfeeds {__version__} (language table {TABLE_VERSION}, "
                f"record ids {RECORD_ID_SCHEME})")
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("discover", help="find feeds advertised by a list of blog URLs")
    sp.add_argument("--input", required=True, help="CSV, first column = URL")
    sp.add_argument("--manual", help="CSV of (source_url, feed_url) additions")
    sp.add_argument("--output", required=True, help="discovery JSON to write")
    _add_net_flags(sp)

    sp = sub.add_parser("fetch", help="download all discovered feeds once")
    sp.add_argument("--input", required=True, help="discovery JSON")
    sp.add_argument("--out", required=True, help="snapshot directory")
    sp.add_argument("--seed", type=int)
    _add_net_flags(sp)

    sp = sub.add_parser("convert", help="parse snapshots into bibliographic records")
    sp.add_argument("--snapshots", required=True)
    sp.add_argument("--out", required=True, help="records.json to write")
    sp.add_argument("--comments-out")
    sp.add_argument("--parsed-out")

    sp = sub.add_parser("analyze", help="inclusion rates, quality flags or tag timeline")
    sp.add_argument("report", choices=["inclusion", "quality", "timeline"])
    sp.add_argument("--records", required=True,
                    help="parsed.json, records.json (timeline only) or a snapshot dir")
    sp.add_argument("--keys", help="comma-separated timeline keys")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("pipeline", help="discover, fetch, convert and analyze in one go")
    sp.add_argument("--input", required=True)
    sp.add_argument("--manual")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--seed", type=int)
    _add_net_flags(sp)
    return parser


def _config_from(args):
    config = load_config(args.config) if args.config else PipelineConfig()
    return config.updated(
        timeout_secs=getattr(args, "timeout_secs", None),
        user_agent=getattr(args, "user_agent", None),
        max_concurrency=getattr(args, "max_concurrency", None),
        seed=getattr(args, "seed", None),
    )


def _run(args, config):
    if args.command == "discover":
        return args.output, stage_discover(args.input, args.output, config, args.manual)
    if args.command == "fetch":
        return args.out, stage_fetch(args.input, args.out, config)
    if args.command == "convert":
        return args.out, stage_convert(args.snapshots, args.out, args.comments_out,
                                       args.parsed_out)
    if args.command == "analyze":
        keys = [k.strip() for k in args.keys.split(",") if k.strip()] if args.keys else None
        return args.out, stage_analyze(args.report, args.records, args.out, config, keys)
    return args.out, stage_pipeline(args.input, args.out, config, args.manual)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_FATAL
    _setup_logging(args.log_level)
    started = time.monotonic()
    try:
        config = _config_from(args)
        output, (code, summary) = _run(args, config)
    except BlogFeedsError as exc:
        logger.error("%s", exc)
        return EXIT_FATAL
    summary = {
        "command": args.command,
        "exit_code": code,
        "duration_secs": round(time.monotonic() - started, 3),
        **summary,
    }
    _write_json(summary, _summary_path(output))
    logger.info("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
