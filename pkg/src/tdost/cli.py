"""Command-line interface.

Exit codes: 0 success, 2 configuration problems, 3 data problems,
4 external-service failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .augment import HttpChatClient, augment, load_cache, serialize_cache
from .config import load_config
from .errors import ConfigError, DataError, ServiceError
from .events import parse_log, serialize_log
from .layouts import SensorType, load_layout
from .pipeline import load_home, run_preprocess, run_transfer
from .render import Variant, render_window
from .report import render_all
from .resources import builtin_cache_text, builtin_layout
from .synth import FakeChatClient

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SERVICE = 4

log = logging.getLogger(__name__)


def _read_layout(value: str):
    if value.startswith("builtin:"):
        return builtin_layout(value.split(":", 1)[1])
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"layout file does not exist: {value}")
    return load_layout(path.read_text(encoding="utf-8"))


def _read_cache_text(value: str) -> str:
    if value.startswith("builtin:"):
        return builtin_cache_text(value.split(":", 1)[1])
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"cache file does not exist: {value}")
    return path.read_text(encoding="utf-8")


def _read_log(path_value: str, home: str, lenient: bool):
    path = Path(path_value)
    if not path.exists():
        raise ConfigError(f"log file does not exist: {path_value}")
    return parse_log(path.read_text(encoding="utf-8"), home, lenient=lenient)


def cmd_parse(args) -> int:
    events, summary = _read_log(args.log, args.home, args.lenient)
    if args.out:
        Path(args.out).write_text(serialize_log(events), encoding="utf-8")
    print(summary.to_json())
    return EXIT_OK


def cmd_layout_check(args) -> int:
    layout = _read_layout(args.layout)
    counts = {t.value: 0 for t in SensorType}
    for meta in layout.sensors.values():
        counts[meta.sensor_type.value] += 1
    print(
        json.dumps(
            {
                "home_id": layout.home_id,
                "residents": layout.residents,
                "sensors": len(layout.sensors),
                "by_type": {k: v for k, v in counts.items() if v},
            }
        )
    )
    return EXIT_OK


def cmd_render(args) -> int:
    events, _ = _read_log(args.log, args.home, args.lenient)
    layout = _read_layout(args.layout)
    variant = Variant(args.variant)
    lookup = None
    if variant.uses_cache:
        if not args.cache:
            raise ConfigError(f"variant {variant.value} needs --cache")
        lookup = load_cache(_read_cache_text(args.cache)).sentence_lookup()
    triggers = render_window(list(events.events), layout, variant, lookup)
    lines = [s for t in triggers for s in t.sentences]
    body = "".join(line + "\n" for line in lines)
    if args.out:
        Path(args.out).write_text(body, encoding="utf-8")
    else:
        sys.stdout.write(body)
    return EXIT_OK


def cmd_augment(args) -> int:
    events, _ = _read_log(args.log, args.home, args.lenient)
    layout = _read_layout(args.layout)
    cache = load_cache(_read_cache_text(args.cache)) if args.cache else load_cache("")
    if args.live:
        if args.fake_client:
            client = FakeChatClient(seed=args.seed)
        else:
            if not args.endpoint or not args.model:
                raise ConfigError("--live needs --endpoint and --model")
            client = HttpChatClient(endpoint=args.endpoint, model=args.model)
        report = augment(events.events, layout, cache, offline=False, client=client)
    else:
        report = augment(events.events, layout, cache, offline=True)
    if args.out_cache:
        Path(args.out_cache).write_text(serialize_cache(cache), encoding="utf-8")
    print(
        json.dumps(
            {
                "distinct_keys": report.distinct_keys,
                "cache_hits": report.cache_hits,
                "prompts_issued": report.prompts_issued,
                "new_entries": report.new_entries,
            }
        )
    )
    return EXIT_OK


def _load_config_file(path_value: str):
    path = Path(path_value)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path_value}")
    return load_config(path.read_text(encoding="utf-8"))


def cmd_windows(args) -> int:
    config = _load_config_file(args.config)
    result = run_preprocess(config, args.home)
    print(
        json.dumps(
            {
                "dataset": str(result.dataset_path),
                "manifest": str(result.manifest_path),
                "windows": result.manifest["counts"]["windows"],
                "discarded_events": result.manifest["counts"]["discarded_events"],
            }
        )
    )
    return EXIT_OK


def cmd_export(args) -> int:
    config = _load_config_file(args.config)
    config.validate(allow_within_home=args.allow_within_home)
    out = {}
    for home_id in dict.fromkeys((config.source, *config.targets)):
        result = run_preprocess(config, home_id)
        out[home_id] = {
            "dataset": str(result.dataset_path),
            "manifest": str(result.manifest_path),
        }
    print(json.dumps(out))
    return EXIT_OK


def cmd_transfer(args) -> int:
    config = _load_config_file(args.config)
    config.validate(allow_within_home=args.allow_within_home)
    report = run_transfer(config, allow_within_home=args.allow_within_home)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(report.to_json(), encoding="utf-8")
    rendered = render_all(report.to_json(), out_dir)
    sys.stdout.write(rendered["table"])
    print(f"report: {report_path}")
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.report)
    if not path.exists():
        raise ConfigError(f"report file does not exist: {args.report}")
    rendered = render_all(path.read_text(encoding="utf-8"), Path(args.out_dir))
    sys.stdout.write(rendered["table"])
    for figure in rendered["figure_paths"]:
        print(f"figure: {figure}")
    print(f"csv: {rendered['csv_path']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdost",
        description="Verbalize smart-home sensor logs and evaluate "
        "layout-agnostic activity recognition transfer.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a raw event log and print a summary")
    p.add_argument("--log", required=True)
    p.add_argument("--home", required=True)
    p.add_argument("--lenient", action="store_true", help="skip malformed lines")
    p.add_argument("--out", help="write the normalized log here")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("layout-check", help="validate a layout document")
    p.add_argument("--layout", required=True, help="path or builtin:<name>")
    p.set_defaults(func=cmd_layout_check)

    p = sub.add_parser("render", help="render a log's trigger sentences")
    p.add_argument("--log", required=True)
    p.add_argument("--home", required=True)
    p.add_argument("--layout", required=True, help="path or builtin:<name>")
    p.add_argument("--variant", default="basic", choices=[v.value for v in Variant])
    p.add_argument("--cache", help="sentence cache (path or builtin:<name>)")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out", help="write sentences here instead of stdout")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("augment", help="check or extend a sentence cache")
    p.add_argument("--log", required=True)
    p.add_argument("--home", required=True)
    p.add_argument("--layout", required=True)
    p.add_argument("--cache", help="existing cache to start from")
    p.add_argument("--live", action="store_true", help="issue prompts for missing keys")
    p.add_argument("--endpoint", help="chat-completions URL for --live")
    p.add_argument("--model", help="model name for --live")
    p.add_argument("--fake-client", action="store_true",
                   help="use the deterministic offline paraphraser instead of HTTP")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out-cache", help="write the merged cache here")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("windows", help="segment and export one home's dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--home", required=True)
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("export", help="export datasets for source and targets")
    p.add_argument("--config", required=True)
    p.add_argument("--allow-within-home", action="store_true")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("transfer", help="run the transfer evaluation")
    p.add_argument("--config", required=True)
    p.add_argument("--allow-within-home", action="store_true",
                   help="permit a target equal to the source")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("report", help="render tables, CSV and figures from a report")
    p.add_argument("--report", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ServiceError as exc:
        print(f"service error: {exc}", file=sys.stderr)
        return EXIT_SERVICE


if __name__ == "__main__":
    sys.exit(main())
