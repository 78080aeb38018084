"""mnlab <command> --config <path> [--refine] [--seed N] [--out <path>]

Exit codes: 0 success, 1 acceptance failure, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

from mnlab.config import COMMANDS, ConfigError, load_config
from mnlab.experiments import SCHEMA_VERSION, Report, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


def _jsonable(x):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float):
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
    if hasattr(x, "item") and callable(x.item):
        return _jsonable(x.item())
    return x


def render(report: Report, generated_at: str | None = None) -> str:
    """CSV with a timestamp line, schema and config comments; or indented JSON.

    Everything except the timestamp line is a function of config and seed.
    """
    stamp = generated_at or _timestamp()
    if report.fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION, "generated_at": stamp, "config": report.config,
            "ok": report.ok, "failures": report.failures, "result": report.result,
        }
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# generated {stamp}\n")
    buf.write(f"# schema_version {SCHEMA_VERSION}\n")
    buf.write(f"# config {json.dumps(_jsonable(report.config), sort_keys=True)}\n")
    if report.result:
        buf.write(f"# result {json.dumps(_jsonable(report.result), sort_keys=True)}\n")
    buf.write(f"# ok {_fmt(report.ok)}\n")
    for msg in report.failures:
        buf.write(f"# failure {msg}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_fmt(row.get(c, "")) for c in report.columns])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mnlab", description="Mixed-norm and paraproduct numerical experiments.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--refine", action="store_true", help="double every grid")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config, args.command)
        cfg.refine = args.refine
        if args.seed is not None:
            cfg.seed = args.seed
        cfg.out = args.out
        report = run(cfg)
    except ConfigError as exc:
        print(f"mnlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"mnlab: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for msg in report.failures:
        print(f"mnlab: acceptance failure: {msg}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
