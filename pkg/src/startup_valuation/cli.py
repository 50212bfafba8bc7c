"""Command-line entry point.

Examples::

    startup-valuation rank manifest.json --out out/
    startup-valuation value manifest.json --countries MX,BR --format json
    startup-valuation sweep manifest.json --jobs 4
    startup-valuation replicate-paper
"""

from __future__ import annotations

import argparse
import filecmp
import logging
import sys
import tempfile
from pathlib import Path

from .errors import ConfigError, IoError, ValuationError
from .pipeline import data_dir, load_manifest, run_pipeline, sensitivity_sweep, write_sweep

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4


def _countries(text: str | None):
    if not text:
        return None
    return tuple(c.strip().upper() for c in text.split(",") if c.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="startup-valuation", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, manifest=True):
        if manifest:
            p.add_argument("manifest", help="run manifest (JSON)")
        p.add_argument("--out", help="output directory (default: manifest output_dir)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--countries", help="comma-separated ISO codes, e.g. MX,BR")
        p.add_argument("--jobs", type=int, default=1, help="worker threads for per-country evaluation")

    common(sub.add_parser("rank", help="normalize indicators and rank countries"))
    common(sub.add_parser("size", help="compute TAM/SAM/SOM funnels"))
    common(sub.add_parser("value", help="rank, size and value"))
    common(sub.add_parser("sweep", help="sensitivity sweep over scenario fields"))
    rp = sub.add_parser("replicate-paper", help="run the bundled fixtures and diff against golden outputs")
    common(rp, manifest=False)
    return parser


def _replicate(args) -> int:
    root = data_dir() / "paper"
    golden = root / "golden"
    out = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="replicate-"))
    manifest = load_manifest(root / "manifest.json")
    result = run_pipeline(manifest, "value", "csv", args.jobs, out)
    produced = {p.name for p in result.files}
    expected = {p.name for p in golden.iterdir() if p.is_file()}
    failures = 0
    for name in sorted(produced | expected):
        if name not in expected:
            status = "EXTRA"
        elif name not in produced:
            status = "MISSING"
        elif filecmp.cmp(out / name, golden / name, shallow=False):
            status = "PASS"
        else:
            status = "FAIL"
        failures += status != "PASS"
        print(f"{status:8s} {name}")
    print(f"{len(produced | expected) - failures} of {len(produced | expected)} files match golden output in {out}")
    return EXIT_OK if failures == 0 else EXIT_MISMATCH


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "replicate-paper":
            return _replicate(args)
        manifest = load_manifest(args.manifest)
        countries = _countries(args.countries)
        if args.command == "sweep":
            names, rows = sensitivity_sweep(manifest, args.jobs, countries)
            path = write_sweep(names, rows, args.out or manifest.output_dir, args.format)
            print(path)
            return EXIT_OK
        result = run_pipeline(manifest, args.command, args.format, args.jobs, args.out, countries)
        for path in result.files:
            print(path)
        for o in result.outcomes:
            if o.status != "ok":
                print(f"{o.country}: {o.status}{' (' + o.note + ')' if o.note else ''}", file=sys.stderr)
        return EXIT_OK
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValuationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
