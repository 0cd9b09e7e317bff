"""Command-line entry point.

    pwmaxwell run <config.json>    execute the sweep, write CSV (+figure)
    pwmaxwell verify <config.json> run the invariant suite for the config

Overrides: --quad-order N forces the face-quadrature order, --threads N
runs sweep triples concurrently, --output PATH redirects the CSV, and
--no-figure skips the convergence plot.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .report import render_convergence_figure
from .runner import emit_csv, parse_config, run_experiment, verify_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pwmaxwell",
        description="Plane-wave least-squares experiments for time-harmonic Maxwell",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a config and write the CSV table")
    run.add_argument("config", help="path to a JSON experiment config")
    run.add_argument("--quad-order", type=int, default=None,
                     help="override the face-quadrature order (points per direction)")
    run.add_argument("--threads", type=int, default=1,
                     help="number of sweep triples to run concurrently")
    run.add_argument("--output", default=None, help="override the CSV output path")
    run.add_argument("--no-figure", action="store_true",
                     help="skip the convergence figure")

    ver = sub.add_parser("verify", help="run the invariant suite for a config")
    ver.add_argument("config", help="path to a JSON experiment config")
    ver.add_argument("--quad-order", type=int, default=None,
                     help="override the face-quadrature order")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr
    )
    args = _build_parser().parse_args(argv)
    try:
        config = parse_config(args.config)
    except (ValueError, OSError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.quad_order is not None:
        config = replace(config, quadrature_override=args.quad_order)

    if args.command == "verify":
        checks = verify_config(config)
        failed = 0
        for name, ok, detail in checks:
            print(f"{'PASS' if ok else 'FAIL'}  {name} ({detail})")
            failed += not ok
        return 1 if failed else 0

    if args.output is not None:
        config = replace(config, output_path=args.output)
    try:
        rows = run_experiment(config, threads=max(1, args.threads))
    except (ValueError, OSError) as exc:
        # bad or missing reference solution file: a config-level error,
        # unlike per-triple solver failures which land in the rows
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = emit_csv(rows, config.output_path, metric=config.metric)
    print(f"wrote {out}")
    if not args.no_figure:
        fig = render_convergence_figure(
            rows, Path(config.output_path).with_suffix(".png"), metric=config.metric
        )
        if fig is not None:
            print(f"wrote {fig}")
    bad = [r for r in rows if r.status != "ok"]
    if bad:
        print(f"{len(bad)} of {len(rows)} triples failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
