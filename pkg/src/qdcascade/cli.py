"""Command-line entry point: ``qdcascade {flux,scan,g2map,gated,probe-loss}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .experiments import COMMANDS, ExperimentConfig, parse_area


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdcascade",
        description="Simulate a two-level emitter driven by a laser pulse and by its own photon.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment configuration (defaults otherwise)")
        p.add_argument("--area", help="pulse area in rad, e.g. 3.14159 or 2pi")
        p.add_argument("--out", help="output directory")
        p.add_argument("--no-jitter", action="store_true", help="skip the detector-jitter convolution")
    return parser


def resolve_config(args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.area is not None:
        config = replace(config, pulse=replace(config.pulse, area=parse_area(args.area)))
    if args.out is not None:
        config = replace(config, output_dir=args.out)
    if args.no_jitter:
        config = replace(config, apply_jitter=False)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        config = resolve_config(args)
        files = COMMANDS[args.command](config)
    except Exception as exc:  # reported as a structured message, never a traceback
        err = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
