"""Command-line entry point: ``diraclab <command> --config run.json``.

Exit codes: 0 success, 1 oracle non-convergence, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from diraclab import __version__
from diraclab.catalog import Variant
from diraclab.config import ConfigError, RunConfig, load_config, parse_config
from diraclab.report import (
    crossings_report,
    metadata,
    render,
    scan_report,
    spectrum_report,
    spectrum_rows,
    susy_report,
)

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--format", choices=("json", "csv"), help="output format (default: config or json)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--verify", action="store_true", default=None,
                        help="attach finite-difference oracle residuals")
    common.add_argument("--tol", type=float, help="oracle relative tolerance")

    parser = argparse.ArgumentParser(prog="diraclab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"diraclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="closed-form spectrum over the label grid")
    sub.add_parser("crossings", parents=[common], help="energy-level crossing atlas")
    sub.add_parser("susy", parents=[common], help="partner-spectrum signatures of the toy models")
    sub.add_parser("scan", parents=[common], help="spectrum along one parameter axis")
    v = sub.add_parser("verify", parents=[common], help="oracle-only rerun of a prior JSON report")
    v.add_argument("--report", help="JSON report whose embedded config is re-verified")
    return parser


def _config_from_args(args) -> RunConfig:
    if args.command == "verify" and args.report:
        try:
            doc = json.loads(Path(args.report).read_text())
            cfg = parse_config(doc["metadata"]["config"])
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot re-ingest report {args.report}: {exc}") from exc
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise ConfigError("--config is required")
    return cfg.with_overrides(format=args.format, out=args.out, verify=args.verify, tol=args.tol)


def _verify_document(cfg: RunConfig) -> tuple[dict, int]:
    rows, excluded, failures = spectrum_rows(cfg, verify=True)
    keep = ("n_r", "ell", "j", "kappa", "q", "branch", "E_re", "lambda_re", "classification",
            "oracle_rel_residual", "oracle_converged", "oracle_diagnostic")
    rows = [{k: r[k] for k in keep} for r in rows if r["classification"] == "RealBound"]
    meta = metadata(cfg, "verify", excluded_states=excluded, oracle_failures=failures)
    return {"metadata": meta, "rows": rows}, failures


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    failures = 0
    try:
        cfg = _config_from_args(args)
        if args.command == "spectrum":
            doc, failures = spectrum_report(cfg)
        elif args.command == "crossings":
            doc = crossings_report(cfg)
        elif args.command == "susy":
            if cfg.model not in (Variant.OscillatorToy, Variant.CoulombToy):
                raise ConfigError("susy needs model OscillatorToy or CoulombToy")
            doc = susy_report(cfg)
        elif args.command == "scan":
            try:
                doc = scan_report(cfg)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        else:
            doc, failures = _verify_document(cfg)
    except ConfigError as exc:
        print(f"diraclab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(doc, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text, newline="")
    else:
        sys.stdout.write(text)
    if failures:
        print(f"diraclab: {failures} level(s) failed oracle verification", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
