"""Command line entry point.

    guidepeak run <fig1..fig6|decode|validate> [--config FILE] [--out DIR] [--threads N]

Without ``--config`` the built-in parameters for the named experiment are
used. ``GUIDEPEAK_OUTPUT_DIR`` overrides the configured output directory;
``--out`` overrides both.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 protocol
failure (receivers disagree or a relay margin is not positive).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import FIGURES, default_config, load_config
from .errors import ConfigError, DomainError, NumericalToleranceError, UnsupportedSourceError
from .experiments import _clean, run_decode, run_figure, run_validate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PROTOCOL = 0, 2, 3, 4
TARGETS = FIGURES + ("decode", "validate")
ENV_OUTPUT = "GUIDEPEAK_OUTPUT_DIR"

log = logging.getLogger("guidepeak")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="guidepeak", description="Ubiquitous-peak waveguide simulations")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a figure or an experiment")
    run.add_argument("target", choices=TARGETS)
    run.add_argument("--config", type=Path, help="YAML or JSON config (default: built-in parameters)")
    run.add_argument("--out", type=Path, help="output directory")
    run.add_argument("--threads", type=int, help="worker threads for z sweeps")
    run.add_argument("-v", "--verbose", action="store_true")
    return p


def _resolve(args):
    cfg = load_config(args.config) if args.config else default_config(args.target)
    updates = {}
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        updates["threads"] = args.threads
    out = args.out or os.environ.get(ENV_OUTPUT) or cfg.output_dir
    updates["output_dir"] = str(out)
    return cfg.model_copy(update=updates)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _resolve(args)
        if args.target == "validate":
            report = run_validate(cfg)
            for w in report["warnings"]:
                log.warning(w)
            print(json.dumps(_clean(report), indent=2, sort_keys=True))
            return EXIT_OK
        out = Path(cfg.output_dir)
        if args.target == "decode":
            report, ok = run_decode(cfg, out)
            for msg in report["failures"]:
                print(f"decode failure: {msg}", file=sys.stderr)
            print(f"wrote {out / 'decode' / 'report.json'}")
            return EXIT_OK if ok else EXIT_PROTOCOL
        run_figure(args.target, cfg, out)
        print(f"wrote {out / args.target}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, UnsupportedSourceError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalToleranceError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
