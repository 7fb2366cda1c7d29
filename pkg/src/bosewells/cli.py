"""Command-line entry point.

Subcommands: ``run`` (a config file or manifest), ``preset`` (packaged
experiment definitions), ``metrics`` (compare two observable CSVs), and
``dump-config-schema``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 completed but flagged unreliable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import metrics as metrics_mod
from .config import (PRESET_NAMES, ConfigError, load_config, load_preset,
                     schema_text)
from .experiment import NumericFailure, run_experiment


def _read_series(path: str, column: str | None):
    try:
        with open(path) as f:
            header = f.readline().strip().split(",")
            data = np.loadtxt(f, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if column is None:
        candidates = [c for c in header
                      if c not in ("t", "t_plasma_periods")]
        if not candidates:
            raise ConfigError(f"{path}: no observable column")
        column = candidates[0]
    if column not in header:
        raise ConfigError(f"{path}: no column {column!r} "
                          f"(have {', '.join(header)})")
    return data[:, header.index("t")], data[:, header.index(column)]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bosewells",
        description="Exact, mean-field, truncated-Wigner and semiclassical "
                    "dynamics of bosons in double- and triple-well traps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config (.ini) or "
                                       "re-run a manifest (.json)")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=None,
                       help="override [run] workers")
    p_run.add_argument("--output", default=None,
                       help="override the output directory name")

    p_preset = sub.add_parser("preset", help="run a packaged experiment")
    p_preset.add_argument("name", choices=PRESET_NAMES)
    p_preset.add_argument("--workers", type=int, default=None)
    p_preset.add_argument("--output", default=None)
    p_preset.add_argument("--set", action="append", default=[],
                          metavar="SECTION.KEY=VALUE",
                          help="override a config entry, e.g. "
                               "--set hk.samples=1000")

    p_met = sub.add_parser("metrics", help="compare two observable CSVs on "
                                           "a common time grid")
    p_met.add_argument("csv_a")
    p_met.add_argument("csv_b")
    p_met.add_argument("--column", default=None,
                       help="observable column (default: first non-time)")
    p_met.add_argument("--window", nargs=2, type=float, default=None,
                       metavar=("T0", "T1"))

    sub.add_parser("dump-config-schema", help="print the config grammar")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except NumericFailure as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 3


def _apply_overrides(text: str, overrides: list[str]) -> str:
    import configparser
    import io
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.read_string(text)
    for item in overrides:
        try:
            key_path, value = item.split("=", 1)
            section, key = key_path.split(".", 1)
        except ValueError as exc:
            raise ConfigError(f"bad --set {item!r}; use SECTION.KEY=VALUE") \
                from exc
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section.strip(), key.strip(), value.strip())
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def _dispatch(args) -> int:
    if args.command == "dump-config-schema":
        print(schema_text(), end="")
        return 0

    if args.command == "metrics":
        ta, a = _read_series(args.csv_a, args.column)
        tb, b = _read_series(args.csv_b, args.column)
        if len(ta) != len(tb) or np.max(np.abs(ta - tb)) > 1e-12:
            raise ConfigError("the two CSVs do not share a time grid")
        window = tuple(args.window) if args.window else None
        result = metrics_mod.compare_metrics(ta, a, b, window=window)
        print(json.dumps(result, indent=1, sort_keys=True))
        return 0

    if args.command == "run":
        config = load_config(args.config)
    else:
        config = load_preset(args.name)
        if args.set:
            from .config import parse_config
            config = parse_config(_apply_overrides(config.config_text,
                                                   args.set),
                                  default_output=args.name)
    if args.workers is not None:
        config = __import__("dataclasses").replace(config,
                                                   workers=args.workers)
    if args.output is not None:
        config = __import__("dataclasses").replace(config,
                                                   output=args.output)
    out, manifest = run_experiment(config)
    for flag in manifest["flags"]:
        print(f"flagged: {flag}", file=sys.stderr)
    print(f"wrote {len(manifest['files']) + 1} files to {out}")
    return manifest.get("exit_code", 0)


if __name__ == "__main__":
    sys.exit(main())
