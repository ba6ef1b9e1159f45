"""Command line interface.

One subcommand per experiment plus ``plot``.  Flags override config-file
values; the worker budget falls back to the BBMX_WORKERS environment
variable.  Exit status is nonzero if any executed check fails or an error
occurs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bbm import PopulationCapError
from .config import KNOWN_EXPERIMENTS, ConfigError, ExperimentConfig, parse_config_text
from .experiments import resolve_workers, run
from .reporting import PLOT_KINDS, emit_plot_data, read_csv, render_figure


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbmx",
        description="Monte Carlo toolkit for branching Brownian motion extremes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in KNOWN_EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, default=None, help="key=value config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--replicas", type=int, default=None)
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument(
            "--param",
            "-p",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a single config parameter (repeatable)",
        )
    p = sub.add_parser("plot", help="emit plot tables and figures from a run")
    p.add_argument("--run", type=Path, required=True, help="run directory with data.csv")
    p.add_argument("--kind", choices=PLOT_KINDS, required=True)
    p.add_argument("--column", default=None, help="data column to plot (default: last)")
    p.add_argument("--y-column", default=None, help="second column for scatter")
    return parser


def _experiment_config(args) -> ExperimentConfig:
    mapping: dict[str, str] = {}
    if args.config is not None:
        mapping = parse_config_text(Path(args.config).read_text())
    for item in args.param:
        if "=" not in item:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        k, _, v = item.partition("=")
        mapping[k.strip()] = v.strip()
    return ExperimentConfig.from_mapping(
        mapping,
        experiment=args.command,
        seed=args.seed,
        replicas=args.replicas,
        out_dir=args.out,
        workers=resolve_workers(args.workers) if args.workers is not None else None,
    )


def _cmd_plot(args) -> int:
    data = Path(args.run) / "data.csv"
    if not data.exists():
        print(f"error: {data} not found", file=sys.stderr)
        return 2
    meta, columns, rows = read_csv(data)
    if not rows:
        print("error: empty data file", file=sys.stderr)
        return 2
    col = args.column or columns[-1]
    if col not in columns:
        print(f"error: column {col!r} not in {columns}", file=sys.stderr)
        return 2
    import numpy as np

    values = np.array([float(r[columns.index(col)]) for r in rows])
    y_values = None
    if args.kind == "scatter":
        ycol = args.y_column or columns[-1]
        y_values = np.array([float(r[columns.index(ycol)]) for r in rows])
    table = emit_plot_data(
        values, args.kind, Path(args.run) / f"plot_{col}", meta, y_values=y_values
    )
    figure = render_figure(table)
    print(f"wrote {table}\nwrote {figure}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "plot":
        return _cmd_plot(args)
    try:
        config = _experiment_config(args)
        if args.workers is None and config.workers == 1:
            config.workers = resolve_workers(None)
        record, failures = run(config)
    except (ConfigError, PopulationCapError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"run complete: {record.experiment} hash={record.config_hash} -> {config.out_dir}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
