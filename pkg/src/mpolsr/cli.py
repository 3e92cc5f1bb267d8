"""Command line front end.

Four workflows: run one scenario, sweep a parameter axis (CSV plus
figures), and encode or decode files with the any-M-of-N block codec.

Exit codes: 0 success, 1 usage, 2 invalid input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .filecodec import FormatError, decode_file, encode_file
from .mojette import InsufficientDescriptions
from .report import (
    REPORT_COLUMNS,
    SWEEP_COLUMNS,
    render_figures,
    report_row,
    summarize,
    write_rows,
    SUMMARY_COLUMNS,
)
from .scenario import (
    ScenarioConfig,
    ScenarioError,
    SweepSpec,
    apply_overrides,
    load_scenario,
    load_sweep,
    parse_sweep,
)
from .simulator import SimulationError, run_scenario

EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    # keep argparse's message but claim exit code 1 for usage problems

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="mpolsr",
                     description="multipath link-state routing laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario, print a CSV row")
    run.add_argument("--scenario", help="scenario file (key = value lines)")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override one scenario key")
    run.add_argument("--output", default="-",
                     help="CSV destination, - for stdout")
    run.add_argument("--trace", help="write an event trace to this file")

    sweep = sub.add_parser(
        "sweep", help="run a parameter sweep, write CSVs and figures")
    sweep.add_argument("--sweep", help="sweep file with sweep.* directives")
    sweep.add_argument("--scenario", help="base scenario file")
    sweep.add_argument("--set", dest="overrides", action="append",
                       default=[], metavar="KEY=VALUE",
                       help="override one base scenario key")
    sweep.add_argument("--parameter", help="swept scenario key")
    sweep.add_argument("--values", help="comma separated swept values")
    sweep.add_argument("--seeds", default="1,2,3,4,5",
                       help="comma separated seeds (default 1-5)")
    sweep.add_argument("--protocols",
                       help="comma separated protocol names")
    sweep.add_argument("--output", required=True,
                       help="directory for runs.csv, summary.csv, figures")
    sweep.add_argument("--no-figures", action="store_true",
                       help="skip figure rendering")

    enc = sub.add_parser("encode", help="split a file into n parts")
    enc.add_argument("input", help="file to encode")
    enc.add_argument("--needed", type=int, required=True, metavar="M",
                     help="parts required to reconstruct")
    enc.add_argument("--parts", type=int, required=True, metavar="N",
                     help="parts to produce")
    enc.add_argument("--output-dir", default=".",
                     help="directory for the part files")

    dec = sub.add_parser("decode", help="rebuild a file from parts")
    dec.add_argument("parts", nargs="+", help="part files")
    dec.add_argument("--output", required=True, help="reconstructed file")

    return parser


def _load_config(args) -> ScenarioConfig:
    config = load_scenario(args.scenario) if args.scenario \
        else ScenarioConfig()
    apply_overrides(config, args.overrides)
    config.validate()
    return config


def _cmd_run(args) -> int:
    config = _load_config(args)
    trace = None
    trace_fp = None
    if args.trace:
        trace_fp = open(args.trace, "w", encoding="utf-8")

        def trace(now, kind, node, detail):
            where = "-" if node is None else node
            trace_fp.write(f"{now:.6f} {kind} {where} {detail}\n")

    try:
        metrics = run_scenario(config, trace=trace)
    finally:
        if trace_fp is not None:
            trace_fp.close()
    row = report_row(config, metrics)
    if args.output == "-":
        write_rows(sys.stdout, [row], REPORT_COLUMNS)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fp:
            write_rows(fp, [row], REPORT_COLUMNS)
    return 0


def _sweep_spec(args) -> SweepSpec:
    base = load_scenario(args.scenario) if args.scenario \
        else ScenarioConfig()
    apply_overrides(base, args.overrides)
    if args.sweep:
        if args.parameter or args.values:
            raise ScenarioError(
                "give either --sweep or --parameter/--values, not both")
        return load_sweep(args.sweep) if not (args.scenario
                                              or args.overrides) \
            else parse_sweep(Path(args.sweep).read_text(encoding="utf-8"),
                             base=base)
    if not (args.parameter and args.values):
        raise ScenarioError("sweep needs --sweep or --parameter + --values")
    lines = [f"sweep.parameter = {args.parameter}",
             f"sweep.values = {args.values}",
             f"sweep.seeds = {args.seeds}"]
    if args.protocols:
        lines.append(f"sweep.protocols = {args.protocols}")
    return parse_sweep("\n".join(lines), base=base)


def _cmd_sweep(args) -> int:
    spec = _sweep_spec(args)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for protocol, value, seed, config in spec.runs():
        metrics = run_scenario(config)
        row = {"parameter": spec.parameter, "value": value}
        row.update(report_row(config, metrics))
        rows.append(row)
    with open(outdir / "runs.csv", "w", encoding="utf-8", newline="") as fp:
        write_rows(fp, rows, SWEEP_COLUMNS)
    summary = summarize(rows, spec.parameter)
    with open(outdir / "summary.csv", "w", encoding="utf-8",
              newline="") as fp:
        write_rows(fp, summary, SUMMARY_COLUMNS)
    written = [str(outdir / "runs.csv"), str(outdir / "summary.csv")]
    if not args.no_figures:
        written += render_figures(summary, spec.parameter, str(outdir))
    for path in written:
        print(path)
    return 0


def _cmd_encode(args) -> int:
    data = Path(args.input).read_bytes()
    parts = encode_file(data, args.needed, args.parts)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).name
    for index, blob in enumerate(parts):
        path = outdir / f"{stem}.part{index:02d}"
        path.write_bytes(blob)
        print(path)
    return 0


def _cmd_decode(args) -> int:
    blobs = [Path(name).read_bytes() for name in args.parts]
    data = decode_file(blobs)
    Path(args.output).write_bytes(data)
    print(args.output)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return _COMMANDS[args.command](args)
    except (ScenarioError, FormatError, InsufficientDescriptions,
            ValueError) as exc:
        print(f"mpolsr: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SimulationError, OSError) as exc:
        print(f"mpolsr: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
