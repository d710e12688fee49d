"""Command-line entry point: ``roulette bench | verify | netgen``.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .bench import CSV_FIELDS, SUITES, DistributionSpec, export_csv, render_report, run_bench, run_verify
from .core import RandomSource
from .errors import SelectionError
from .netgen import degree_histogram, export_edge_list, grow
from .selectors import ENGINE_KINDS

log = logging.getLogger("roulette")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _count(text: str) -> int:
    # accepts 1000, 1e3, 10**3
    try:
        if "**" in text:
            base, exp = text.split("**")
            value = int(base) ** int(exp)
        else:
            value = float(text)
            if not value.is_integer():
                raise ValueError
            value = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    return value


def _split(values, convert=str):
    out = []
    for v in values:
        out += [convert(p) for p in v.split(",") if p]
    return out


def _dist(text: str) -> DistributionSpec:
    try:
        return DistributionSpec.parse(text)
    except SelectionError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(prog="roulette", description="roulette-wheel selection benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", parents=[common], help="time selections per method and population size")
    p.add_argument("--method", action="append", default=None,
                   help=f"engine(s), repeatable or comma separated: {', '.join(ENGINE_KINDS)}")
    p.add_argument("--n", action="append", default=None, help="population size(s), e.g. 1e3,1e4")
    p.add_argument("--dist", type=_dist, default=DistributionSpec("uniform01"),
                   help="uniform01 | constant | two-level:VALUE:COUNT | power-law:EXPONENT")
    p.add_argument("--samples", type=_count, default=10_000)
    p.add_argument("--warmup", type=_count, default=1_000)
    p.add_argument("--seed", type=_count, default=0)
    p.add_argument("--out", help="CSV output path (default: standard output)")

    p = sub.add_parser("verify", parents=[common], help="run a statistical verification suite, JSON to stdout")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--seed", type=_count, default=0)
    p.add_argument("--samples", type=_count, default=100_000, help="draws per check")
    p.add_argument("--out", help="also write the JSON report to this path")

    p = sub.add_parser("netgen", parents=[common], help="grow a preferential-attachment network")
    p.add_argument("--n", type=_count, default=10_000, help="final number of nodes")
    p.add_argument("--m", type=_count, default=2, help="edges per new node")
    p.add_argument("--m0", type=_count, default=3, help="size of the initial ring")
    p.add_argument("--method", choices=sorted(ENGINE_KINDS), default="acceptance")
    p.add_argument("--seed", type=_count, default=0)
    p.add_argument("--out", help="edge-list output path (default: standard output)")
    return parser


def _cmd_bench(args) -> int:
    methods = _split(args.method or ["linear,binary,acceptance"])
    for m in methods:
        if m not in ENGINE_KINDS:
            raise SelectionError(f"unknown method {m!r}")
    n_list = _split(args.n or ["1e3,1e4"], _count)
    records = run_bench(methods, n_list, args.dist, args.samples, args.warmup, args.seed)
    for rec in records:
        log.info("%s n=%d: %.1f ns/select, build %.3f ms, mean attempts %.4f",
                 rec.method, rec.n, rec.ns_per_select, rec.build_ns / 1e6, rec.mean_attempts)
    if args.out:
        export_csv(records, args.out)
    else:
        sys.stdout.write(",".join(CSV_FIELDS) + "\n")
        for rec in records:
            sys.stdout.write(",".join(rec.row()) + "\n")
    return EXIT_OK


def _cmd_verify(args) -> int:
    status, report = run_verify(args.suite, args.seed, args.samples)
    text = render_report(report)
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    for check in report["checks"]:
        if not check["pass"]:
            log.warning("FAILED %s: observed %r", check["name"], check["observed"])
    return status


def _cmd_netgen(args) -> int:
    net = grow(args.m0, args.m, args.n, args.method, RandomSource(args.seed))
    export_edge_list(net, args.out if args.out else sys.stdout)
    hist = degree_histogram(net)
    log.info("%d nodes, %d edges, max degree %d, mean attempts %.3f",
             net.node_count, len(net.edges), hist[-1][0], net.mean_attempts)
    return EXIT_OK


COMMANDS = {"bench": _cmd_bench, "verify": _cmd_verify, "netgen": _cmd_netgen}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (SelectionError, OSError) as exc:
        print(f"roulette {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
