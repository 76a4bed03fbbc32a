"""Command line entry point: ``sieve``, ``verify`` and ``bench``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import bench_run
from .driver import FileSink, TableSink, default_out_dir, run_sieve
from .errors import SieveError
from .oracle import oracle_bit_table
from .params import params_from_midpoint, validate_params

EXIT_OK, EXIT_PARAM, EXIT_RUNTIME = 0, 1, 2
PARAM_CODES = {"L_OUT_OF_RANGE", "N_OUT_OF_RANGE", "F_ZERO_OR_OVERLAP", "OVERFLOW"}


def _add_interval_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--log-seg", "-l", type=int, default=21, help="log2 of the segment size in bits")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--first", "-f", type=int, help="index of the first segment")
    g.add_argument("--midpoint-exp", "-e", type=int, help="centre the interval near 10**E")
    p.add_argument("--segments", "-n", type=int, default=1, help="number of segments")
    p.add_argument("--test-mode", action="store_true", help="allow segment sizes down to 2**4")


def _params(args):
    f = args.first
    if f is None:
        f = params_from_midpoint(args.midpoint_exp, args.log_seg, args.segments, args.test_mode)
    return validate_params(args.log_seg, f, args.segments, args.test_mode)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cachesieve", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("sieve", help="sieve an interval and write the bit table")
    _add_interval_args(s)
    s.add_argument("--out-dir", default=None, help="directory for the table (default: temp dir)")
    s.add_argument("--count-only", action="store_true", help="count primes, write nothing")

    v = sub.add_parser("verify", help="compare against the brute-force oracle")
    _add_interval_args(v)

    b = sub.add_parser("bench", help="time 2**30-bit intervals centred near 10**e")
    b.add_argument("--exps", default="12,13,14,15", help="comma separated exponents")
    b.add_argument("--log-seg", "-l", type=int, default=21)
    b.add_argument("--csv", default=None, help="write e,seconds,l rows here")
    b.add_argument("--machine", default="", help="label printed with the rows")
    b.add_argument("--runs", type=int, default=3, help="timed runs per row (median reported)")
    return parser


def _cmd_sieve(args) -> int:
    params = _params(args)
    sink = None if args.count_only else FileSink(args.out_dir or default_out_dir(), params)
    stats = run_sieve(params, sink)
    print(f"interval [{params.u}, {params.v}]  l={params.l} f={params.f} n={params.n}")
    print(f"primes: {stats.prime_count}")
    print("times: " + " ".join(f"{k}={v:.3f}s" for k, v in stats.times.items()))
    if sink is not None:
        print(f"table: {sink.path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    params = _params(args)
    sink = TableSink()
    stats = run_sieve(params, sink, check_invariants=True)
    ok = sink.data == oracle_bit_table(params)
    print(f"{'PASS' if ok else 'FAIL'}  primes={stats.prime_count} [{params.u}, {params.v}]")
    return EXIT_OK if ok else EXIT_RUNTIME


def _cmd_bench(args) -> int:
    exps = [int(x) for x in args.exps.split(",") if x.strip()]
    rows = bench_run(exps, args.log_seg, args.machine, args.runs, csv_path=args.csv)
    print("e,seconds,l" + (",machine" if args.machine else ""))
    for r in rows:
        print(f"{r.e},{r.seconds:.3f},{r.l}" + (f",{r.machine}" if args.machine else ""))
    return EXIT_RUNTIME if any(r.error for r in rows) else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return {"sieve": _cmd_sieve, "verify": _cmd_verify, "bench": _cmd_bench}[args.cmd](args)
    except SieveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM if exc.code in PARAM_CODES else EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
