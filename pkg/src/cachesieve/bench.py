"""Timing of fixed-size intervals (2**30 table bits) centred near 10**e."""

from __future__ import annotations

import csv
import logging
import math
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

from .driver import run_sieve
from .errors import SieveError
from .params import params_from_midpoint, validate_params

log = logging.getLogger(__name__)

INTERVAL_LOG = 30


@dataclass
class BenchRow:
    e: int
    seconds: float
    l: int
    machine: str = ""
    prime_count: int = -1
    error: str = ""


def bench_one(e: int, l: int, runs: int = 3, warmup: bool = True, interval_log: int = INTERVAL_LOG) -> BenchRow:
    n = 1 << max(0, interval_log - l)
    params = validate_params(l, params_from_midpoint(e, l, n), n)
    if warmup:
        run_sieve(params)
    times = []
    count = -1
    for _ in range(runs):
        t0 = time.perf_counter()
        count = run_sieve(params).prime_count
        times.append(time.perf_counter() - t0)
    return BenchRow(e, statistics.median(times), l, prime_count=count)


def bench_run(exps: list[int], l: int = 21, machine: str = "", runs: int = 3,
              warmup: bool = True, csv_path: str | Path | None = None,
              interval_log: int = INTERVAL_LOG) -> list[BenchRow]:
    """One row per exponent, ascending; a failing row is recorded and skipped."""
    rows = []
    for e in sorted(exps):
        try:
            row = bench_one(e, l, runs, warmup, interval_log)
        except SieveError as exc:
            log.warning("e=%d failed: %s", e, exc)
            row = BenchRow(e, math.nan, l, error=str(exc))
        row.machine = machine
        log.info("e=%d l=%d %.3fs", e, l, row.seconds)
        rows.append(row)
    if csv_path is not None:
        write_csv(csv_path, rows)
    return rows


def write_csv(path: str | Path, rows: list[BenchRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["e", "seconds", "l"])
        for r in rows:
            w.writerow([r.e, f"{r.seconds:.6f}", r.l])


def flatness(rows: list[BenchRow], lo: int = 12, hi: int = 15) -> float:
    """``seconds(10**hi) / seconds(10**lo)``."""
    by_e = {r.e: r.seconds for r in rows}
    return by_e[hi] / by_e[lo]
