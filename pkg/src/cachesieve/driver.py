"""Segment-by-segment sieve run and its outputs.

Only one segment is resident at a time; each finished segment is handed to a
sink (file writer, in-memory table, prime collector) before the buffer is
cleared for the next one.
"""

from __future__ import annotations

import logging
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Protocol

import numpy as np

from .base import BaseTable, build_base
from .errors import SieveError
from .kernels import (
    KernelConfig,
    SegmentBuffer,
    apply_small_masks,
    sieve_large,
    sieve_medium,
    validate_circle_invariants,
)
from .params import SieveParams

log = logging.getLogger(__name__)

PHASES = ("init", "masks", "medium", "large", "output")


@dataclass
class RunStats:
    prime_count: int = 0
    segments: int = 0
    times: dict[str, float] = field(default_factory=lambda: dict.fromkeys(PHASES, 0.0))

    @property
    def total_time(self) -> float:
        return sum(self.times.values())


class Sink(Protocol):
    def consume(self, t: int, segment: SegmentBuffer) -> None: ...

    def close(self) -> None: ...


def table_path(directory: str | os.PathLike, params: SieveParams) -> Path:
    return Path(directory) / f"erato_l{params.l}_f{params.f}_n{params.n}.bits"


class FileSink:
    """Streams the table to ``erato_l{l}_f{f}_n{n}.bits`` in ``directory``."""

    def __init__(self, directory: str | os.PathLike, params: SieveParams):
        self.path = table_path(directory, params)
        try:
            self._fh: BinaryIO = open(self.path, "wb")
        except OSError as exc:
            raise SieveError("IO_ERROR", f"{self.path}: {exc}") from exc

    def consume(self, t: int, segment: SegmentBuffer) -> None:
        try:
            self._fh.write(segment.to_bytes())
        except OSError as exc:
            raise SieveError("IO_ERROR", f"{self.path}: {exc}") from exc

    def close(self) -> None:
        self._fh.close()


class TableSink:
    """Keeps the whole packed table in memory."""

    def __init__(self):
        self.chunks: list[bytes] = []

    def consume(self, t: int, segment: SegmentBuffer) -> None:
        self.chunks.append(segment.to_bytes())

    def close(self) -> None:
        pass

    @property
    def data(self) -> bytes:
        return b"".join(self.chunks)


class PrimeSink:
    def __init__(self, params: SieveParams):
        self.params = params
        self.primes: list[int] = []

    def consume(self, t: int, segment: SegmentBuffer) -> None:
        self.primes.extend(extract_primes(segment, t, self.params))

    def close(self) -> None:
        pass


def extract_primes(segment: SegmentBuffer, t: int, params: SieveParams) -> list[int]:
    """Numbers of the clear bits of segment ``t``, ascending."""
    # numbers stay below v < 2**64, so uint64 is exact
    clear = np.flatnonzero(~segment.bits()).astype(np.uint64)
    start = np.uint64(params.segment_start(t))
    return (np.uint64(2) * (start + clear) + np.uint64(1)).tolist()


def primes_from_table(params: SieveParams, data: bytes) -> list[int]:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    clear = np.flatnonzero(bits[: params.total_bits] == 0).astype(np.uint64)
    start = np.uint64(params.f << params.l)
    return (np.uint64(2) * (start + clear) + np.uint64(1)).tolist()


def write_table(directory: str | os.PathLike, params: SieveParams, segments: Iterable[bytes]) -> Path:
    """Write packed segments (LSB first, 1 = composite) to the table file."""
    path = table_path(directory, params)
    try:
        with open(path, "wb") as fh:
            for chunk in segments:
                fh.write(chunk)
    except OSError as exc:
        raise SieveError("IO_ERROR", f"{path}: {exc}") from exc
    return path


def read_table(path: str | os.PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise SieveError("IO_ERROR", f"{path}: {exc}") from exc


def default_out_dir() -> str:
    return tempfile.gettempdir()


def run_sieve(
    params: SieveParams,
    sink: Sink | None = None,
    config: KernelConfig | None = None,
    check_invariants: bool = False,
    large_counts: np.ndarray | None = None,
    base: BaseTable | None = None,
) -> RunStats:
    """Sieve segments ``0..n-1`` and deliver each one to ``sink``.

    With ``check_invariants`` the circle state is validated before the first
    segment and after every transition (raises ``AssertionError`` on a
    violation).  ``large_counts`` (``int32``, one entry per table bit) receives
    the number of marks made by the large-prime path at each bit.
    """
    config = config or KernelConfig()
    stats = RunStats()
    clock = time.perf_counter

    t0 = clock()
    if base is None:
        base = build_base(params)
    seg = SegmentBuffer(params.l)
    stats.times["init"] += clock() - t0
    log.debug("base: %d primes, K=%d", len(base.base_primes), base.K)

    if check_invariants:
        _check(base, params, 0)

    seg_bits = params.seg_bits
    for t in range(params.n):
        seg.clear(t)
        t1 = clock()
        apply_small_masks(seg, base.masks)
        t2 = clock()
        sieve_medium(seg, base, config)
        t3 = clock()
        counts = None
        if large_counts is not None:
            counts = large_counts[t * seg_bits : (t + 1) * seg_bits]
        sieve_large(seg, base.circles, config.large_mode, counts)
        t4 = clock()
        stats.prime_count += seg.zero_count()
        if sink is not None:
            sink.consume(t, seg)
        t5 = clock()
        stats.times["masks"] += t2 - t1
        stats.times["medium"] += t3 - t2
        stats.times["large"] += t4 - t3
        stats.times["output"] += t5 - t4
        stats.segments += 1
        if check_invariants:
            _check(base, params, t + 1)

    if sink is not None:
        sink.close()
    return stats


def _check(base: BaseTable, params: SieveParams, t: int) -> None:
    report = validate_circle_invariants(base.circles, params, t, base)
    if not report:
        raise AssertionError(f"circle invariants violated: {report}")


def sieve_table(params: SieveParams, config: KernelConfig | None = None) -> bytes:
    sink = TableSink()
    run_sieve(params, sink, config)
    return sink.data
