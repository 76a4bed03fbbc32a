"""Brute-force reference implementations used as ground truth.

Nothing here uses segments, circles, wheels or masks: every composite is
found by plain per-prime striding over a boolean array.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SieveError
from .params import SieveParams

SIMPLE_LIMIT = 1 << 32
COUNT_LIMIT = 1 << 40
_CHUNK = 1 << 24


def simple_sieve(limit: int) -> np.ndarray:
    """All primes ``<= limit`` in ascending order (textbook sieve, odd numbers only)."""
    if limit > SIMPLE_LIMIT:
        raise SieveError("LIMIT_TOO_LARGE", f"limit {limit} exceeds 2^32")
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    if limit < 3:
        return np.array([2], dtype=np.int64)
    if limit <= 1 << 26:
        # odd[i] stands for 2*i + 1
        odd = np.ones(limit // 2 + limit % 2, dtype=bool)
        odd[0] = False
        for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
            if odd[i]:
                p = 2 * i + 1
                odd[p * p // 2 :: p] = False
        return np.concatenate([[2], 2 * np.flatnonzero(odd) + 1]).astype(np.int64)
    small = simple_sieve(math.isqrt(limit))
    parts = [small]
    lo = small[-1] + 1
    while lo <= limit:
        hi = min(lo + _CHUNK, limit + 1)
        parts.append(_odd_primes_between(lo, hi, small))
        lo = hi
    return np.concatenate(parts).astype(np.int64)


def _odd_primes_between(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Odd primes in ``[lo, hi)``; ``base`` must hold every prime up to ``sqrt(hi)``."""
    start = lo | 1
    if start >= hi:
        return np.zeros(0, dtype=np.int64)
    count = (hi - start + 1) // 2
    odd = np.ones(count, dtype=bool)
    for p in base[1:].tolist():
        if p * p >= hi:
            break
        first = max(p * p, (start + p - 1) // p * p)
        if first % 2 == 0:
            first += p
        if first < hi:
            odd[(first - start) // 2 :: p] = False
    if start == 1:
        odd[0] = False
    return start + 2 * np.flatnonzero(odd)


def is_prime_trial(x: int) -> bool:
    if x < 2:
        return False
    if x % 2 == 0:
        return x == 2
    d = 3
    while d * d <= x:
        if x % d == 0:
            return False
        d += 2
    return True


def oracle_composites(params: SieveParams) -> np.ndarray:
    """Boolean table, ``True`` where bit ``j`` stands for a composite."""
    if params.v > COUNT_LIMIT:
        raise SieveError("RANGE_TOO_LARGE", f"v={params.v} is beyond desk scale (2^40)")
    start = params.f << params.l
    table = np.zeros(params.total_bits, dtype=bool)
    for p in simple_sieve(params.sqrt_v)[1:].tolist():
        # first odd multiple of p at or above u, as a table index
        m = -(-params.u // p) * p
        if m % 2 == 0:
            m += p
        if m <= p:
            m += 2 * p
        j = (m - 1) // 2 - start
        table[j::p] = True
    return table


def oracle_bit_table(params: SieveParams) -> bytes:
    """The expected on-disk table: LSB-first packed, 1 = composite."""
    return np.packbits(oracle_composites(params), bitorder="little").tobytes()


def prime_count(a: int, b: int) -> int:
    """Number of primes in ``[a, b]`` by a naive segmented sieve."""
    if b > COUNT_LIMIT:
        raise SieveError("RANGE_TOO_LARGE", f"b={b} is beyond desk scale (2^40)")
    if b < a or b < 2:
        return 0
    a = max(a, 2)
    base = simple_sieve(math.isqrt(b))
    total = 1 if a <= 2 <= b else 0
    lo = max(a, 3)
    while lo <= b:
        hi = min(lo + _CHUNK, b + 1)
        chunk = _odd_primes_between(lo, hi, base)
        total += len(chunk)
        lo = hi
    return total
