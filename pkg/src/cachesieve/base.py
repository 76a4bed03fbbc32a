"""Base primes, their classification and the circle/bucket arrays at state 0.

All sieving pairs live in one flat pair array (``primes``, ``offsets``):

* ``[0, wheel_end)``: wheel-medium primes, offset word ``q | s << 29``;
* ``dense_ranges[k]``: dense-medium primes with ``2**l // p == k``;
* ``[cend[k-1], cend[k])`` for ``k >= 1``: the large primes of circle ``k``.

``cend[0]`` closes the medium block.  Circle ``k`` owns bucket entries
``k*(k+1)//2 .. k*(k+1)//2 + k`` of ``bucket``; each entry is the pair index
where that bucket starts.  Bucket ``d`` runs up to the start of bucket
``d+1 (mod k+1)``, except the broken bucket ``broken[k]`` which runs to the end
of the circle and continues from its start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SieveError
from .oracle import simple_sieve
from .params import SieveParams
from .wheel import SMALL_PRIMES, SmallPrimeMask, first_offsets, small_prime_masks, wheel_align_all

WHEEL_SHIFT = 29
Q_MASK = (1 << WHEEL_SHIFT) - 1
DENSE_MAX_K = 15
DEFAULT_MAX_PAIRS = 1 << 28


class PrimeClass(NamedTuple):
    kind: str  # "small", "wheel", "dense" or "large"
    k: int  # dense: 2**l // p; large: circle order p // 2**l; else 0


def classify_prime(p: int, l: int) -> PrimeClass:
    seg = 1 << l
    if p > seg:
        return PrimeClass("large", p >> l)
    if p <= SMALL_PRIMES[-1]:
        return PrimeClass("small", 0)
    if p <= seg // (DENSE_MAX_K + 1):
        return PrimeClass("wheel", 0)
    return PrimeClass("dense", seg // p)


def bucket_base(k: int) -> int:
    return k * (k + 1) // 2


@dataclass
class CircleSet:
    """Circles ``C^0..C^K`` over the flat pair array.

    ``current[k]`` is the index of the bucket due for the next segment and
    ``broken[k]`` the bucket that wraps around the end of the circle.
    """

    l: int
    K: int
    primes: np.ndarray  # uint32
    offsets: np.ndarray  # uint32
    cend: np.ndarray  # int64, K+1
    bucket: np.ndarray  # int64, (K+1)(K+2)/2
    current: np.ndarray  # int64, K+1
    broken: np.ndarray  # int64, K+1

    def cstart(self, k: int) -> int:
        return 0 if k == 0 else int(self.cend[k - 1])

    def bucket_slots(self, k: int, d: int) -> np.ndarray:
        """Pair indices of bucket ``d`` of circle ``k`` (wrapping for the broken one)."""
        base = bucket_base(k)
        lo = int(self.bucket[base + d])
        hi = int(self.bucket[base + (d + 1) % (k + 1)])
        cs, ce = self.cstart(k), int(self.cend[k])
        if k == 0:
            return np.arange(cs, ce)
        if d == self.broken[k]:
            return np.concatenate([np.arange(lo, ce), np.arange(cs, hi)])
        return np.arange(lo, hi)

    def bucket_pairs(self, k: int, d: int) -> list[tuple[int, int]]:
        idx = self.bucket_slots(k, d)
        return list(zip(self.primes[idx].tolist(), self.offsets[idx].tolist()))

    def copy(self) -> "CircleSet":
        return CircleSet(
            self.l, self.K, self.primes.copy(), self.offsets.copy(), self.cend.copy(),
            self.bucket.copy(), self.current.copy(), self.broken.copy(),
        )


@dataclass
class BaseTable:
    params: SieveParams
    base_primes: np.ndarray  # all odd primes <= sqrt(v)
    masks: list[SmallPrimeMask]
    wheel_end: int
    dense_ranges: np.ndarray  # int64, shape (16, 2); row k = [start, end)
    circles: CircleSet

    @property
    def K(self) -> int:
        return self.circles.K

    @property
    def primes(self) -> np.ndarray:
        return self.circles.primes

    @property
    def offsets(self) -> np.ndarray:
        return self.circles.offsets

    def class_primes(self, kind: str, k: int = 0) -> np.ndarray:
        c = self.circles
        if kind == "small":
            return np.array([p for m in self.masks for p in m.primes], dtype=np.int64)
        if kind == "wheel":
            return c.primes[: self.wheel_end]
        if kind == "dense":
            lo, hi = self.dense_ranges[k]
            return c.primes[lo:hi]
        if kind == "large":
            return c.primes[c.cstart(k) : c.cend[k]]
        raise ValueError(kind)


def build_base(params: SieveParams, max_pairs: int = DEFAULT_MAX_PAIRS) -> BaseTable:
    """Find the odd primes up to ``sqrt(v)``, compute offsets, lay out circles."""
    l, f = params.l, params.f
    seg = 1 << l
    limit = params.sqrt_v
    est = limit / math.log(limit) if limit > 2 else 1
    # the bucket index table grows as K**2 / 2
    kmax = limit >> l
    if (kmax + 1) * (kmax + 2) // 2 > max_pairs:
        raise SieveError("ALLOC_LIMIT", f"{kmax} circles need too many bucket entries; use a larger l")
    if est > 1.2 * max_pairs:
        raise SieveError("ALLOC_LIMIT", f"about {int(est)} base primes exceed the cap {max_pairs}")
    base = simple_sieve(limit).astype(np.int64)
    base = base[base > 2]
    if len(base) > max_pairs:
        raise SieveError("ALLOC_LIMIT", f"{len(base)} base primes exceed the cap {max_pairs}")
    K = int(base[-1]) >> l if len(base) else 0

    masks = small_prime_masks(params)
    masked = {p for m in masks for p in m.primes}

    large = base[base > seg]
    medium = base[(base < seg) & ~np.isin(base, list(masked))]
    wheel = medium[medium <= seg // (DENSE_MAX_K + 1)]
    dense = medium[medium > seg // (DENSE_MAX_K + 1)]

    wq, ws = wheel_align_all(wheel, first_offsets(wheel, l, f), l, f)
    wheel_words = wq | (ws << WHEEL_SHIFT)

    # dense primes ascend, so k = seg // p descends along the array
    dense_k = seg // dense if len(dense) else np.zeros(0, dtype=np.int64)
    dense_ranges = np.zeros((DENSE_MAX_K + 1, 2), dtype=np.int64)
    start = len(wheel)
    for k in range(DENSE_MAX_K, 0, -1):
        cnt = int(np.count_nonzero(dense_k == k))
        dense_ranges[k] = (start, start + cnt)
        start += cnt
    dq = first_offsets(dense, l, f)

    circles = init_circles(params, large, K, medium_words=np.concatenate([wheel_words, dq]),
                           medium_primes=np.concatenate([wheel, dense]))
    return BaseTable(params, base, masks, len(wheel), dense_ranges, circles)


def init_circles(params: SieveParams, large: np.ndarray, K: int,
                 medium_primes: np.ndarray | None = None,
                 medium_words: np.ndarray | None = None) -> CircleSet:
    """Place every large prime in bucket ``q' // 2**l`` of circle ``p // 2**l``.

    ``q'`` is the first offset relative to segment 0 and the stored offset is
    ``q' mod 2**l``.  Pairs are sorted by ``q'`` within a circle, so bucket 0
    starts at the circle's start and no bucket wraps; ``broken[k] = k``.
    """
    l, f = params.l, params.f
    if medium_primes is None:
        medium_primes = np.zeros(0, dtype=np.int64)
        medium_words = np.zeros(0, dtype=np.int64)
    nmed = len(medium_primes)
    primes = np.zeros(nmed + len(large), dtype=np.uint32)
    offsets = np.zeros(nmed + len(large), dtype=np.uint32)
    primes[:nmed] = medium_primes
    offsets[:nmed] = medium_words

    cend = np.zeros(K + 1, dtype=np.int64)
    bucket = np.zeros((K + 1) * (K + 2) // 2, dtype=np.int64)
    current = np.zeros(K + 1, dtype=np.int64)
    broken = np.arange(K + 1, dtype=np.int64)
    cend[0] = nmed

    large = np.asarray(large, dtype=np.int64)
    qfirst = first_offsets(large, l, f)
    order = np.lexsort((qfirst, large >> l))
    large, qfirst = large[order], qfirst[order]
    bounds = np.searchsorted(large >> l, np.arange(K + 2))
    pos = nmed
    for k in range(1, K + 1):
        ps, qs = large[bounds[k] : bounds[k + 1]], qfirst[bounds[k] : bounds[k + 1]]
        d = qs >> l
        primes[pos : pos + len(ps)] = ps
        offsets[pos : pos + len(ps)] = qs & ((1 << l) - 1)
        counts = np.bincount(d, minlength=k + 1) if len(d) else np.zeros(k + 1, dtype=np.int64)
        starts = pos + np.concatenate([[0], np.cumsum(counts)[:-1]])
        bucket[bucket_base(k) : bucket_base(k) + k + 1] = starts
        pos += len(ps)
        cend[k] = pos
    return CircleSet(l, K, primes, offsets, cend, bucket, current, broken)
