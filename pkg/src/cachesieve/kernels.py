"""Per-segment marking kernels and the circle/bucket state transition.

A segment is a little-endian ``uint64`` word array holding ``2**l`` bits
(one word when ``l < 6``; the unused high bits are kept clear).  Bit ``q`` of
segment ``t`` stands for ``2*((f + t)*2**l + q) + 1``.

Kernels run in the order masks, wheel-medium, dense-medium, large.  Marks are
idempotent, so the order only matters for instrumentation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .base import WHEEL_SHIFT, Q_MASK, BaseTable, CircleSet, bucket_base
from .params import SieveParams
from .wheel import DELTAS, SmallPrimeMask

UNROLL_H = 4
_BATCH = 1 << UNROLL_H

LARGE_UNROLLED = 0
LARGE_PLAIN = 1
LARGE_NAIVE = 2
LARGE_MODES = {"unrolled": LARGE_UNROLLED, "plain": LARGE_PLAIN, "naive": LARGE_NAIVE}

_NO_COUNTS = np.zeros(0, dtype=np.int32)


class SegmentBuffer:
    """The bitmap of one segment; reused across segments by :meth:`clear`."""

    def __init__(self, l: int, t: int = 0):
        self.l = l
        self.nbits = 1 << l
        self.words = np.zeros(max(1, self.nbits >> 6), dtype="<u8")
        self.t = t

    def clear(self, t: int) -> None:
        self.words[:] = 0
        self.t = t

    def to_bytes(self) -> bytes:
        return self.words.view(np.uint8)[: max(1, self.nbits >> 3)].tobytes()

    def bits(self) -> np.ndarray:
        """Boolean view of the segment, index ``q`` = bit ``q``."""
        return np.unpackbits(self.words.view(np.uint8), bitorder="little")[: self.nbits].astype(bool)

    def marked(self) -> list[int]:
        return np.flatnonzero(self.bits()).tolist()

    def zero_count(self) -> int:
        return self.nbits - int(np.bitwise_count(self.words).sum())


@njit(cache=True, inline="always")
def _mark(seg, q):
    seg[q >> 6] |= np.uint64(1) << np.uint64(q & 63)


# -- small primes ------------------------------------------------------------


@njit(cache=True)
def _apply_masks(seg, nbits, table, starts, moduli, phases):
    nmask = len(moduli)
    ph = phases.copy()
    adv = np.empty(nmask, dtype=np.int64)
    for m in range(nmask):
        adv[m] = 64 % moduli[m]
    for w in range(len(seg)):
        acc = np.uint64(0)
        for m in range(nmask):
            acc |= table[starts[m] + ph[m]]
            ph[m] += adv[m]
            if ph[m] >= moduli[m]:
                ph[m] -= moduli[m]
        seg[w] |= acc
    if nbits < 64:
        seg[0] &= (np.uint64(1) << np.uint64(nbits)) - np.uint64(1)


def apply_small_masks(segment: SegmentBuffer, masks: list[SmallPrimeMask]) -> None:
    """OR every mask into the segment, then advance each mask's phase one segment."""
    if not masks:
        return
    table = np.concatenate([m.words for m in masks]).astype(np.uint64)
    moduli = np.array([m.modulus for m in masks], dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(moduli)[:-1]]).astype(np.int64)
    phases = np.array([m.phase for m in masks], dtype=np.int64)
    _apply_masks(segment.words, segment.nbits, table, starts, moduli, phases)
    for m in masks:
        m.advance()


# -- medium primes -----------------------------------------------------------


@njit(cache=True)
def _sieve_wheel(seg, primes, offsets, lo, hi, nbits, deltas):
    for i in range(lo, hi):
        p = np.int64(primes[i])
        word = np.int64(offsets[i])
        q = word & Q_MASK
        s = word >> WHEEL_SHIFT
        while q < nbits:
            _mark(seg, q)
            q += deltas[s] * p
            s = (s + 1) & 7
        offsets[i] = (q - nbits) | (s << WHEEL_SHIFT)


def sieve_medium_wheel(segment: SegmentBuffer, primes: np.ndarray, offsets: np.ndarray,
                       lo: int = 0, hi: int | None = None) -> None:
    """Mark ``q, q + D[s]*p, ...`` for each wheel pair; offsets carry over in place."""
    hi = len(primes) if hi is None else hi
    _sieve_wheel(segment.words, primes, offsets, lo, hi, segment.nbits, DELTAS)


@njit(cache=True)
def _sieve_dense(seg, primes, offsets, lo, hi, k, nbits):
    for i in range(lo, hi):
        p = np.int64(primes[i])
        q = np.int64(offsets[i])
        for j in range(k):
            _mark(seg, q + j * p)
        last = q + k * p
        take = np.int64(last < nbits)
        # re-marking q is the no-op arm of the select
        _mark(seg, q + take * (k * p))
        offsets[i] = q + (k + take) * p - nbits


@njit(cache=True)
def _sieve_dense_naive(seg, primes, offsets, lo, hi, nbits):
    for i in range(lo, hi):
        p = np.int64(primes[i])
        q = np.int64(offsets[i])
        while q < nbits:
            _mark(seg, q)
            q += p
        offsets[i] = q - nbits


def sieve_medium_dense(segment: SegmentBuffer, k: int, primes: np.ndarray, offsets: np.ndarray,
                       lo: int = 0, hi: int | None = None, naive: bool = False) -> None:
    """Fixed-count kernel for primes with ``2**l // p == k``.

    Each pair gets ``k`` unconditional marks and one predicated mark.  Needs
    ``q + (k-1)*p < 2**l``, which holds whenever ``q < p``.
    """
    hi = len(primes) if hi is None else hi
    if naive:
        _sieve_dense_naive(segment.words, primes, offsets, lo, hi, segment.nbits)
    else:
        _sieve_dense(segment.words, primes, offsets, lo, hi, k, segment.nbits)


# -- large primes ------------------------------------------------------------


def advance_pair_large(p: int, q: int, k: int, l: int) -> tuple[int, int]:
    """Segments skipped by the next multiple of ``p`` and its new offset."""
    nq = q + p
    if nq < (k + 1) << l:
        return k, nq - (k << l)
    return k + 1, nq - ((k + 1) << l)


@njit(cache=True, inline="always")
def _process(seg, counts, p, q, k, l):
    """Mark ``q``; return (goes to the previous bucket, new offset)."""
    _mark(seg, q)
    if len(counts) > 0:
        counts[q] += 1
    nq = q + p
    lower = nq < ((k + 1) << l)
    if lower:
        return True, nq - (k << l)
    return False, nq - ((k + 1) << l)


@njit(cache=True)
def _steps(seg, counts, primes, offsets, k, l, lo, hi, hole, cp, cq, nsteps):
    """Run ``nsteps`` two-ended steps over the unprocessed region ``lo .. hi-1``.

    ``hole`` is 0 (no pair held), 1 (slot ``lo`` is free and its pair is
    held in ``cp, cq``) or 2 (same for slot ``hi - 1``).  Results bound for
    the previous bucket are written at ``lo``, those staying in this bucket
    at ``hi - 1``; whichever end was written, the pair displaced there (if
    still unprocessed) is the next one held.  For a wrapped region ``hi`` is
    physically below ``lo``, so ``hi - lo == 1`` only when one slot is left.
    """
    lim = (k + 1) << l
    low_shift = k << l
    for _ in range(nsteps):
        if hole == 0:
            cp = np.int64(primes[lo])
            cq = np.int64(offsets[lo])
            hole = 1
        seg[cq >> 6] |= np.uint64(1) << np.uint64(cq & 63)
        if len(counts) > 0:
            counts[cq] += 1
        nq = cq + cp
        lower = nq < lim
        nq = nq - low_shift if lower else nq - lim
        if hi - lo == 1:
            # the only slot left is the hole
            primes[lo] = cp
            offsets[lo] = nq
            hole = 0
            if lower:
                lo += 1
            else:
                hi -= 1
        elif lower:
            if hole == 1:
                primes[lo] = cp
                offsets[lo] = nq
                hole = 0
            else:
                tp = np.int64(primes[lo])
                tq = np.int64(offsets[lo])
                primes[lo] = cp
                offsets[lo] = nq
                cp = tp
                cq = tq
            lo += 1
        else:
            if hole == 2:
                primes[hi - 1] = cp
                offsets[hi - 1] = nq
                hole = 0
            else:
                tp = np.int64(primes[hi - 1])
                tq = np.int64(offsets[hi - 1])
                primes[hi - 1] = cp
                offsets[hi - 1] = nq
                cp = tp
                cq = tq
            hi -= 1
    return lo, hi, hole, cp, cq


@njit(cache=True)
def _run_contiguous(seg, counts, primes, offsets, k, l, lo, hi, hole, cp, cq):
    """Process ``[lo, hi)`` in batches of 2**h steps, then the remainder."""
    n = hi - lo
    for _ in range(n >> UNROLL_H):
        lo, hi, hole, cp, cq = _steps(seg, counts, primes, offsets, k, l, lo, hi, hole, cp, cq, _BATCH)
    lo, hi, hole, cp, cq = _steps(seg, counts, primes, offsets, k, l, lo, hi, hole, cp, cq, n & (_BATCH - 1))
    return lo


@njit(cache=True)
def _bucket_unrolled(seg, counts, primes, offsets, k, l, lo, hi, cs, ce, is_broken):
    """Process one bucket; return (new lower boundary, wrapped past the circle end)."""
    hole = 0
    cp = np.int64(0)
    cq = np.int64(0)
    if not is_broken:
        return _run_contiguous(seg, counts, primes, offsets, k, l, lo, hi, hole, cp, cq), False
    # broken: [lo, ce) then [cs, hi); min(d1, d2) steps cannot cross either end
    d1 = ce - lo
    d2 = hi - cs
    while d1 > 0 and d2 > 0:
        m = min(d1, d2)
        steps = _BATCH if m >> UNROLL_H else m & (_BATCH - 1)
        lo, hi, hole, cp, cq = _steps(seg, counts, primes, offsets, k, l, lo, hi, hole, cp, cq, steps)
        d1 = ce - lo
        d2 = hi - cs
    if d1 == 0:
        lo = _run_contiguous(seg, counts, primes, offsets, k, l, cs, hi, hole, cp, cq)
        return lo, True
    lo = _run_contiguous(seg, counts, primes, offsets, k, l, lo, ce, hole, cp, cq)
    if lo == ce:
        return cs, True
    return lo, False


@njit(cache=True)
def _bucket_plain(seg, counts, primes, offsets, k, l, lo, hi, cs, ce, is_broken):
    """Same steps as :func:`_bucket_unrolled`, one at a time on logical positions."""
    span = ce - cs
    if is_broken:
        hi = ce + (hi - cs)
    hole = 0
    cp = np.int64(0)
    cq = np.int64(0)
    while lo < hi:
        plo = lo - span if lo >= ce else lo
        phi = hi - span if hi > ce else hi
        nlo, nhi, hole, cp, cq = _steps(seg, counts, primes, offsets, k, l, plo, phi, hole, cp, cq, 1)
        lo += nlo - plo
        hi += nhi - phi
    if is_broken and lo >= ce:
        return lo - span, True
    return lo, False


@njit(cache=True)
def _bucket_naive(seg, counts, primes, offsets, k, l, lo, hi, cs, ce, is_broken):
    """Out-of-place, single-ended reference: read all, process in order, write back."""
    span = ce - cs
    if is_broken:
        hi = ce + (hi - cs)
    n = hi - lo
    ps = np.empty(n, dtype=np.int64)
    qs = np.empty(n, dtype=np.int64)
    for i in range(n):
        x = lo + i
        x = x - span if x >= ce else x
        ps[i] = primes[x]
        qs[i] = offsets[x]
    low_p = np.empty(n, dtype=np.int64)
    low_q = np.empty(n, dtype=np.int64)
    up_p = np.empty(n, dtype=np.int64)
    up_q = np.empty(n, dtype=np.int64)
    a = 0
    c = 0
    for i in range(n):
        lower, nq = _process(seg, counts, ps[i], qs[i], k, l)
        if lower:
            low_p[a] = ps[i]
            low_q[a] = nq
            a += 1
        else:
            up_p[c] = ps[i]
            up_q[c] = nq
            c += 1
    for i in range(n):
        x = lo + i
        x = x - span if x >= ce else x
        if i < a:
            primes[x] = low_p[i]
            offsets[x] = low_q[i]
        else:
            primes[x] = up_p[i - a]
            offsets[x] = up_q[i - a]
    nlo = lo + a
    if is_broken and nlo >= ce:
        return nlo - span, True
    return nlo, False


@njit(cache=True)
def _sieve_large(seg, counts, primes, offsets, cend, bucket, current, broken, K, l, mode):
    for k in range(1, K + 1):
        cs = cend[k - 1]
        ce = cend[k]
        b = current[k]
        nb = k + 1
        if ce > cs:
            base = k * (k + 1) // 2
            lo = bucket[base + b]
            hi = bucket[base + (b + 1) % nb]
            is_broken = broken[k] == b
            if mode == 0:
                nlo, wrapped = _bucket_unrolled(seg, counts, primes, offsets, k, l, lo, hi, cs, ce, is_broken)
            elif mode == 1:
                nlo, wrapped = _bucket_plain(seg, counts, primes, offsets, k, l, lo, hi, cs, ce, is_broken)
            else:
                nlo, wrapped = _bucket_naive(seg, counts, primes, offsets, k, l, lo, hi, cs, ce, is_broken)
            bucket[base + b] = nlo
            if wrapped:
                broken[k] = (b + k) % nb
        current[k] = (b + 1) % nb


def sieve_large(segment: SegmentBuffer, circles: CircleSet, mode: str = "unrolled",
                counts: np.ndarray | None = None) -> None:
    """Sieve the current bucket of every circle and move each circle to its next state.

    ``counts``, if given (``int32``, one entry per segment bit), is incremented
    for every mark made by this path.
    """
    c = circles
    _sieve_large(segment.words, _NO_COUNTS if counts is None else counts, c.primes, c.offsets,
                 c.cend, c.bucket, c.current, c.broken, c.K, c.l, LARGE_MODES[mode])


# -- whole segment -----------------------------------------------------------


@dataclass
class KernelConfig:
    large_mode: str = "unrolled"
    dense_naive: bool = False


def sieve_medium(segment: SegmentBuffer, base: BaseTable, config: KernelConfig) -> None:
    c = base.circles
    if base.wheel_end:
        sieve_medium_wheel(segment, c.primes, c.offsets, 0, base.wheel_end)
    for k in range(1, len(base.dense_ranges)):
        lo, hi = base.dense_ranges[k]
        if hi > lo:
            sieve_medium_dense(segment, k, c.primes, c.offsets, int(lo), int(hi), naive=config.dense_naive)


# -- invariant checking ------------------------------------------------------


@dataclass
class InvariantReport:
    ok: bool
    t: int
    k: int = -1
    d: int = -1
    p: int = 0
    q: int = 0
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _divides(p: np.ndarray, seg_index: np.ndarray, q: np.ndarray, l: int) -> np.ndarray:
    """``p | 2*(seg_index*2**l + q) + 1`` evaluated mod ``p`` in uint64."""
    p = p.astype(np.uint64)
    a = seg_index.astype(np.uint64) % p
    sh = np.uint64((1 << l)) % p
    x = (a * sh) % p
    x = (x + q.astype(np.uint64) % p) % p
    return (np.uint64(2) * x + np.uint64(1)) % p == 0


def validate_circle_invariants(circles: CircleSet, params: SieveParams, t: int,
                               base: BaseTable | None = None) -> InvariantReport:
    """Check every large pair against its circle/bucket invariants in state ``t``.

    Per circle ``k`` with current bucket ``b = t mod (k+1)``: the prime lies in
    ``(k*2**l, (k+1)*2**l)``, the offset is below ``2**l``, and the pair's
    number is divisible by ``p`` in segment ``t + d - b + k + 1`` when
    ``d < b`` and in segment ``t + d - b`` otherwise.  Every pair of the circle
    must sit in exactly one bucket.  With ``base`` the medium pairs (circle 0)
    are checked too.
    """
    l, f = params.l, params.f
    seg = 1 << l
    c = circles
    for k in range(1, c.K + 1):
        b = t % (k + 1)
        if c.current[k] != b:
            return InvariantReport(False, t, k, int(c.current[k]), reason="current bucket != t mod (k+1)")
        seen = 0
        for d in range(k + 1):
            idx = c.bucket_slots(k, d)
            seen += len(idx)
            if not len(idx):
                continue
            p = c.primes[idx].astype(np.int64)
            q = c.offsets[idx].astype(np.int64)
            shift = t + d - b + (k + 1 if d < b else 0)
            checks = (
                ((p > k * seg) & (p < (k + 1) * seg), "prime outside the circle's range"),
                (q < seg, "offset not below 2^l"),
                (_divides(p, np.full(len(p), f + shift), np.minimum(q, seg - 1), l) & (q < seg),
                 "offset does not hit a multiple of p"),
            )
            for good, reason in checks:
                if not good.all():
                    i = int(np.flatnonzero(~good)[0])
                    return InvariantReport(False, t, k, d, int(p[i]), int(q[i]), reason)
        span = int(c.cend[k]) - c.cstart(k)
        if seen != span:
            return InvariantReport(False, t, k, reason=f"buckets hold {seen} pairs, circle has {span}")
    if base is not None:
        rep = _validate_medium(base, params, t)
        if not rep:
            return rep
    return InvariantReport(True, t)


def _validate_medium(base: BaseTable, params: SieveParams, t: int) -> InvariantReport:
    from .wheel import RESIDUES

    l, f = params.l, params.f
    seg = 1 << l
    c = base.circles
    n = base.wheel_end
    p = c.primes[:n].astype(np.int64)
    word = c.offsets[:n].astype(np.int64)
    q = word & Q_MASK
    s = word >> WHEEL_SHIFT
    start = (f + t) << l
    ok = (q < seg) & _divides(p, np.full(n, f + t), np.minimum(q, seg - 1), l)
    # cofactor index of 2*(start + q) + 1 = p * (2*j + 1)
    j = ((start + q) - (p - 1) // 2) // p
    ok &= np.array(RESIDUES)[s] == j % 15
    if not ok.all():
        i = int(np.flatnonzero(~ok)[0])
        return InvariantReport(False, t, 0, 0, int(p[i]), int(q[i]), "wheel pair out of step")
    lo, hi = base.wheel_end, int(c.cend[0])
    p = c.primes[lo:hi].astype(np.int64)
    q = c.offsets[lo:hi].astype(np.int64)
    ok = (q < p) & _divides(p, np.full(len(p), f + t), np.minimum(q, seg - 1), l)
    if not ok.all():
        i = int(np.flatnonzero(~ok)[0])
        return InvariantReport(False, t, 0, 0, int(p[i]), int(q[i]), "dense pair out of step")
    return InvariantReport(True, t)
