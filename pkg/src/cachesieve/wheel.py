"""First offsets, the mod-15 wheel over odd numbers, and small-prime bit masks.

Only odd numbers are stored, so the wheel is taken over table indices: index
``i`` stands for ``2*i + 1`` and ``2*i + 1`` is coprime to 15 exactly when
``i % 15`` is one of ``RESIDUES``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SieveError
from .params import SieveParams

W = 15
PHI = 8
RESIDUES = (0, 3, 5, 6, 8, 9, 11, 14)
# index class 7 stands for the odd multiples of 15
WHEEL_START = 7
SMALL_PRIMES = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61)
MERGED = ((3, 11), (5, 7))


@dataclass(frozen=True)
class WheelTables:
    w: int
    residues: tuple[int, ...]
    deltas: tuple[int, ...]
    inverse: dict[int, int]
    phi: int

    @property
    def slot(self) -> dict[int, int]:
        """Residue -> wheel index ``s``."""
        return {r: s for s, r in enumerate(self.residues)}


def build_wheel() -> WheelTables:
    residues = tuple(i for i in range(W) if math.gcd(2 * i + 1, W) == 1)
    deltas = tuple(
        (W + residues[(s + 1) % len(residues)] - residues[s]) % W for s in range(len(residues))
    )
    inverse = {a: pow(a, -1, W) for a in range(W) if math.gcd(a, W) == 1}
    return WheelTables(W, residues, deltas, inverse, len(residues))


WHEEL = build_wheel()
DELTAS = np.array(WHEEL.deltas, dtype=np.int64)
_SLOT = WHEEL.slot


def first_offset(p: int, l: int, f: int) -> int:
    """Smallest ``q >= 0`` with ``p | 2*(f*2**l + q) + 1``; always ``q < p``."""
    r = (f << (l + 1)) % p
    if r % 2 == 0:
        return (p - r - 1) // 2
    return (2 * p - r - 1) // 2


def wheel_index(p: int, i: int) -> int:
    """Position in the wheel of the cofactor of ``2*i + 1 = p*c``.

    ``i`` is a global table index.  The returned ``s`` satisfies
    ``RESIDUES[s] == ((c - 1) // 2) % 15``.
    """
    if i % W not in _SLOT:
        raise SieveError("NOT_ADMISSIBLE", f"index {i} is in class {i % W}, not coprime to 15")
    x = ((WHEEL_START - i) * WHEEL.inverse[p % W]) % W
    return _SLOT[(WHEEL_START - x) % W]


def wheel_align(p: int, q0: int, l: int, f: int) -> tuple[int, int]:
    """Advance the first offset ``q0`` to the first multiple the wheel keeps.

    Returns ``(q, s)`` with ``q = q0 + m*p`` for the smallest such ``m``.
    """
    start = f << l
    q = q0
    while (start + q) % W not in _SLOT:
        q += p
    return q, wheel_index(p, start + q)


def wheel_multiples(p: int, q: int, s: int, limit: int) -> list[int]:
    """Offsets visited by wheel stepping from ``(q, s)`` while below ``limit``."""
    out = []
    while q < limit:
        out.append(q)
        q += WHEEL.deltas[s] * p
        s = (s + 1) % PHI
    return out


@dataclass
class SmallPrimeMask:
    """A periodic marking pattern for one or two small primes.

    ``pattern[y]`` is set when a global index ``i`` with ``i % modulus == y``
    is divisible-marked by one of ``primes``.  ``words[ph]`` holds the 64 bits
    starting at phase ``ph`` so that word-wise application is a table lookup.
    ``phase`` is the global index of the next segment's first bit, reduced.
    """

    modulus: int
    primes: tuple[int, ...]
    pattern: np.ndarray
    words: np.ndarray
    phase: int
    step: int = field(default=0)

    def advance(self) -> None:
        self.phase = (self.phase + self.step) % self.modulus


def _pattern(modulus: int, primes: tuple[int, ...]) -> np.ndarray:
    y = np.arange(modulus)
    hit = np.zeros(modulus, dtype=bool)
    for p in primes:
        hit |= (2 * y + 1) % p == 0
    return hit


def _phase_words(pattern: np.ndarray) -> np.ndarray:
    m = len(pattern)
    idx = (np.arange(m)[:, None] + np.arange(64)[None, :]) % m
    bits = pattern[idx].astype(np.uint64)
    return (bits << np.arange(64, dtype=np.uint64)).sum(axis=1, dtype=np.uint64)


def make_mask(primes: tuple[int, ...], params: SieveParams, modulus: int | None = None) -> SmallPrimeMask:
    m = modulus or math.prod(primes)
    pattern = _pattern(m, primes)
    return SmallPrimeMask(
        modulus=m,
        primes=primes,
        pattern=pattern,
        words=_phase_words(pattern),
        phase=params.segment_start(0) % m,
        step=params.seg_bits % m,
    )


def mask_primes(params: SieveParams) -> tuple[int, ...]:
    """Small primes sieved by masks: below 64 and below the segment size."""
    return tuple(p for p in SMALL_PRIMES if p < params.seg_bits)


def small_prime_masks(params: SieveParams) -> list[SmallPrimeMask]:
    """Masks for 3*11 (period 33), 5*7 (period 35) and each prime 13..61."""
    chosen = set(mask_primes(params))
    masks = []
    for pair in MERGED:
        present = tuple(p for p in pair if p in chosen)
        if present:
            masks.append(make_mask(present, params, modulus=math.prod(pair)))
    merged = {p for pair in MERGED for p in pair}
    for p in sorted(chosen - merged):
        masks.append(make_mask((p,), params))
    return masks


def first_offsets(primes: np.ndarray, l: int, f: int) -> np.ndarray:
    """Vectorised :func:`first_offset` for an array of odd primes below 2**32."""
    p = primes.astype(np.uint64)
    # reduce both factors first: f * 2**(l+1) can exceed 64 bits, p < 2**32
    r = (np.uint64(f) % p) * (np.uint64(1 << (l + 1)) % p) % p
    one = np.uint64(1)
    q = np.where(r % np.uint64(2) == 0, (p - r - one) // np.uint64(2), (p + p - r - one) // np.uint64(2))
    return q.astype(np.int64)


def wheel_align_all(primes: np.ndarray, q0: np.ndarray, l: int, f: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`wheel_align`; primes must be coprime to 15."""
    p = primes.astype(np.int64)
    base = (f << l) % W
    q = q0.astype(np.int64).copy()
    admissible = np.zeros(W, dtype=bool)
    admissible[list(RESIDUES)] = True
    cls = (base + q) % W
    while not admissible[cls].all():
        bad = ~admissible[cls]
        q[bad] += p[bad]
        cls = (base + q) % W
    inv = np.zeros(W, dtype=np.int64)
    for a, b in WHEEL.inverse.items():
        inv[a] = b
    slot = np.full(W, -1, dtype=np.int64)
    slot[list(RESIDUES)] = np.arange(PHI)
    x = ((WHEEL_START - cls) * inv[p % W]) % W
    s = slot[(WHEEL_START - x) % W]
    return q, s
