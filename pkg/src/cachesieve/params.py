"""Sieve parameters and the mapping between table bits and odd numbers.

The table covers the odd numbers of ``[u, v]`` where ``u = f * 2**(l+1) + 1``
and ``v = (f + n) * 2**(l+1)``.  Bit ``j`` stands for ``2*(f*2**l + j) + 1``;
segment ``t`` is the slice of bits ``[t*2**l, (t+1)*2**l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SieveError

L_MIN = 10
L_MIN_TEST = 4
L_MAX = 30
# table indices are int64 inside the kernels
INDEX_LIMIT = 1 << 62


@dataclass(frozen=True)
class SieveParams:
    l: int
    f: int
    n: int
    test_mode: bool = False

    @property
    def seg_bits(self) -> int:
        return 1 << self.l

    @property
    def u(self) -> int:
        return self.f * (1 << (self.l + 1)) + 1

    @property
    def v(self) -> int:
        return (self.f + self.n) * (1 << (self.l + 1))

    @property
    def total_bits(self) -> int:
        return self.n << self.l

    @property
    def sqrt_v(self) -> int:
        return math.isqrt(self.v)

    @property
    def seg_bytes(self) -> int:
        return max(1, self.seg_bits >> 3)

    def segment_start(self, t: int) -> int:
        """Global bit index ``(f + t) * 2**l`` of the first bit of segment ``t``."""
        return (self.f + t) << self.l


def validate_params(l: int, f: int, n: int, test_mode: bool = False) -> SieveParams:
    """Check ``(l, f, n)`` and return the derived parameters.

    Raises :class:`SieveError` with code ``L_OUT_OF_RANGE``, ``N_OUT_OF_RANGE``,
    ``F_ZERO_OR_OVERLAP`` (``u*u <= v``: the base would reach into the
    interval) or ``OVERFLOW``.
    """
    lo = L_MIN_TEST if test_mode else L_MIN
    if not lo <= l <= L_MAX:
        raise SieveError("L_OUT_OF_RANGE", f"l={l} not in [{lo}, {L_MAX}]")
    if n < 1:
        raise SieveError("N_OUT_OF_RANGE", f"n={n} must be at least 1")
    if f < 1:
        raise SieveError("F_ZERO_OR_OVERLAP", f"f={f} must be at least 1")
    params = SieveParams(l, f, n, test_mode)
    if params.v >= 1 << 64:
        raise SieveError("OVERFLOW", f"v={params.v} does not fit in 64 bits")
    if params.total_bits >= INDEX_LIMIT:
        raise SieveError("OVERFLOW", f"n*2^l={params.total_bits} overflows the table index")
    if params.u * params.u <= params.v:
        raise SieveError(
            "F_ZERO_OR_OVERLAP",
            f"u={params.u} is not above sqrt(v)={params.sqrt_v}; increase f or decrease n",
        )
    return params


def index_to_number(params: SieveParams, j: int) -> int:
    if not 0 <= j < params.total_bits:
        raise SieveError("INDEX_OUT_OF_RANGE", f"j={j} outside [0, {params.total_bits})")
    return 2 * ((params.f << params.l) + j) + 1


def number_to_index(params: SieveParams, x: int) -> int:
    if x % 2 == 0:
        raise SieveError("INDEX_OUT_OF_RANGE", f"{x} is even and has no table bit")
    if not params.u <= x <= params.v:
        raise SieveError("INDEX_OUT_OF_RANGE", f"{x} outside [{params.u}, {params.v}]")
    return (x - 1) // 2 - (params.f << params.l)


def params_from_midpoint(e: int, l: int, n: int, test_mode: bool = False) -> int:
    """Return ``f`` so that ``n`` segments of size ``2**l`` are centred near ``10**e``.

    The result is validated; parameter errors propagate.
    """
    f = 10**e // (1 << (l + 1)) - n // 2
    return validate_params(l, f, n, test_mode).f
