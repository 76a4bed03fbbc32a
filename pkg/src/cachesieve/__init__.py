"""Cache-friendly segmented sieve of Eratosthenes over odd numbers."""

from .base import BaseTable, CircleSet, build_base, classify_prime, init_circles
from .driver import RunStats, extract_primes, run_sieve, sieve_table, write_table
from .errors import SieveError
from .kernels import KernelConfig, SegmentBuffer, validate_circle_invariants
from .oracle import oracle_bit_table, prime_count, simple_sieve
from .params import SieveParams, index_to_number, number_to_index, params_from_midpoint, validate_params

__all__ = [
    "BaseTable", "CircleSet", "KernelConfig", "RunStats", "SegmentBuffer", "SieveError", "SieveParams",
    "build_base", "classify_prime", "extract_primes", "index_to_number", "init_circles",
    "number_to_index", "oracle_bit_table", "params_from_midpoint", "prime_count", "run_sieve",
    "sieve_table", "simple_sieve", "validate_circle_invariants", "validate_params", "write_table",
]
