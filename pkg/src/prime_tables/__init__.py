"""
Prime tables: segmented sieve and cumulative weighted prime sums.
"""
from .tables import (
    PrimeTables,
    build_tables,
    theta,
    prime_pi,
    sum_plogp,
    sum_logp_over_pm1,
    primes_in,
)
from .cache import save_tables, load_tables, find_cached_tables

__all__ = [
    "PrimeTables",
    "build_tables",
    "theta",
    "prime_pi",
    "sum_plogp",
    "sum_logp_over_pm1",
    "primes_in",
    "save_tables",
    "load_tables",
    "find_cached_tables",
]
